#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stefan/eigenbasis.hpp"
#include "stefan/solver.hpp"

namespace stefan {

// --- boundary flux ----------------------------------------------------------

/// min over theta of -d_r q(1, theta) from the one-sided stencil of `width`
/// nodes (width 5 is fourth order). Sets *alarm when the value is <= 0.
double chi_inf(const SimState& state, const DiskGrid& grid, int width = 5, bool* alarm = nullptr);

/// Same quantity from the full spectral boundary derivative.
double chi_inf_spectral(const SimState& state, const DiskGrid& grid);

// --- Sobolev norms ------------------------------------------------------------

/// Integer-order norm (sum_{|alpha| <= s} ||d^alpha f||_0^2)^(1/2) from spectral
/// Cartesian derivatives, used for fields without Dirichlet data (v).
double cartesian_sobolev_norm(const Field& f, int s, const DiskGrid& grid);
double cartesian_sobolev_norm(const VecField& f, int s, const DiskGrid& grid);

struct DecayNorms {
    double E_beta = 0.0;
    double D_low = 0.0;
    bool second_derivative_omitted = false;
    double q_norms[3] = {0.0, 0.0, 0.0};  // ||d_t^b q||_{4-2b}
    double v_norms[2] = {0.0, 0.0};       // ||d_t^b v||_{3-2b}
};

/// E_beta and D of the lower-order decay norms. q_tt may be absent, in which
/// case the b = 2 terms are dropped and flagged.
DecayNorms decay_norms(double t, const Field& q, const Field& q_t, const Field* q_tt, const VecField& v,
                       const VecField& v_t, const EigenBasis& basis, double beta);

// --- truncated energy -------------------------------------------------------

/// Cut-off mu(r): 0 for r <= 1/2, 1 for r >= 3/4, exp-based smooth step between.
double cutoff_mu(double r);

struct EnergyFields {
    Field q, q_t, q_tt;
    VecField v, v_t;
    Eigen::VectorXd h, h_t;
    VecField psi, psi_t, psi_tt;
    Eigen::VectorXd J_boundary;
    Eigen::VectorXd dNq;  // d_N q on the boundary ring
};

struct TruncatedEnergy {
    double E = 0.0;
    double D = 0.0;
    double E_boundary = 0.0;  // the (-d_N q)-weighted h terms of E
    double D_boundary = 0.0;
    bool weight_failure = false;
};

/// Energy and dissipation functionals restricted to a + 2b <= order and
/// b <= time_order (<= 1).
TruncatedEnergy truncated_energy(const EnergyFields& f, const DiskGrid& grid, int order = 4, int time_order = 1);

/// Gathers EnergyFields from a state (time derivatives by the stepper policy).
EnergyFields energy_fields(const SimState& state, const Stepper& stepper);

// --- rates ----------------------------------------------------------------------

/// Least-squares slope of -ln(value) against t over samples inside [t_a, t_b].
double fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& value, double t_a, double t_b);

struct OddsonRate {
    double alpha = 0.5;
    double k0 = 0.5;
    double beta_drift = 0.0;
    double mu = 0.0;
    double xi0 = 0.0;
    double lambda = 0.0;
};

/// Oddson's comparison rate from coefficient snapshots over a time window.
OddsonRate oddson_rate(const std::vector<VariableCoefficients>& window, const DiskGrid& grid);

/// Largest m with q(t, x) >= m (1 - r) e^{-lambda t} over the sampled
/// interior nodes.
double fit_oddson_constant(const std::vector<double>& t, const std::vector<Field>& q, double lambda, const DiskGrid& grid);

// --- Duhamel decomposition ----------------------------------------------------

struct DuhamelSplit {
    double t = 0.0;
    Field X, Y, Z;
    double residual = 0.0;  // ||(-q_t) - (X - Y - Z)||_0
    double residual_X = 0.0;  // ||(-q_t) - X||_0
};

/// Streaming Duhamel bookkeeping in the eigenbasis. The nonlinearity is fed
/// at each step and integrated by the trapezoid rule against e^{-lambda_j (t - s)}.
class DuhamelTracker {
public:
    DuhamelTracker(const EigenBasis& basis, std::vector<double> c0);

    /// Coefficients of grad q0 . w0 (Y term source); zero by default.
    void set_initial_velocity_term(const Field& source);
    /// Feeds N(q, h)(t). Times must be increasing.
    void push(double t, const Field& nonlinearity);
    bool covers(double t) const;

    Field X(double t) const;
    DuhamelSplit split(double t, const Field& q_t) const;

private:
    const EigenBasis& basis_;
    std::vector<double> c0_;
    std::vector<double> y_;
    std::vector<double> z_;
    std::vector<double> last_n_;
    double t_last_ = 0.0;
    bool started_ = false;
};

/// N(q, h) = (a - I) : Hess q_t + b . grad q_t + a_t : Hess q + b_t . grad q with
/// a_t, b_t differenced between two coefficient snapshots.
Field duhamel_nonlinearity(const VariableCoefficients& now, const VariableCoefficients& before, double dt,
                           const Field& q, const Field& q_t, const DiskGrid& grid);

/// Every node satisfies X(t) >= (1/2) c1 lambda1 e^{-lambda1 t} phi1 (up to
/// tol relative to the right-hand side scale).
bool x_positivity_holds(const DuhamelTracker& tracker, const EigenBasis& basis, double c1, double t, double tol = 0.0);

// --- Taylor-sign monitoring -----------------------------------------------------

/// min over theta of d_N of the eigen-series q_t(t) = -sum c_j lambda_j e^{-lambda_j t} phi_j.
double series_min_dNqt(const std::vector<double>& c, const EigenBasis& basis, double t);

/// Last time where the series minimum crosses from negative to positive in
/// [0, t_max]; empty if it never becomes positive or is positive from t = 0.
std::optional<double> series_flip_time(const std::vector<double>& c, const EigenBasis& basis, double t_max);

struct TaylorSample {
    double t = 0.0;
    double min_dNqt = 0.0;
    double hopf_ratio = 0.0;
};

struct TaylorReport {
    std::optional<double> t_star;  // start of the final positive stretch
    bool starts_negative = false;
    bool persists = false;         // positive from t_star to the end
    double T_K = 0.0;
    bool before_T_K = false;
    double hopf_C = 0.0;           // fitted on the first half of the samples
    bool hopf_bound_holds = false;
};

TaylorReport taylor_sign_monitor(const std::vector<TaylorSample>& samples, double K, double c_bar, double eta);

// --- barrier ------------------------------------------------------------------

struct BarrierParams {
    double kappa1 = 1.0;
    double kappa2 = 0.5;
    double rate = 0.0;  // (3/2) lambda1
};

struct BarrierResult {
    Field residual;
    double max_value = 0.0;
    Field closed_form;
    double closed_form_error = 0.0;  // max |residual - closed_form|
    bool below_margin = false;       // max <= -C1 kappa1 e^{-rate t}
};

/// Operator (d_t - a : Hess - b . grad) applied to
/// P = kappa1 e^{-rate t} (phi1 - kappa2 (1 - r^2)), together with the expansion
/// kappa1 e^{-rate t} [-lambda1 phi1 / 2 - 2 kappa2 tr a + rate kappa2 (1 - r^2)
/// - (a - I) : Hess phi1 - b . (grad phi1 + 2 kappa2 x)].
BarrierResult barrier_residual(const BarrierParams& params, const VariableCoefficients& coeffs,
                               const EigenBasis& basis, double t, double C1 = 0.0);

VariableCoefficients identity_coefficients(const DiskGrid& grid);

struct KappaSelection {
    double kappa2 = 0.0;
    double margin = 0.0;  // -max identity residual / (kappa1 e^{-rate t})
    double C1 = 0.0;      // half the margin
    bool found = false;
};

/// Largest kappa2 in {2^-8, ..., 2^-1} with a negative identity residual at every node.
KappaSelection select_kappa2(const EigenBasis& basis);

/// Fitted C2 = sup value / (c1 eps e^{-rate t}).
double fit_forcing_constant(const std::vector<double>& t, const std::vector<double>& value, double c1, double eps,
                            double rate);

// --- constants ----------------------------------------------------------------

/// log10 F(K) = log10 max{8 K^{2 C Cbar K^2}, Cbar^10 (ln K)^10 K^{20 Cbar lambda1}}.
double log10_F(double K, double C, double c_bar, double lambda1);

/// ||f||_0^2 / ((int f phi1) ||f||_3).
double coercivity_ratio(const Field& f, const EigenBasis& basis);

/// ||A^T grad f||_0^2 / ||f||_0^2.
double twisted_poincare_ratio(const Field& f, const GaugeState& gauge, const DiskGrid& grid);

/// max over nodes of the spectral 2-norm of (T - I).
double tensor_deviation_2norm(const TensorField& T);

// --- per-time record ------------------------------------------------------------

struct DiagnosticsOptions {
    double beta = 0.0;
    int energy_order = 4;
    int energy_time_order = 1;
    int stencil_width = 5;
    bool compute_energy = true;
};

struct DiagnosticsRecord {
    double t = 0.0;
    double chi = 0.0;
    double chi_spectral = 0.0;
    bool taylor_alarm = false;
    double E_beta = 0.0;
    double D_low = 0.0;
    bool b2_omitted = false;
    double E_trunc = 0.0;
    double D_trunc = 0.0;
    bool weight_failure = false;
    double q_L2 = 0.0;
    double q_H4 = 0.0;
    double qt_norms[3] = {0.0, 0.0, 0.0};
    double h_mean = 0.0;
    double h_max = 0.0;
    double min_dNqt = 0.0;
    double hopf_ratio = 0.0;
    double enthalpy = 0.0;
};

DiagnosticsRecord record_diagnostics(const SimState& state, const Stepper& stepper, const EigenBasis& basis,
                                     const DiagnosticsOptions& options);

} // namespace stefan
