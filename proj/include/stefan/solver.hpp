#pragma once

#include <optional>
#include <vector>

#include "stefan/eigenbasis.hpp"
#include "stefan/error.hpp"
#include "stefan/gauge.hpp"

namespace stefan {

struct TemperatureField {
    Field values;
    double t = 0.0;
};

struct VelocityField {
    VecField v;
    double t = 0.0;
};

/// Fields of the previous step kept for time differencing.
struct PreviousStep {
    double t = 0.0;
    Field q;
    Field q_t;
    HeightField h;
    Eigen::VectorXd h_t;
    VecField psi;
    VecField psi_t;
    VecField v;
    TensorField A;
};

struct SimState {
    double t = 0.0;
    long step = 0;
    TemperatureField q;
    HeightField h;
    GaugeState gauge;
    BoundaryFrames frames;
    VelocityField v;
    Field q_t;              // Delta_Psi q by substitution, zero on r = 1
    Eigen::VectorXd h_t;    // rate used for the last height update
    std::optional<PreviousStep> prev;
};

enum class CompatibilityMode { report, enforce_first_order };
enum class ValidationMode { strict, report };

struct ModeCoefficient {
    int m = 0;
    int k = 1;
    Parity parity = Parity::cosine;
    double value = 0.0;
};

struct HeightMode {
    int m = 0;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

struct InitialSpec {
    std::vector<ModeCoefficient> q0_modes;
    double epsilon = 1.0;
    std::vector<HeightMode> h0_modes;
    CompatibilityMode compatibility = CompatibilityMode::report;
    ValidationMode validation = ValidationMode::strict;
    double taylor_floor = 0.1;
    double positivity_tol = 1e-8;
    double enforce_tol = 1e-9;
    int enforce_max_iterations = 40;
    double graph_floor = 0.2;
};

struct CompatibilityResiduals {
    Eigen::VectorXd r1;
    Eigen::VectorXd r2;
    double r1_max = 0.0;
    double r2_max = 0.0;
};

struct InitialReport {
    double c1 = 0.0;
    double positivity_margin = 0.0;  // interior min of q0
    double taylor_margin = 0.0;      // min(-d_N q0) - taylor_floor * c1
    double K = 1.0;
    CompatibilityResiduals residuals;
    int enforce_iterations = 0;
    bool positivity_ok = true;
    bool taylor_ok = true;
    bool zero_data = false;
    std::vector<double> coeffs;      // eigen-coefficients of q0 over the basis
};

struct InitialData {
    SimState state;
    InitialReport report;
};

/// Assembles q0 = epsilon * sum c phi and h0, builds the gauge and checks the
/// phase and Taylor-sign conditions. In strict mode violations throw
/// PhaseError / SignConditionError; in report mode they are only recorded.
InitialData build_initial_data(const InitialSpec& spec, const EigenBasis& basis);

/// r1 = Delta q0 - (d_N q0)^2 and the second-order residual on r = 1.
CompatibilityResiduals compatibility_residuals(const Field& q0, const DiskGrid& grid);

/// Adds (1/2) s(theta) (1 - r)^2 chi(r) until max |r1| <= tol.
Field enforce_first_order(const Field& q0, const DiskGrid& grid, double tol, int max_iterations, int* iterations = nullptr);

/// v = -A^T grad q.
VelocityField velocity_from_temperature(const Field& q, const GaugeState& gauge, const DiskGrid& grid);

struct VariableCoefficients {
    TensorField a;  // a_kj = A(k, i) A(j, i)
    VecField b;     // b_k = A(j, i) d_j A(k, i) + A(k, i) w_i
};

VariableCoefficients variable_coefficients(const GaugeState& gauge, const DiskGrid& grid);
/// Coefficients from the tensors of `gauge` with an explicit mesh velocity w.
VariableCoefficients variable_coefficients(const GaugeState& gauge, const VecField& w, const DiskGrid& grid);

/// Cartesian Hessian (xx, xy, yy).
struct Hessian {
    Field xx, xy, yy;
};
Hessian hessian(const Field& f, const DiskGrid& grid);

/// (a - I) : Hess f + b . grad f.
Field coefficient_deviation(const VariableCoefficients& c, const Field& f, const DiskGrid& grid);

struct StepperOptions {
    double dt = 1e-4;
    bool frozen_gauge = false;
    double graph_floor = 0.2;
    double min_j = 0.2;
    double blowup = 1e8;
};

/// Failure of a time step; carries the last state that passed all checks.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, SimState last_good) : Error(what), last_good_(std::move(last_good)) {}
    const SimState& last_good() const noexcept { return last_good_; }

private:
    SimState last_good_;
};

/// Exponential time stepper for system (q, h, Psi). The Dirichlet Laplacian is
/// integrated exactly per angular mode; the coefficient deviation from the
/// Laplacian and the mesh-velocity term are frozen over the step.
class Stepper {
public:
    Stepper(GridPtr grid, StepperOptions options);

    SimState advance(const SimState& state) const;

    /// Completes a freshly built state: gauge frames, velocity and q_t.
    void finalize(SimState& state) const;

    /// q_tt: substitution for a static gauge, differencing otherwise.
    Field q_tt(const SimState& state) const;
    /// v_t, same policy as q_tt.
    VecField v_t(const SimState& state) const;

    const StepperOptions& options() const noexcept { return opt_; }
    const DiskGrid& grid() const noexcept { return *grid_; }

private:
    Field propagate(const Field& q, const Field& forcing) const;
    Field substitute(const SimState& state, const Field& f) const;
    bool static_identity(const SimState& state) const;

    GridPtr grid_;
    StepperOptions opt_;
    std::vector<Eigen::MatrixXd> expm_;  // per wavenumber, interior block
    std::vector<Eigen::MatrixXd> phi_;   // L^{-1} (E - I)
};

/// Single step with a temporary stepper (convenience; rebuilds the exponentials).
SimState advance_step(const SimState& state, double dt, const GridPtr& grid, bool frozen_gauge = false);

/// int q J dx + (1/2) int (1 + h)^2 dtheta.
double enthalpy(const SimState& state, const DiskGrid& grid);

} // namespace stefan
