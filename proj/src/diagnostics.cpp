#include "stefan/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "stefan/bessel.hpp"
#include "stefan/error.hpp"

namespace stefan {

namespace {

double sq_norm(const DiskGrid& g, const Field& f) { return g.integrate(f.cwiseProduct(f)); }

// w: radial weights from DiskGrid::weighted_radial_weights.
double weighted_sq(const DiskGrid& g, const Eigen::VectorXd& w, const Field& f) { return g.integrate_radial(w, f.cwiseProduct(f)); }

double weighted_sq(const DiskGrid& g, const Eigen::VectorXd& w, const VecField& f)
{
    return weighted_sq(g, w, f.x) + weighted_sq(g, w, f.y);
}

Field dot(const VecField& a, const VecField& b) { return a.x.cwiseProduct(b.x) + a.y.cwiseProduct(b.y); }

VecField theta_derivative(const DiskGrid& g, const VecField& f) { return {g.d_theta(f.x), g.d_theta(f.y)}; }

// Repeated theta derivatives d_theta^a f for a = 0..n.
std::vector<Field> theta_ladder(const DiskGrid& g, const Field& f, int n)
{
    std::vector<Field> out{f};
    for (int a = 1; a <= n; ++a) out.push_back(g.d_theta(out.back()));
    return out;
}

std::vector<VecField> theta_ladder(const DiskGrid& g, const VecField& f, int n)
{
    std::vector<VecField> out{f};
    for (int a = 1; a <= n; ++a) out.push_back(theta_derivative(g, out.back()));
    return out;
}

// Cartesian derivatives d_1^i d_2^j f for i + j <= n, keyed by (i, j).
std::map<std::pair<int, int>, Field> cartesian_ladder(const DiskGrid& g, const Field& f, int n)
{
    std::map<std::pair<int, int>, Field> out;
    out[{0, 0}] = f;
    for (int k = 1; k <= n; ++k) {
        for (int i = 0; i <= k; ++i) {
            int j = k - i;
            out[{i, j}] = (i > 0) ? g.d_x(out[{i - 1, j}], 0) : g.d_x(out[{0, j - 1}], 1);
        }
    }
    return out;
}

struct VecLadder {
    std::map<std::pair<int, int>, Field> x, y;
};

VecLadder cartesian_ladder(const DiskGrid& g, const VecField& f, int n)
{
    return {cartesian_ladder(g, f.x, n), cartesian_ladder(g, f.y, n)};
}

Eigen::VectorXd cutoff_weights(const DiskGrid& g, bool complement)
{
    return g.weighted_radial_weights([complement](double r) { return complement ? 1.0 - cutoff_mu(r) : cutoff_mu(r); },
                                     {0.5, 0.75});
}

} // namespace

// ---------------------------------------------------------------------------

double chi_inf(const SimState& state, const DiskGrid& grid, int width, bool* alarm)
{
    double chi = (-grid.boundary_d_r_one_sided(state.q.values, width)).minCoeff();
    if (alarm) *alarm = !(chi > 0.0);
    return chi;
}

double chi_inf_spectral(const SimState& state, const DiskGrid& grid)
{
    return (-grid.boundary_d_r(state.q.values)).minCoeff();
}

double cartesian_sobolev_norm(const Field& f, int s, const DiskGrid& grid)
{
    if (s < 0) throw DomainError("Sobolev order must be nonnegative");
    double acc = 0.0;
    for (const auto& [idx, d] : cartesian_ladder(grid, f, s)) acc += sq_norm(grid, d);
    return std::sqrt(acc);
}

double cartesian_sobolev_norm(const VecField& f, int s, const DiskGrid& grid)
{
    double a = cartesian_sobolev_norm(f.x, s, grid);
    double b = cartesian_sobolev_norm(f.y, s, grid);
    return std::sqrt(a * a + b * b);
}

DecayNorms decay_norms(double t, const Field& q, const Field& q_t, const Field* q_tt, const VecField& v,
                       const VecField& v_t, const EigenBasis& basis, double beta)
{
    DecayNorms d;
    const DiskGrid& g = basis.grid();
    auto cq = project_coeffs(q, basis);
    auto cqt = project_coeffs(q_t, basis);
    d.q_norms[0] = sobolev_norm_from_coeffs(cq, 4.0, basis);
    d.q_norms[1] = sobolev_norm_from_coeffs(cqt, 2.0, basis);
    double sum_q = d.q_norms[0] * d.q_norms[0] + d.q_norms[1] * d.q_norms[1];
    double D = std::pow(sobolev_norm_from_coeffs(cq, 5.0, basis), 2) + std::pow(sobolev_norm_from_coeffs(cqt, 3.0, basis), 2);
    if (q_tt) {
        auto cqtt = project_coeffs(*q_tt, basis);
        d.q_norms[2] = sobolev_norm_from_coeffs(cqtt, 0.0, basis);
        sum_q += d.q_norms[2] * d.q_norms[2];
        D += std::pow(sobolev_norm_from_coeffs(cqtt, 1.0, basis), 2);
    } else {
        d.second_derivative_omitted = true;
    }
    d.v_norms[0] = cartesian_sobolev_norm(v, 3, g);
    d.v_norms[1] = cartesian_sobolev_norm(v_t, 1, g);
    d.E_beta = std::exp(beta * t) * (sum_q + d.v_norms[0] * d.v_norms[0] + d.v_norms[1] * d.v_norms[1]);
    d.D_low = D;
    return d;
}

double cutoff_mu(double r) { return smooth_step((r - 0.5) / 0.25); }

TruncatedEnergy truncated_energy(const EnergyFields& f, const DiskGrid& g, int n, int bt)
{
    if (n < 1 || n > 6) throw DomainError("energy order must lie in [1, 6]");
    if (bt < 0 || bt > 1) throw DomainError("energy time order must be 0 or 1");
    TruncatedEnergy out;
    const Eigen::VectorXd mu = cutoff_weights(g, false);
    const Eigen::VectorXd one_minus_mu = cutoff_weights(g, true);

    // Tangential ladders.
    auto v_th = theta_ladder(g, f.v, n);
    auto vt_th = theta_ladder(g, f.v_t, n);
    auto q_th = theta_ladder(g, f.q, n);
    auto qt_th = theta_ladder(g, f.q_t, n);
    auto qtt_th = theta_ladder(g, f.q_tt, n);
    auto psi_th = theta_ladder(g, f.psi, n);
    auto psit_th = theta_ladder(g, f.psi_t, n);
    auto psitt_th = theta_ladder(g, f.psi_tt, n);

    // Cartesian ladders.
    auto v_c = cartesian_ladder(g, f.v, n);
    auto vt_c = cartesian_ladder(g, f.v_t, n);
    auto q_c = cartesian_ladder(g, f.q, n);
    auto qt_c = cartesian_ladder(g, f.q_t, n);
    auto qtt_c = cartesian_ladder(g, f.q_tt, n);
    auto psi_c = cartesian_ladder(g, f.psi, n);
    auto psit_c = cartesian_ladder(g, f.psi_t, n);
    auto psitt_c = cartesian_ladder(g, f.psi_tt, n);

    auto pick = [](const VecLadder& l, std::pair<int, int> idx) { return VecField{l.x.at(idx), l.y.at(idx)}; };

    double E = 0.0, D = 0.0;
    for (int b = 0; b <= bt; ++b) {
        const auto& vb = (b == 0) ? v_th : vt_th;
        const auto& vbc = (b == 0) ? v_c : vt_c;
        // mu-weighted velocity.
        for (int a = 0; a + 2 * b <= n - 1; ++a) E += 0.5 * weighted_sq(g, mu, vb[a]);
        for (int a = 0; a + 2 * b <= n; ++a) D += weighted_sq(g, mu, vb[a]);
        // (1 - mu)-weighted velocity.
        for (const auto& [idx, d] : vbc.x) {
            int order = idx.first + idx.second;
            VecField vv = pick(vbc, idx);
            if (order + 2 * b <= n - 1) E += weighted_sq(g, one_minus_mu, vv);
            if (order + 2 * b <= n) D += weighted_sq(g, one_minus_mu, vv);
        }
        // Good unknowns, tangential.
        for (int a = 0; a + 2 * b <= n; ++a) {
            Field G = (b == 0) ? q_th[a] : qt_th[a];
            if (a + b >= 1) G += dot((b == 0) ? psi_th[a] : psit_th[a], f.v);
            E += 0.5 * weighted_sq(g, mu, G);
        }
        for (int a = 0; a + 2 * b <= n - 1; ++a) {
            Field G = ((b == 0) ? qt_th[a] : qtt_th[a]) + dot((b == 0) ? psit_th[a] : psitt_th[a], f.v);
            D += weighted_sq(g, mu, G);
        }
        // Good unknowns, Cartesian.
        for (const auto& [idx, d] : q_c) {
            int order = idx.first + idx.second;
            if (order + 2 * b <= n) {
                Field G = (b == 0) ? q_c.at(idx) : qt_c.at(idx);
                if (order + b >= 1) G += dot(pick((b == 0) ? psi_c : psit_c, idx), f.v);
                E += 0.5 * weighted_sq(g, one_minus_mu, G);
            }
            if (order + 2 * b <= n - 1) {
                Field G = ((b == 0) ? qt_c.at(idx) : qtt_c.at(idx)) + dot(pick((b == 0) ? psit_c : psitt_c, idx), f.v);
                D += weighted_sq(g, one_minus_mu, G);
            }
        }
    }

    // (-d_N q)-weighted height terms.
    Eigen::VectorXd weight = -f.dNq;
    if (!(weight.minCoeff() > 0.0)) {
        out.weight_failure = true;
    } else {
        Eigen::VectorXd RJ = (1.0 + f.h.array()).matrix().cwiseQuotient(f.J_boundary);
        Eigen::VectorXd wgt = weight.cwiseProduct(RJ.cwiseProduct(RJ));
        for (int b = 0; b <= bt; ++b) {
            const Eigen::VectorXd& hb = (b == 0) ? f.h : f.h_t;
            Eigen::VectorXd d = hb;
            std::vector<Eigen::VectorXd> ladder{d};
            for (int a = 1; a <= n; ++a) ladder.push_back(g.ring_d_theta(ladder.back()));
            int ke = n - 2 * b, kd = n - 1 - 2 * b;
            if (ke >= 0) out.E_boundary += 0.5 * g.integrate_ring(wgt.cwiseProduct(ladder[ke].cwiseProduct(ladder[ke])));
            if (kd >= 0) out.D_boundary += g.integrate_ring(wgt.cwiseProduct(ladder[kd].cwiseProduct(ladder[kd])));
        }
    }
    out.E = E + out.E_boundary;
    out.D = D + out.D_boundary;
    return out;
}

EnergyFields energy_fields(const SimState& s, const Stepper& stepper)
{
    const DiskGrid& g = stepper.grid();
    EnergyFields f;
    f.q = s.q.values;
    f.q_t = s.q_t;
    f.q_tt = stepper.q_tt(s);
    f.v = s.v.v;
    f.v_t = stepper.v_t(s);
    f.h = s.h.values;
    f.h_t = s.h_t;
    f.psi = s.gauge.psi;
    f.psi_t = s.gauge.psi_t;
    if (s.prev && !stepper.options().frozen_gauge) {
        double dt = s.t - s.prev->t;
        f.psi_tt = {(s.gauge.psi_t.x - s.prev->psi_t.x) / dt, (s.gauge.psi_t.y - s.prev->psi_t.y) / dt};
    } else {
        f.psi_tt = {g.zeros(), g.zeros()};
    }
    f.J_boundary = s.gauge.J.row(g.boundary()).transpose();
    f.dNq = g.boundary_d_r_one_sided(s.q.values, 5);
    return f;
}

// ---------------------------------------------------------------------------

double fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& value, double t_a, double t_b)
{
    if (t.size() != value.size()) throw DomainError("time and value series differ in length");
    double st = 0, sy = 0, stt = 0, sty = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_a || t[i] > t_b) continue;
        if (!(value[i] > 0.0)) throw DomainError("decay fit needs positive values");
        double y = std::log(value[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
        ++n;
    }
    if (n < 8) throw DomainError("decay fit needs at least 8 samples in the window, got " + std::to_string(n));
    double slope = (n * sty - st * sy) / (n * stt - st * st);
    return -slope;
}

OddsonRate oddson_rate(const std::vector<VariableCoefficients>& window, const DiskGrid& grid)
{
    if (window.empty()) throw DomainError("Oddson rate needs at least one coefficient snapshot");
    double alpha = std::numeric_limits<double>::infinity();
    double k0 = std::numeric_limits<double>::infinity();
    double beta = -std::numeric_limits<double>::infinity();
    for (const auto& c : window) {
        for (int i = 0; i < grid.n_r(); ++i) {
            for (int l = 0; l < grid.n_theta(); ++l) {
                double a00 = c.a(0, 0)(i, l), a11 = c.a(1, 1)(i, l);
                double a01 = 0.5 * (c.a(0, 1)(i, l) + c.a(1, 0)(i, l));
                double tr = a00 + a11;
                double disc = std::sqrt(0.25 * (a00 - a11) * (a00 - a11) + a01 * a01);
                double lmin = 0.5 * tr - disc;
                if (!(lmin > 0.0)) throw EllipticityError("coefficient matrix is not positive definite");
                alpha = std::min(alpha, lmin / tr);
                k0 = std::min(k0, 1.0 / tr);
                beta = std::max(beta, c.b.x(i, l) * grid.x1()(i, l) + c.b.y(i, l) * grid.x2()(i, l));
            }
        }
    }
    OddsonRate r;
    r.alpha = alpha;
    r.k0 = k0;
    r.beta_drift = beta;
    r.mu = (beta + 1.0) / (2.0 * alpha) - 1.0;
    r.xi0 = bessel_zero(r.mu, 1);
    r.lambda = alpha * r.xi0 * r.xi0 / k0;
    return r;
}

double fit_oddson_constant(const std::vector<double>& t, const std::vector<Field>& q, double lambda, const DiskGrid& grid)
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < t.size(); ++s) {
        for (int i = 0; i < grid.n_r() - 1; ++i) {
            double rho = 1.0 - grid.r(i);
            for (int l = 0; l < grid.n_theta(); ++l) m = std::min(m, q[s](i, l) / (rho * std::exp(-lambda * t[s])));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

DuhamelTracker::DuhamelTracker(const EigenBasis& basis, std::vector<double> c0)
    : basis_(basis), c0_(std::move(c0)), y_(basis.size(), 0.0), z_(basis.size(), 0.0), last_n_(basis.size(), 0.0)
{
    c0_.resize(basis.size(), 0.0);
}

void DuhamelTracker::set_initial_velocity_term(const Field& source) { y_ = project_coeffs(source, basis_); }

void DuhamelTracker::push(double t, const Field& nonlinearity)
{
    std::vector<double> n = project_coeffs(nonlinearity, basis_);
    if (!started_) {
        // N is first available after one step; hold it constant back to t = 0.
        last_n_ = n;
        t_last_ = 0.0;
        started_ = true;
    }
    double dt = t - t_last_;
    if (dt < 0.0) throw CoverageError("Duhamel history must be fed in increasing time");
    for (int j = 0; j < basis_.size(); ++j) {
        double e = std::exp(-basis_.lambda(j) * dt);
        z_[j] = e * z_[j] + 0.5 * dt * (e * last_n_[j] + n[j]);
    }
    last_n_ = n;
    t_last_ = t;
}

bool DuhamelTracker::covers(double t) const
{
    return started_ ? std::abs(t - t_last_) <= 1e-12 * std::max(1.0, t) : t == 0.0;
}

Field DuhamelTracker::X(double t) const
{
    std::vector<double> c(basis_.size());
    for (int j = 0; j < basis_.size(); ++j) c[j] = c0_[j] * basis_.lambda(j) * std::exp(-basis_.lambda(j) * t);
    return basis_.synthesize(c);
}

DuhamelSplit DuhamelTracker::split(double t, const Field& q_t) const
{
    if (!covers(t)) throw CoverageError("Duhamel history does not reach t = " + std::to_string(t));
    DuhamelSplit s;
    s.t = t;
    s.X = X(t);
    std::vector<double> y(basis_.size());
    for (int j = 0; j < basis_.size(); ++j) y[j] = y_[j] * std::exp(-basis_.lambda(j) * t);
    s.Y = basis_.synthesize(y);
    s.Z = started_ ? basis_.synthesize(z_) : basis_.grid().zeros();
    const DiskGrid& g = basis_.grid();
    s.residual = g.norm_l2(Field(-q_t - (s.X - s.Y - s.Z)));
    s.residual_X = g.norm_l2(Field(-q_t - s.X));
    return s;
}

Field duhamel_nonlinearity(const VariableCoefficients& now, const VariableCoefficients& before, double dt,
                           const Field& q, const Field& q_t, const DiskGrid& grid)
{
    VariableCoefficients rate;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) rate.a(i, j) = (now.a(i, j) - before.a(i, j)) / dt;
    }
    rate.b.x = (now.b.x - before.b.x) / dt;
    rate.b.y = (now.b.y - before.b.y) / dt;
    // The rate tensor enters without the identity shift.
    rate.a(0, 0).array() += 1.0;
    rate.a(1, 1).array() += 1.0;
    return coefficient_deviation(now, q_t, grid) + coefficient_deviation(rate, q, grid);
}

bool x_positivity_holds(const DuhamelTracker& tracker, const EigenBasis& basis, double c1, double t, double tol)
{
    Field X = tracker.X(t);
    const double lam1 = basis.lambda(0);
    Field rhs = 0.5 * c1 * lam1 * std::exp(-lam1 * t) * basis.field(0);
    const double scale = rhs.cwiseAbs().maxCoeff();
    return (X - rhs).minCoeff() >= -tol * scale;
}

// ---------------------------------------------------------------------------

double series_min_dNqt(const std::vector<double>& c, const EigenBasis& basis, double t)
{
    const DiskGrid& g = basis.grid();
    double best = std::numeric_limits<double>::infinity();
    for (int l = 0; l < g.n_theta(); ++l) {
        double v = 0.0;
        for (std::size_t j = 0; j < c.size() && static_cast<int>(j) < basis.size(); ++j) {
            if (c[j] == 0.0) continue;
            const EigenMode& m = basis.mode(static_cast<int>(j));
            v -= c[j] * m.lambda * std::exp(-m.lambda * t) * m.boundary_dr(g.theta(l));
        }
        best = std::min(best, v);
    }
    return best;
}

std::optional<double> series_flip_time(const std::vector<double>& c, const EigenBasis& basis, double t_max)
{
    const int n = 4000;
    double prev = series_min_dNqt(c, basis, 0.0);
    if (prev > 0.0) return std::nullopt;
    std::optional<double> found;
    double t_prev = 0.0;
    for (int i = 1; i <= n; ++i) {
        double t = t_max * i / n;
        double v = series_min_dNqt(c, basis, t);
        if (prev <= 0.0 && v > 0.0) {
            double lo = t_prev, hi = t;
            for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                double mid = 0.5 * (lo + hi);
                (series_min_dNqt(c, basis, mid) > 0.0 ? hi : lo) = mid;
            }
            found = 0.5 * (lo + hi);
        }
        prev = v;
        t_prev = t;
    }
    if (prev <= 0.0) return std::nullopt;
    return found;
}

TaylorReport taylor_sign_monitor(const std::vector<TaylorSample>& samples, double K, double c_bar, double eta)
{
    TaylorReport rep;
    rep.T_K = c_bar * std::log(K);
    if (samples.empty()) return rep;
    rep.starts_negative = samples.front().min_dNqt < 0.0;
    int last_nonpos = -1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].min_dNqt > 0.0)) last_nonpos = static_cast<int>(i);
    }
    if (last_nonpos < 0) {
        rep.t_star = samples.front().t;
    } else if (last_nonpos + 1 < static_cast<int>(samples.size())) {
        const auto& a = samples[last_nonpos];
        const auto& b = samples[last_nonpos + 1];
        rep.t_star = a.t + (b.t - a.t) * (-a.min_dNqt) / (b.min_dNqt - a.min_dNqt);
    }
    rep.persists = rep.t_star.has_value();
    rep.before_T_K = rep.t_star && *rep.t_star <= rep.T_K;

    const std::size_t half = std::max<std::size_t>(1, samples.size() / 2);
    for (std::size_t i = 0; i < half; ++i) {
        rep.hopf_C = std::max(rep.hopf_C, samples[i].hopf_ratio / (K * K * std::exp(eta * samples[i].t)));
    }
    rep.hopf_bound_holds = true;
    for (const auto& s : samples) {
        if (s.hopf_ratio > rep.hopf_C * K * K * std::exp(eta * s.t) * (1.0 + 1e-12)) rep.hopf_bound_holds = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------

VariableCoefficients identity_coefficients(const DiskGrid& grid)
{
    VariableCoefficients c;
    Field one = Field::Ones(grid.n_r(), grid.n_theta());
    c.a(0, 0) = one;
    c.a(1, 1) = one;
    c.a(0, 1) = grid.zeros();
    c.a(1, 0) = grid.zeros();
    c.b = {grid.zeros(), grid.zeros()};
    return c;
}

BarrierResult barrier_residual(const BarrierParams& params, const VariableCoefficients& c, const EigenBasis& basis,
                               double t, double C1)
{
    const DiskGrid& g = basis.grid();
    const EigenMode& m1 = basis.mode(0);
    if (m1.m != 0 || m1.k != 1) throw PreconditionError("basis must start with the (0, 1) mode");
    const Field& phi1 = basis.field(0);
    const double lam1 = m1.lambda;
    const double rate = params.rate > 0.0 ? params.rate : 1.5 * lam1;
    const double amp = params.kappa1 * std::exp(-rate * t);
    Field bump = (1.0 - g.radius_field().array().square()).matrix();

    Field P = amp * (phi1 - params.kappa2 * bump);
    Hessian H = hessian(P, g);
    auto [Px, Py] = g.gradient(P);
    BarrierResult out;
    out.residual = -rate * P - (c.a(0, 0).cwiseProduct(H.xx) + (c.a(0, 1) + c.a(1, 0)).cwiseProduct(H.xy) +
                                c.a(1, 1).cwiseProduct(H.yy)) -
                   c.b.x.cwiseProduct(Px) - c.b.y.cwiseProduct(Py);
    out.max_value = out.residual.maxCoeff();

    Hessian Hp = hessian(phi1, g);
    auto [px, py] = g.gradient(phi1);
    Field tr = c.a(0, 0) + c.a(1, 1);
    Field dev = (c.a(0, 0).array() - 1.0).matrix().cwiseProduct(Hp.xx) + (c.a(0, 1) + c.a(1, 0)).cwiseProduct(Hp.xy) +
                (c.a(1, 1).array() - 1.0).matrix().cwiseProduct(Hp.yy);
    Field drift = c.b.x.cwiseProduct(px + 2.0 * params.kappa2 * g.x1()) + c.b.y.cwiseProduct(py + 2.0 * params.kappa2 * g.x2());
    out.closed_form = amp * ((lam1 - rate) * phi1 - 2.0 * params.kappa2 * tr + rate * params.kappa2 * bump - dev - drift);
    out.closed_form_error = (out.residual - out.closed_form).cwiseAbs().maxCoeff();
    out.below_margin = out.max_value <= -C1 * amp;
    return out;
}

KappaSelection select_kappa2(const EigenBasis& basis)
{
    KappaSelection sel;
    VariableCoefficients id = identity_coefficients(basis.grid());
    for (int p = 1; p <= 8; ++p) {
        BarrierParams params;
        params.kappa1 = 1.0;
        params.kappa2 = std::ldexp(1.0, -p);
        BarrierResult r = barrier_residual(params, id, basis, 0.0);
        if (r.max_value < 0.0) {
            sel.kappa2 = params.kappa2;
            sel.margin = -r.max_value;
            sel.C1 = 0.5 * sel.margin;
            sel.found = true;
            return sel;
        }
    }
    return sel;
}

double fit_forcing_constant(const std::vector<double>& t, const std::vector<double>& value, double c1, double eps,
                            double rate)
{
    double C = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) C = std::max(C, value[i] / (c1 * eps * std::exp(-rate * t[i])));
    return C;
}

double log10_F(double K, double C, double c_bar, double lambda1)
{
    if (!(K > 1.0)) throw DomainError("F(K) needs K > 1");
    double lk = std::log10(K);
    double first = std::log10(8.0) + 2.0 * C * c_bar * K * K * lk;
    double second = 10.0 * std::log10(c_bar) + 10.0 * std::log10(std::log(K)) + 20.0 * c_bar * lambda1 * lk;
    return std::max(first, second);
}

double coercivity_ratio(const Field& f, const EigenBasis& basis)
{
    auto c = project_coeffs(f, basis);
    double n0 = sobolev_norm_from_coeffs(c, 0.0, basis);
    double n3 = sobolev_norm_from_coeffs(c, 3.0, basis);
    if (!(c[0] > 0.0)) throw DomainError("coercivity ratio needs a positive first coefficient");
    return n0 * n0 / (c[0] * n3);
}

double twisted_poincare_ratio(const Field& f, const GaugeState& gauge, const DiskGrid& grid)
{
    VelocityField v = velocity_from_temperature(f, gauge, grid);
    return (sq_norm(grid, v.v.x) + sq_norm(grid, v.v.y)) / sq_norm(grid, f);
}

double tensor_deviation_2norm(const TensorField& T)
{
    double best = 0.0;
    const Field& a = T(0, 0);
    for (int i = 0; i < a.rows(); ++i) {
        for (int l = 0; l < a.cols(); ++l) {
            Eigen::Matrix2d m;
            m << T(0, 0)(i, l) - 1.0, T(0, 1)(i, l), T(1, 0)(i, l), T(1, 1)(i, l) - 1.0;
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
            best = std::max(best, svd.singularValues()(0));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

DiagnosticsRecord record_diagnostics(const SimState& s, const Stepper& stepper, const EigenBasis& basis,
                                     const DiagnosticsOptions& opt)
{
    const DiskGrid& g = stepper.grid();
    DiagnosticsRecord r;
    r.t = s.t;
    r.chi = chi_inf(s, g, opt.stencil_width, &r.taylor_alarm);
    r.chi_spectral = chi_inf_spectral(s, g);

    const bool have_qtt = stepper.options().frozen_gauge || s.prev.has_value();
    Field qtt = stepper.q_tt(s);
    VecField vt = stepper.v_t(s);
    DecayNorms dn = decay_norms(s.t, s.q.values, s.q_t, have_qtt ? &qtt : nullptr, s.v.v, vt, basis, opt.beta);
    r.E_beta = dn.E_beta;
    r.D_low = dn.D_low;
    r.b2_omitted = dn.second_derivative_omitted;
    for (int b = 0; b < 3; ++b) r.qt_norms[b] = dn.q_norms[b];

    if (opt.compute_energy) {
        TruncatedEnergy te = truncated_energy(energy_fields(s, stepper), g, opt.energy_order, opt.energy_time_order);
        r.E_trunc = te.E;
        r.D_trunc = te.D;
        r.weight_failure = te.weight_failure;
    }
    r.q_L2 = g.norm_l2(s.q.values);
    r.q_H4 = dn.q_norms[0];
    r.h_mean = s.h.values.mean();
    r.h_max = s.h.values.cwiseAbs().maxCoeff();

    Eigen::VectorXd dnqt = g.boundary_d_r_one_sided(s.q_t, opt.stencil_width);
    Eigen::VectorXd dnq = g.boundary_d_r_one_sided(s.q.values, opt.stencil_width);
    r.min_dNqt = dnqt.minCoeff();
    double ratio = 0.0;
    for (int l = 0; l < dnq.size(); ++l) {
        if (dnq(l) != 0.0) ratio = std::max(ratio, std::abs(dnqt(l) / dnq(l)));
    }
    r.hopf_ratio = ratio;
    r.enthalpy = enthalpy(s, g);
    return r;
}

} // namespace stefan
