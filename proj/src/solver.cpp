#include "stefan/solver.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace stefan {

namespace {

Eigen::VectorXd height_from_modes(const std::vector<HeightMode>& modes, const DiskGrid& grid)
{
    Eigen::VectorXd h = Eigen::VectorXd::Zero(grid.n_theta());
    for (const auto& hm : modes) {
        if (hm.m < 0 || hm.m >= grid.max_wavenumber()) throw DomainError("height wavenumber out of grid range");
        for (int l = 0; l < grid.n_theta(); ++l) {
            h(l) += hm.cos_coeff * std::cos(hm.m * grid.theta(l)) + hm.sin_coeff * std::sin(hm.m * grid.theta(l));
        }
    }
    return h;
}

Eigen::VectorXd ring(const Field& f, const DiskGrid& grid) { return f.row(grid.boundary()).transpose(); }

bool all_finite(const Field& f) { return f.allFinite(); }

// Delta_Psi f with the coefficients of `gauge` and mesh velocity w; zero on r = 1.
Field apply_operator(const Field& f, const GaugeState& gauge, const VecField& w, const DiskGrid& grid, bool skip_deviation)
{
    Field out = grid.laplacian(f);
    if (!skip_deviation) out += coefficient_deviation(variable_coefficients(gauge, w, grid), f, grid);
    out.row(grid.boundary()).setZero();
    return out;
}

double taylor_value(const Field& q, const DiskGrid& grid) { return (-grid.boundary_d_r(q)).minCoeff(); }

} // namespace

// ---------------------------------------------------------------------------
// Initial data and compatibility

CompatibilityResiduals compatibility_residuals(const Field& q0, const DiskGrid& grid)
{
    const int b = grid.boundary();
    CompatibilityResiduals res;
    Field lap = grid.laplacian(q0);
    Eigen::VectorXd dn = grid.boundary_d_r(q0);
    res.r1 = ring(lap, grid) - dn.cwiseProduct(dn);

    auto [gx, gy] = grid.gradient(q0);
    Field grad2 = gx.cwiseProduct(gx) + gy.cwiseProduct(gy);
    Field bilap = grid.laplacian(lap);
    Field lap_grad2 = grid.laplacian(grad2);
    Eigen::VectorXd dn_first = grid.boundary_d_r(Field(lap - grad2));
    Field q_rr = grid.from_modes(grid.d_rr_modes(grid.to_modes(q0)));
    Eigen::VectorXd nn = q_rr.row(b).transpose();
    res.r2 = ring(bilap, grid) - ring(lap_grad2, grid) - 2.0 * dn_first.cwiseProduct(dn) + 2.0 * nn.cwiseProduct(nn);
    res.r1_max = res.r1.cwiseAbs().maxCoeff();
    res.r2_max = res.r2.cwiseAbs().maxCoeff();
    return res;
}

Field enforce_first_order(const Field& q0, const DiskGrid& grid, double tol, int max_iterations, int* iterations)
{
    Eigen::VectorXd profile(grid.n_r());
    for (int i = 0; i < grid.n_r(); ++i) {
        double r = grid.r(i);
        profile(i) = 0.5 * (1.0 - r) * (1.0 - r) * smooth_step((r - 0.6) / 0.25);
    }
    // Discrete boundary Laplacian of the profile for even and odd wavenumbers
    // (analytically 1 for both).
    double gain[2];
    for (int parity = 0; parity < 2; ++parity) {
        const int col = parity;  // wavenumbers 0 and 1
        Field modes = Field::Zero(grid.n_r(), grid.n_theta());
        modes.col(col) = profile;
        gain[parity] = grid.laplacian_modes(modes)(grid.boundary(), col);
    }
    Field q = q0;
    int it = 0;
    for (; it < max_iterations; ++it) {
        Eigen::VectorXd dn = grid.boundary_d_r(q);
        Eigen::VectorXd r1 = ring(grid.laplacian(q), grid) - dn.cwiseProduct(dn);
        if (!r1.allFinite()) break;
        if (r1.cwiseAbs().maxCoeff() <= tol) break;
        Eigen::VectorXd c = grid.ring_to_modes(r1);
        for (int k = 0; k < c.size(); ++k) c(k) /= gain[std::abs(grid.wavenumber(k)) % 2];
        q -= profile * grid.ring_from_modes(c).transpose();
    }
    if (iterations) *iterations = it;
    Eigen::VectorXd dn = grid.boundary_d_r(q);
    double r1_max = (ring(grid.laplacian(q), grid) - dn.cwiseProduct(dn)).cwiseAbs().maxCoeff();
    if (r1_max > tol) {
        throw NumericalError("first-order compatibility correction did not converge (residual " +
                             std::to_string(r1_max) + ")");
    }
    return q;
}

InitialData build_initial_data(const InitialSpec& spec, const EigenBasis& basis)
{
    const DiskGrid& grid = basis.grid();
    InitialData out;
    InitialReport& rep = out.report;

    std::vector<double> coeffs(basis.size(), 0.0);
    for (const auto& mc : spec.q0_modes) {
        if (!std::isfinite(mc.value)) throw DomainError("initial coefficient is not finite");
        int j = basis.index_of(mc.m, mc.k, mc.parity);
        if (j < 0) {
            throw DomainError("mode (" + std::to_string(mc.m) + "," + std::to_string(mc.k) + ") not in the basis");
        }
        coeffs[j] += spec.epsilon * mc.value;
    }
    Field q0 = basis.synthesize(coeffs);

    rep.zero_data = q0.cwiseAbs().maxCoeff() == 0.0;
    if (!rep.zero_data && !(coeffs[0] > 0.0)) {
        throw DomainError("leading coefficient c1 must be positive");
    }
    if (!rep.zero_data && spec.compatibility == CompatibilityMode::enforce_first_order) {
        q0 = enforce_first_order(q0, grid, spec.enforce_tol, spec.enforce_max_iterations, &rep.enforce_iterations);
        coeffs = project_coeffs(q0, basis);
    }
    rep.coeffs = coeffs;
    rep.c1 = coeffs[0];
    rep.residuals = compatibility_residuals(q0, grid);

    if (!rep.zero_data) {
        rep.positivity_margin = q0.topRows(grid.n_r() - 1).minCoeff();
        rep.taylor_margin = taylor_value(q0, grid) - spec.taylor_floor * rep.c1;
        rep.K = ratio_K_from_coeffs(coeffs, basis);
        rep.positivity_ok = rep.positivity_margin > 0.0;
        rep.taylor_ok = rep.taylor_margin >= 0.0;
        if (spec.validation == ValidationMode::strict) {
            if (!rep.positivity_ok) {
                throw PhaseError("initial temperature is not positive in the interior (min " +
                                 std::to_string(rep.positivity_margin) + ")");
            }
            if (!rep.taylor_ok) {
                throw SignConditionError("Taylor sign condition violated (margin " +
                                         std::to_string(rep.taylor_margin) + ")");
            }
        }
    }

    SimState& s = out.state;
    s.t = 0.0;
    s.q = {q0, 0.0};
    s.h = {height_from_modes(spec.h0_modes, grid), 0.0};
    s.gauge = build_gauge(s.h, grid, spec.graph_floor);
    s.frames = boundary_frames(s.h, s.gauge, grid);
    s.v = velocity_from_temperature(q0, s.gauge, grid);
    const bool identity = s.h.values.cwiseAbs().maxCoeff() == 0.0;
    s.q_t = apply_operator(q0, s.gauge, s.gauge.psi_t, grid, identity);
    s.h_t = Eigen::VectorXd::Zero(grid.n_theta());
    return out;
}

// ---------------------------------------------------------------------------
// Velocity and coefficients

VelocityField velocity_from_temperature(const Field& q, const GaugeState& gauge, const DiskGrid& grid)
{
    auto [gx, gy] = grid.gradient(q);
    VelocityField v;
    v.v.x = -(gauge.A(0, 0).cwiseProduct(gx) + gauge.A(1, 0).cwiseProduct(gy));
    v.v.y = -(gauge.A(0, 1).cwiseProduct(gx) + gauge.A(1, 1).cwiseProduct(gy));
    v.t = gauge.t;
    return v;
}

VariableCoefficients variable_coefficients(const GaugeState& gauge, const VecField& w, const DiskGrid& grid)
{
    VariableCoefficients c;
    const TensorField& A = gauge.A;
    for (int k = 0; k < 2; ++k) {
        for (int j = 0; j < 2; ++j) {
            c.a(k, j) = A(k, 0).cwiseProduct(A(j, 0)) + A(k, 1).cwiseProduct(A(j, 1));
        }
    }
    TensorGradient dA = tensor_gradient(A, grid);
    const Field* wv[2] = {&w.x, &w.y};
    Field* bv[2] = {&c.b.x, &c.b.y};
    for (int k = 0; k < 2; ++k) {
        Field acc = grid.zeros();
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) acc += A(j, i).cwiseProduct(dA.c[k][i][j]);
            acc += A(k, i).cwiseProduct(*wv[i]);
        }
        *bv[k] = std::move(acc);
    }
    return c;
}

VariableCoefficients variable_coefficients(const GaugeState& gauge, const DiskGrid& grid)
{
    if (gauge.has_psi_t) return variable_coefficients(gauge, gauge.psi_t, grid);
    return variable_coefficients(gauge, VecField{grid.zeros(), grid.zeros()}, grid);
}

Hessian hessian(const Field& f, const DiskGrid& grid)
{
    auto [gx, gy] = grid.gradient(f);
    auto [gxx, gxy] = grid.gradient(gx);
    Field gyy = grid.d_x(gy, 1);
    return {gxx, gxy, gyy};
}

Field coefficient_deviation(const VariableCoefficients& c, const Field& f, const DiskGrid& grid)
{
    auto [gx, gy] = grid.gradient(f);
    auto [gxx, gxy] = grid.gradient(gx);
    Field gyx = grid.d_x(gy, 0);
    Field gyy = grid.d_x(gy, 1);
    Field out = (c.a(0, 0).array() - 1.0).matrix().cwiseProduct(gxx) + (c.a(1, 1).array() - 1.0).matrix().cwiseProduct(gyy) +
                c.a(0, 1).cwiseProduct(gxy) + c.a(1, 0).cwiseProduct(gyx);
    out += c.b.x.cwiseProduct(gx) + c.b.y.cwiseProduct(gy);
    return out;
}

// ---------------------------------------------------------------------------
// Stepper

Stepper::Stepper(GridPtr grid, StepperOptions options) : grid_(std::move(grid)), opt_(options)
{
    if (!(opt_.dt > 0.0)) throw DomainError("dt must be positive");
    const int n = grid_->n_r() - 1;
    const int big_m = grid_->max_wavenumber();
    expm_.resize(big_m + 1);
    phi_.resize(big_m + 1);
    for (int m = 0; m <= big_m; ++m) {
        Eigen::MatrixXd L = grid_->radial_laplacian(m).topLeftCorner(n, n);
        Eigen::MatrixXd E = (opt_.dt * L).exp();
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        phi_[m] = L.partialPivLu().solve(E - I);
        expm_[m] = std::move(E);
    }
}

Field Stepper::propagate(const Field& q, const Field& forcing) const
{
    const DiskGrid& g = *grid_;
    const int n = g.n_r() - 1;
    Field Q = g.to_modes(q);
    Field Fm = g.to_modes(forcing);
    Field out = Field::Zero(g.n_r(), g.n_theta());
    for (int col = 0; col < g.n_theta(); ++col) {
        int m = g.wavenumber(col);
        out.col(col).head(n) = expm_[m] * Q.col(col).head(n) + phi_[m] * Fm.col(col).head(n);
    }
    Field result = g.from_modes(out);
    result.row(g.boundary()).setZero();
    return result;
}

bool Stepper::static_identity(const SimState& state) const
{
    return opt_.frozen_gauge && state.h.values.cwiseAbs().maxCoeff() == 0.0;
}

Field Stepper::substitute(const SimState& state, const Field& f) const
{
    VecField zero{grid_->zeros(), grid_->zeros()};
    const VecField& w = (opt_.frozen_gauge || !state.gauge.has_psi_t) ? zero : state.gauge.psi_t;
    return apply_operator(f, state.gauge, w, *grid_, static_identity(state));
}

void Stepper::finalize(SimState& state) const
{
    state.frames = boundary_frames(state.h, state.gauge, *grid_);
    state.v = velocity_from_temperature(state.q.values, state.gauge, *grid_);
    state.v.t = state.t;
    state.q_t = substitute(state, state.q.values);
    if (state.h_t.size() != grid_->n_theta()) state.h_t = Eigen::VectorXd::Zero(grid_->n_theta());
}

SimState Stepper::advance(const SimState& state) const
{
    const DiskGrid& g = *grid_;
    const double dt = opt_.dt;
    SimState next;
    next.t = state.t + dt;
    next.step = state.step + 1;

    PreviousStep prev;
    prev.t = state.t;
    prev.q = state.q.values;
    prev.q_t = state.q_t;
    prev.h = state.h;
    prev.h_t = state.h_t;
    prev.psi = state.gauge.psi;
    prev.psi_t = state.gauge.psi_t;
    prev.v = state.v.v;
    prev.A = state.gauge.A;

    Field forcing;
    try {
        if (opt_.frozen_gauge) {
            next.h = {state.h.values, next.t};
            next.h_t = Eigen::VectorXd::Zero(g.n_theta());
            next.gauge = state.gauge;
            next.gauge.t = next.t;
            forcing = static_identity(state) ? g.zeros() : coefficient_deviation(variable_coefficients(state.gauge, VecField{g.zeros(), g.zeros()}, g), state.q.values, g);
        } else {
            const int b = g.boundary();
            Eigen::VectorXd vx = state.v.v.x.row(b).transpose();
            Eigen::VectorXd vy = state.v.v.y.row(b).transpose();
            const BoundaryFrames& fr = state.frames;
            Eigen::VectorXd vn = vx.cwiseProduct(fr.N_x) + vy.cwiseProduct(fr.N_y);
            Eigen::VectorXd vt = vx.cwiseProduct(fr.tau_x) + vy.cwiseProduct(fr.tau_y);
            Eigen::VectorXd h_th = g.ring_d_theta(state.h.values);
            Eigen::VectorXd R = 1.0 + state.h.values.array();
            next.h_t = vn - h_th.cwiseProduct(vt).cwiseQuotient(R);
            next.h = {state.h.values + dt * next.h_t, next.t};
            next.gauge = build_gauge(next.h, g, opt_.graph_floor);
            next.gauge.t = next.t;
            next.gauge.psi_t.x = (next.gauge.psi.x - state.gauge.psi.x) / dt;
            next.gauge.psi_t.y = (next.gauge.psi.y - state.gauge.psi.y) / dt;
            next.gauge.has_psi_t = true;
            forcing = coefficient_deviation(variable_coefficients(state.gauge, next.gauge.psi_t, g), state.q.values, g);
        }
    } catch (const Error& e) {
        throw StepFailure(std::string("step ") + std::to_string(next.step) + ": " + e.what(), state);
    }

    next.q = {propagate(state.q.values, forcing), next.t};
    next.prev = std::move(prev);
    finalize(next);

    if (next.gauge.J.minCoeff() < opt_.min_j) {
        throw StepFailure("step " + std::to_string(next.step) + ": min J = " + std::to_string(next.gauge.J.minCoeff()) +
                              " below gauge threshold",
                          state);
    }
    if (!all_finite(next.q.values) || !next.h.values.allFinite() || !all_finite(next.q_t)) {
        throw StepFailure("step " + std::to_string(next.step) + ": non-finite values", state);
    }
    if (next.q.values.cwiseAbs().maxCoeff() > opt_.blowup) {
        throw StepFailure("step " + std::to_string(next.step) + ": temperature blow-up", state);
    }
    return next;
}

Field Stepper::q_tt(const SimState& state) const
{
    if (opt_.frozen_gauge || !state.prev) return substitute(state, state.q_t);
    return (state.q_t - state.prev->q_t) / (state.t - state.prev->t);
}

VecField Stepper::v_t(const SimState& state) const
{
    if (opt_.frozen_gauge || !state.prev) {
        VelocityField vt = velocity_from_temperature(state.q_t, state.gauge, *grid_);
        return vt.v;
    }
    const double dt = state.t - state.prev->t;
    return {(state.v.v.x - state.prev->v.x) / dt, (state.v.v.y - state.prev->v.y) / dt};
}

SimState advance_step(const SimState& state, double dt, const GridPtr& grid, bool frozen_gauge)
{
    StepperOptions opt;
    opt.dt = dt;
    opt.frozen_gauge = frozen_gauge;
    return Stepper(grid, opt).advance(state);
}

double enthalpy(const SimState& state, const DiskGrid& grid)
{
    Eigen::VectorXd R = 1.0 + state.h.values.array();
    return grid.integrate(state.q.values.cwiseProduct(state.gauge.J)) + 0.5 * grid.integrate_ring(R.cwiseProduct(R));
}

} // namespace stefan
