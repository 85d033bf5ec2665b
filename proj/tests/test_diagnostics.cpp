#include <gtest/gtest.h>

#include <cmath>

#include "stefan/bessel.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/error.hpp"

using namespace stefan;

namespace {

struct Fixture {
    GridPtr grid;
    EigenBasis basis;
    Fixture(int nt = 32, int nr = 24, int modes = 8) : grid(make_grid(nt, nr)), basis(dirichlet_eigenbasis(modes, grid)) {}
};

Field constant(const DiskGrid& g, double v) { return Field::Constant(g.n_r(), g.n_theta(), v); }

TensorField tensor(const DiskGrid& g, double a00, double a01, double a10, double a11)
{
    TensorField T;
    T(0, 0) = constant(g, a00);
    T(0, 1) = constant(g, a01);
    T(1, 0) = constant(g, a10);
    T(1, 1) = constant(g, a11);
    return T;
}

VariableCoefficients scaled_identity(const DiskGrid& g, double s)
{
    VariableCoefficients c;
    c.a = tensor(g, s, 0.0, 0.0, s);
    c.b = {g.zeros(), g.zeros()};
    return c;
}

// -d_r phi at r = 1 for the L2-normalised (m, k) cosine mode, maximised over theta.
double boundary_flux_amplitude(int m, double xi)
{
    double jp = m == 0 ? -std::cyl_bessel_j(1.0, xi) : 0.5 * (std::cyl_bessel_j(m - 1.0, xi) - std::cyl_bessel_j(m + 1.0, xi));
    double norm = (m == 0 ? 1.0 : std::sqrt(2.0)) / (std::sqrt(M_PI) * std::abs(std::cyl_bessel_j(m + 1.0, xi)));
    return norm * std::abs(xi * jp);
}

SimState state_with(const Field& q, const DiskGrid& g)
{
    SimState s;
    s.q.values = q;
    s.h = HeightField::zero(g);
    return s;
}

} // namespace

TEST(ChiInf, MatchesFluxOfFirstMode)
{
    Fixture f;
    const double xi = bessel_zero(0, 1);
    bool alarm = true;
    double chi = chi_inf(state_with(0.3 * f.basis.field(0), *f.grid), *f.grid, 5, &alarm);
    EXPECT_NEAR(chi, 0.3 * boundary_flux_amplitude(0, xi), 1e-6);
    EXPECT_FALSE(alarm);
    EXPECT_NEAR(chi_inf_spectral(state_with(0.3 * f.basis.field(0), *f.grid), *f.grid), chi, 1e-6);
}

TEST(ChiInf, ZeroFieldRaisesAlarm)
{
    Fixture f;
    bool alarm = false;
    EXPECT_EQ(chi_inf(state_with(f.grid->zeros(), *f.grid), *f.grid, 5, &alarm), 0.0);
    EXPECT_TRUE(alarm);
}

TEST(DecayNorms, ZeroFields)
{
    Fixture f;
    Field z = f.grid->zeros();
    VecField vz{z, z};
    DecayNorms d = decay_norms(0.7, z, z, &z, vz, vz, f.basis, 3.0);
    EXPECT_EQ(d.E_beta, 0.0);
    EXPECT_EQ(d.D_low, 0.0);
    EXPECT_FALSE(d.second_derivative_omitted);
    EXPECT_TRUE(decay_norms(0.7, z, z, nullptr, vz, vz, f.basis, 3.0).second_derivative_omitted);
}

TEST(DecayNorms, WeightAndEigenmodeNorms)
{
    Fixture f;
    const Field& phi = f.basis.field(0);
    const double lam = f.basis.lambda(0);
    Field qt = -lam * phi;
    Field qtt = lam * lam * phi;
    auto [gx, gy] = f.grid->gradient(phi);
    VecField v{-gx, -gy};
    VecField vt{lam * gx, lam * gy};
    DecayNorms a = decay_norms(0.0, phi, qt, &qtt, v, vt, f.basis, 2.0);
    DecayNorms b = decay_norms(0.5, phi, qt, &qtt, v, vt, f.basis, 2.0);
    EXPECT_NEAR(b.E_beta / a.E_beta, std::exp(1.0), 1e-12);
    EXPECT_NEAR(a.q_norms[0], (1 + lam) * (1 + lam), 1e-8 * (1 + lam) * (1 + lam));
    EXPECT_NEAR(a.q_norms[1], lam * (1 + lam), 1e-8 * lam * (1 + lam));
    EXPECT_NEAR(a.q_norms[2], lam * lam, 1e-8 * lam * lam);
    double D = std::pow(1 + lam, 5) + lam * lam * std::pow(1 + lam, 3) + lam * lam * lam * lam * (1 + lam);
    EXPECT_NEAR(a.D_low, D, 1e-8 * D);
}

TEST(TruncatedEnergy, ZeroFields)
{
    Fixture f;
    Field z = f.grid->zeros();
    VecField vz{z, z};
    Eigen::VectorXd ring = Eigen::VectorXd::Zero(f.grid->n_theta());
    EnergyFields e{z, z, z, vz, vz, ring, ring, vz, vz, vz, Eigen::VectorXd::Ones(f.grid->n_theta()), -ring};
    e.psi = {f.grid->x1(), f.grid->x2()};
    TruncatedEnergy t = truncated_energy(e, *f.grid);
    EXPECT_EQ(t.E, 0.0);
    EXPECT_EQ(t.D, 0.0);
    EXPECT_TRUE(t.weight_failure);
}

TEST(TruncatedEnergy, BoundaryTermsLinearInFluxWeight)
{
    Fixture f;
    InitialSpec spec;
    spec.q0_modes = {{0, 1, Parity::cosine, 1.0}};
    spec.epsilon = 0.05;
    spec.h0_modes = {{2, 0.01, 0.0}};
    spec.validation = ValidationMode::report;
    InitialData d = build_initial_data(spec, f.basis);
    StepperOptions o;
    o.dt = 1e-4;
    Stepper st(f.grid, o);
    SimState s = st.advance(d.state);
    EnergyFields e = energy_fields(s, st);
    TruncatedEnergy a = truncated_energy(e, *f.grid);
    ASSERT_FALSE(a.weight_failure);
    ASSERT_GT(a.E_boundary, 0.0);
    e.dNq *= 2.0;
    TruncatedEnergy b = truncated_energy(e, *f.grid);
    EXPECT_NEAR(b.E_boundary, 2.0 * a.E_boundary, 1e-12 * a.E_boundary);
    EXPECT_NEAR(b.E - b.E_boundary, a.E - a.E_boundary, 1e-12 * a.E);
}

TEST(FitDecayExponent, RecoversRates)
{
    std::vector<double> t, v, w;
    const double lam = bessel_zero(0, 1) * bessel_zero(0, 1);
    for (int i = 0; i <= 40; ++i) {
        t.push_back(0.05 * i);
        v.push_back(std::exp(-3.0 * t.back()));
        w.push_back(5.0 * std::exp(-lam * t.back()));
    }
    EXPECT_NEAR(fit_decay_exponent(t, v, 0.0, 2.0), 3.0, 1e-10);
    EXPECT_NEAR(fit_decay_exponent(t, w, 0.5, 2.0), lam, 1e-10);
}

TEST(FitDecayExponent, RejectsBadInput)
{
    std::vector<double> t{0, 1, 2, 3, 4, 5, 6}, v(7, 1.0);
    EXPECT_THROW(fit_decay_exponent(t, v, 0.0, 10.0), DomainError);
    t.push_back(7);
    v.push_back(0.0);
    EXPECT_THROW(fit_decay_exponent(t, v, 0.0, 10.0), DomainError);
    v.back() = 1.0;
    EXPECT_NO_THROW(fit_decay_exponent(t, v, 0.0, 10.0));
    EXPECT_THROW(fit_decay_exponent(t, std::vector<double>(3, 1.0), 0.0, 1.0), DomainError);
}

TEST(Oddson, IdentityCoefficients)
{
    Fixture f(16, 12);
    OddsonRate r = oddson_rate({identity_coefficients(*f.grid)}, *f.grid);
    const double j01 = bessel_zero(0, 1);
    EXPECT_NEAR(r.alpha, 0.5, 1e-15);
    EXPECT_NEAR(r.k0, 0.5, 1e-15);
    EXPECT_NEAR(r.beta_drift, 0.0, 1e-15);
    EXPECT_NEAR(r.mu, 0.0, 1e-15);
    EXPECT_NEAR(r.lambda, j01 * j01, 1e-12);
}

TEST(Oddson, ScaledIdentityAndWindow)
{
    Fixture f(16, 12);
    OddsonRate r = oddson_rate({scaled_identity(*f.grid, 2.0)}, *f.grid);
    EXPECT_NEAR(r.alpha, 0.5, 1e-15);
    EXPECT_NEAR(r.k0, 0.25, 1e-15);
    EXPECT_NEAR(r.lambda, 2.0 * r.xi0 * r.xi0, 1e-12);
    OddsonRate w = oddson_rate({identity_coefficients(*f.grid), scaled_identity(*f.grid, 2.0)}, *f.grid);
    EXPECT_NEAR(w.k0, 0.25, 1e-15);
    EXPECT_NEAR(w.lambda, 0.5 * w.xi0 * w.xi0 / 0.25, 1e-12);
}

TEST(Oddson, DriftShiftsBesselOrder)
{
    Fixture f(16, 12);
    VariableCoefficients c = identity_coefficients(*f.grid);
    c.b.x = 0.2 * f.grid->x1();
    c.b.y = 0.2 * f.grid->x2();
    OddsonRate r = oddson_rate({c}, *f.grid);
    EXPECT_NEAR(r.beta_drift, 0.2 * f.grid->radius_field().array().square().maxCoeff(), 1e-14);
    EXPECT_NEAR(r.mu, (r.beta_drift + 1.0) - 1.0, 1e-14);
    EXPECT_NEAR(std::cyl_bessel_j(r.mu, r.xi0), 0.0, 1e-12);
}

TEST(Oddson, RejectsIndefiniteAndEmpty)
{
    Fixture f(16, 12);
    VariableCoefficients c = identity_coefficients(*f.grid);
    c.a(0, 1) = constant(*f.grid, 1.5);
    c.a(1, 0) = constant(*f.grid, 1.5);
    EXPECT_THROW(oddson_rate({c}, *f.grid), EllipticityError);
    EXPECT_THROW(oddson_rate({}, *f.grid), DomainError);
}

TEST(Oddson, ConstantFit)
{
    Fixture f(16, 12);
    const DiskGrid& g = *f.grid;
    const double lam = 4.0;
    std::vector<double> t{0.0, 0.3, 0.9};
    std::vector<Field> q;
    for (double s : t) {
        Field qs = g.zeros();
        for (int i = 0; i < g.n_r(); ++i)
            for (int l = 0; l < g.n_theta(); ++l)
                qs(i, l) = 2.0 * (1.0 - g.r(i)) * std::exp(-lam * s) * (1.0 + g.r(i) * g.r(i) * (1.0 + std::cos(g.theta(l))));
        q.push_back(qs);
    }
    // theta = pi is a node, where the bracket is exactly 1
    EXPECT_NEAR(fit_oddson_constant(t, q, lam, g), 2.0, 1e-12);
}

TEST(Duhamel, FrozenSplitIsPureX)
{
    Fixture f;
    std::vector<double> c0(f.basis.size(), 0.0);
    c0[0] = 1.0;
    c0[2] = 0.3;
    DuhamelTracker tr(f.basis, c0);
    Field q0 = f.basis.synthesize(c0);
    EXPECT_LE(f.grid->norm_l2(tr.X(0.0) + f.grid->laplacian(q0)), 1e-8);
    const double t = 0.2;
    Field z = f.grid->zeros();
    for (int n = 1; n <= 10; ++n) tr.push(0.02 * n, z);
    ASSERT_TRUE(tr.covers(t));
    std::vector<double> ct(c0.size());
    for (int j = 0; j < f.basis.size(); ++j) ct[j] = -c0[j] * f.basis.lambda(j) * std::exp(-f.basis.lambda(j) * t);
    DuhamelSplit s = tr.split(t, f.basis.synthesize(ct));
    EXPECT_LE(s.residual, 1e-13);
    EXPECT_LE(s.residual_X, 1e-13);
    EXPECT_LE(f.grid->norm_l2(s.Z), 1e-15);
}

TEST(Duhamel, ConstantForcingMatchesClosedForm)
{
    Fixture f;
    DuhamelTracker tr(f.basis, std::vector<double>(f.basis.size(), 0.0));
    Field n = f.basis.field(0);
    const double lam = f.basis.lambda(0);
    const double t = 0.3;
    for (int k = 1; k <= 300; ++k) tr.push(1e-3 * k, n);
    DuhamelSplit s = tr.split(t, f.grid->zeros());
    double z = (1.0 - std::exp(-lam * t)) / lam;
    EXPECT_LE(f.grid->norm_l2(s.Z - z * n), 1e-5 * z);
}

TEST(Duhamel, CoverageAndOrdering)
{
    Fixture f;
    DuhamelTracker tr(f.basis, std::vector<double>(f.basis.size(), 0.0));
    EXPECT_TRUE(tr.covers(0.0));
    EXPECT_THROW(tr.split(0.1, f.grid->zeros()), CoverageError);
    tr.push(0.1, f.grid->zeros());
    EXPECT_THROW(tr.push(0.05, f.grid->zeros()), CoverageError);
    EXPECT_THROW(tr.split(0.2, f.grid->zeros()), CoverageError);
}

TEST(Duhamel, XPositivity)
{
    Fixture f;
    std::vector<double> c0(f.basis.size(), 0.0);
    c0[0] = 1.0;
    DuhamelTracker pure(f.basis, c0);
    EXPECT_TRUE(x_positivity_holds(pure, f.basis, 1.0, 0.0));
    EXPECT_TRUE(x_positivity_holds(pure, f.basis, 1.0, 2.0));
    c0[1] = 2.0;
    DuhamelTracker mixed(f.basis, c0);
    EXPECT_FALSE(x_positivity_holds(mixed, f.basis, 1.0, 0.0));
    EXPECT_TRUE(x_positivity_holds(mixed, f.basis, 1.0, 3.0));
}

TEST(TaylorSign, SeriesFlipTimeClosedForm)
{
    Fixture f;
    std::vector<double> c(f.basis.size(), 0.0);
    int j = f.basis.index_of(1, 1, Parity::cosine);
    ASSERT_GE(j, 0);
    c[0] = 1.0;
    c[j] = 0.5;
    const double x1 = bessel_zero(0, 1), x2 = bessel_zero(1, 1);
    const double l1 = x1 * x1, l2 = x2 * x2;
    double ratio = 0.5 * l2 * boundary_flux_amplitude(1, x2) / (l1 * boundary_flux_amplitude(0, x1));
    ASSERT_GT(ratio, 1.0);
    double t_star = std::log(ratio) / (l2 - l1);
    EXPECT_LT(series_min_dNqt(c, f.basis, 0.0), 0.0);
    auto found = series_flip_time(c, f.basis, 1.0);
    ASSERT_TRUE(found.has_value());
    EXPECT_NEAR(*found, t_star, 1e-10);

    std::vector<double> pos(f.basis.size(), 0.0);
    pos[0] = 1.0;
    EXPECT_FALSE(series_flip_time(pos, f.basis, 1.0).has_value());
    EXPECT_FALSE(series_flip_time(c, f.basis, 0.5 * t_star).has_value());
}

TEST(TaylorSign, MonitorOnSyntheticSamples)
{
    const double K = 3.0, c_bar = 0.5, eta = 0.8;
    std::vector<TaylorSample> s;
    for (int i = 0; i <= 10; ++i) {
        double t = 0.1 * i;
        s.push_back({t, t - 0.35, 2.0 * K * K * std::exp(eta * t)});
    }
    TaylorReport r = taylor_sign_monitor(s, K, c_bar, eta);
    ASSERT_TRUE(r.t_star.has_value());
    EXPECT_NEAR(*r.t_star, 0.35, 1e-14);
    EXPECT_TRUE(r.starts_negative);
    EXPECT_TRUE(r.persists);
    EXPECT_NEAR(r.T_K, c_bar * std::log(K), 1e-15);
    EXPECT_TRUE(r.before_T_K == (0.35 <= c_bar * std::log(K)));
    EXPECT_NEAR(r.hopf_C, 2.0, 1e-12);
    EXPECT_TRUE(r.hopf_bound_holds);

    s.back().min_dNqt = -0.1;
    s.back().hopf_ratio *= 10.0;
    TaylorReport late = taylor_sign_monitor(s, K, c_bar, eta);
    EXPECT_FALSE(late.t_star.has_value());
    EXPECT_FALSE(late.persists);
    EXPECT_FALSE(late.hopf_bound_holds);

    for (auto& x : s) x.min_dNqt = 1.0;
    TaylorReport all = taylor_sign_monitor(s, K, c_bar, eta);
    ASSERT_TRUE(all.t_star.has_value());
    EXPECT_EQ(*all.t_star, 0.0);
    EXPECT_FALSE(all.starts_negative);
}

TEST(Barrier, ClosedFormAgreesWithOperator)
{
    Fixture f(32, 24);
    BarrierParams p;
    p.kappa2 = 0.5;
    BarrierResult id = barrier_residual(p, identity_coefficients(*f.grid), f.basis, 0.1);
    EXPECT_LE(id.closed_form_error, 1e-9);

    Eigen::VectorXd h(f.grid->n_theta());
    for (int l = 0; l < h.size(); ++l) h(l) = 0.02 * std::cos(2.0 * f.grid->theta(l));
    GaugeState gs = build_gauge({h, 0.0}, *f.grid);
    VariableCoefficients c = variable_coefficients(gs, *f.grid);
    BarrierResult r = barrier_residual(p, c, f.basis, 0.1);
    EXPECT_LE(r.closed_form_error, 1e-8);
}

TEST(Barrier, IdentityResidualMatchesBesselFormula)
{
    Fixture f(32, 24);
    const DiskGrid& g = *f.grid;
    const double xi = bessel_zero(0, 1), lam = xi * xi;
    const double norm = 1.0 / (std::sqrt(M_PI) * std::abs(std::cyl_bessel_j(1.0, xi)));
    for (double k2 : {0.5, 4.0}) {
        double expect = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < g.n_r(); ++i) {
            double r = g.r(i);
            double phi = norm * std::cyl_bessel_j(0.0, xi * r);
            expect = std::max(expect, -0.5 * lam * phi - 4.0 * k2 + 1.5 * lam * k2 * (1.0 - r * r));
        }
        BarrierParams p;
        p.kappa2 = k2;
        BarrierResult b = barrier_residual(p, identity_coefficients(g), f.basis, 0.0);
        EXPECT_NEAR(b.max_value, expect, 1e-8);
    }
    BarrierParams big;
    big.kappa2 = 4.0;
    EXPECT_GT(barrier_residual(big, identity_coefficients(g), f.basis, 0.0).max_value, 0.0);

    KappaSelection sel = select_kappa2(f.basis);
    ASSERT_TRUE(sel.found);
    EXPECT_EQ(sel.kappa2, 0.5);
    EXPECT_NEAR(sel.C1, 0.5 * sel.margin, 1e-15);
    BarrierParams p;
    p.kappa2 = sel.kappa2;
    EXPECT_TRUE(barrier_residual(p, identity_coefficients(g), f.basis, 0.4, sel.C1).below_margin);
}

TEST(Constants, Log10FMatchesDirectFormula)
{
    const double lam = bessel_zero(0, 1) * bessel_zero(0, 1);
    for (auto [K, C, cb] : {std::tuple{2.0, 0.1, 0.5}, std::tuple{1.5, 1.0, 0.2}, std::tuple{3.0, 0.01, 0.05}}) {
        double a = 8.0 * std::pow(K, 2.0 * C * cb * K * K);
        double b = std::pow(cb, 10) * std::pow(std::log(K), 10) * std::pow(K, 20.0 * cb * lam);
        EXPECT_NEAR(log10_F(K, C, cb, lam), std::log10(std::max(a, b)), 1e-12);
    }
    EXPECT_THROW(log10_F(1.0, 1.0, 1.0, lam), DomainError);
    EXPECT_GT(log10_F(1e6, 1.0, 1.0, lam), 1e12);
}

TEST(Constants, CoercivityRatioOnFirstMode)
{
    Fixture f;
    const double lam = f.basis.lambda(0);
    EXPECT_NEAR(coercivity_ratio(f.basis.field(0), f.basis), std::pow(1.0 + lam, -1.5), 1e-10);
    EXPECT_THROW(coercivity_ratio(-f.basis.field(0), f.basis), DomainError);
}

TEST(Constants, TwistedPoincareIdentityGauge)
{
    Fixture f;
    GaugeState gs = build_gauge(HeightField::zero(*f.grid), *f.grid);
    EXPECT_NEAR(twisted_poincare_ratio(f.basis.field(0), gs, *f.grid), f.basis.lambda(0), 1e-8);
    int j = f.basis.index_of(2, 1, Parity::sine);
    ASSERT_GE(j, 0);
    EXPECT_NEAR(twisted_poincare_ratio(f.basis.field(j), gs, *f.grid), f.basis.lambda(j), 1e-8);
}

TEST(Constants, TensorDeviation)
{
    Fixture f(16, 8);
    const DiskGrid& g = *f.grid;
    EXPECT_NEAR(tensor_deviation_2norm(tensor(g, 1.3, 0.0, 0.0, 0.5)), 0.5, 1e-15);
    EXPECT_NEAR(tensor_deviation_2norm(tensor(g, 1.0, 0.2, 0.2, 1.0)), 0.2, 1e-15);
    EXPECT_NEAR(tensor_deviation_2norm(tensor(g, 1.0, 0.3, 0.0, 1.0)), 0.3, 1e-15);
    TensorField T = tensor(g, 1.0, 0.0, 0.0, 1.0);
    T(0, 0)(3, 5) = 1.7;
    EXPECT_NEAR(tensor_deviation_2norm(T), 0.7, 1e-15);
}

TEST(Constants, NormEquivalenceStableUnderRefinement)
{
    auto ratio = [](int nt, int nr) {
        Fixture f(nt, nr, 8);
        std::vector<double> c(f.basis.size(), 0.0);
        c[0] = 1.0;
        c[f.basis.index_of(2, 1, Parity::cosine)] = 0.3;
        Field q = f.basis.synthesize(c);
        return cartesian_sobolev_norm(q, 3, *f.grid) / sobolev_norm(q, 3.0, f.basis);
    };
    double coarse = ratio(24, 16), fine = ratio(48, 32);
    EXPECT_NEAR(coarse, fine, 1e-6 * fine);
    EXPECT_GT(fine, 0.0);
}
