// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stefan/bessel.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/error.hpp"
#include "stefan/experiment.hpp"
#include "stefan/gauge.hpp"

using namespace stefan;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double lambda1() { return std::pow(bessel_zero(0, 1), 2); }

SimConfig quiet(SimConfig c)
{
    c.write_fields = false;
    return c;
}

double q_exponent(const RunResult& r)
{
    std::vector<double> t, q2;
    for (const auto& rec : r.records) {
        t.push_back(rec.t);
        q2.push_back(rec.q_L2 * rec.q_L2);
    }
    return fit_decay_exponent(t, q2, r.config.fit_t_a, r.final_state.t);
}

// Full-system runs shared by several criteria.
const RunResult& small_run(double eps)
{
    static std::map<double, RunResult> cache;
    auto it = cache.find(eps);
    if (it != cache.end()) return it->second;
    SimConfig c = quiet(preset_config("stefan-small"));
    c.epsilon = eps;
    return cache.emplace(eps, run_simulation(c)).first->second;
}

Verdict check_linear_decay()
{
    RunResult r = run_simulation(quiet(preset_config("frozen-heat")));
    double two = 2.0 * lambda1();
    double e = q_exponent(r);
    bool ok = !r.failure && r.config.n_theta == 64 && r.config.n_r == 64 && r.config.dt == 1e-4 &&
              std::abs(e - two) <= 0.01 * two;
    return {ok, fmt("exponent %.9f vs 2*lambda1 %.9f (rel %.2e)", e, two, std::abs(e - two) / two)};
}

Verdict check_nonlinear_band()
{
    double two = 2.0 * lambda1();
    std::vector<double> gap;
    std::string d;
    bool ok = true;
    for (double eps : {0.05, 0.025, 0.0125}) {
        const RunResult& r = small_run(eps);
        if (r.failure) return {false, "run failed at eps " + std::to_string(eps) + ": " + *r.failure};
        double e = q_exponent(r);
        gap.push_back(std::abs(e - two));
        if (eps == 0.05) ok = ok && std::abs(e - two) <= 0.5;
        d += fmt("eps %.4g: %.6f; ", eps, e);
    }
    bool mono = gap[1] < gap[0] && gap[2] < gap[1];
    return {ok && mono, d + (mono ? "gap to 2*lambda1 shrinks" : "gap not monotone")};
}

Verdict check_hopf_envelope()
{
    const RunResult& r = small_run(0.05);
    const double eta = 0.1 * lambda1();
    double ref = NAN, lo = INFINITY;
    for (const auto& rec : r.records) {
        double e = std::exp((lambda1() + 0.5 * eta) * rec.t) * rec.chi;
        lo = std::min(lo, e);
        if (std::isnan(ref) && rec.t >= 0.1 - 1e-12) ref = e;
    }
    bool ok = std::abs(r.eta - eta) < 1e-12 && lo >= 0.5 * ref;
    return {ok, fmt("min envelope / value at t = 0.1 = %.4f (need >= 0.5)", lo / ref)};
}

Verdict check_sign_flip()
{
    RunResult r = run_simulation(quiet(preset_config("stefan-mixture")));
    if (r.failure) return {false, "run failed: " + *r.failure};
    TaylorReport tr = taylor_sign_monitor(r.taylor, r.initial.K, r.config.c_bar, r.eta);
    auto pred = series_flip_time(r.initial.coeffs, *r.basis, r.config.t_end);
    if (!tr.t_star || !pred) return {false, "no crossing found"};
    double rel = std::abs(*tr.t_star - *pred) / *pred;
    bool ok = tr.starts_negative && tr.persists && rel <= 0.02;
    return {ok, fmt("t* %.6f vs series %.6f (rel %.2e)", *tr.t_star, *pred, rel) +
                    (tr.starts_negative ? ", starts negative" : ", starts nonnegative") +
                    (tr.persists ? ", positive to t_end" : ", not persistent")};
}

Verdict check_boundary_settling()
{
    const RunResult& a = small_run(0.05);
    const RunResult& b = small_run(0.025);
    double Ca = a.max_h_deviation / std::sqrt(0.05);
    double Cb = b.max_h_deviation / std::sqrt(0.025);
    double ratio = std::max(Ca, Cb) / std::min(Ca, Cb);
    double step = std::min(a.min_h_step, b.min_h_step);
    bool ok = step >= -1e-8 && ratio <= 1.5;
    return {ok, fmt("min per-step dh %.2e, C(0.05) %.4g, C(0.025) %.4g, ratio %.3f", step, Ca, Cb, ratio)};
}

Verdict check_enthalpy()
{
    const RunResult& r = small_run(0.05);
    RadialOptions o;
    o.t_end = 1.0;
    o.stride = 1000;
    Eigen::VectorXd s = radial_nodes(o.n_s), p(o.n_s + 1);
    const double xi = bessel_zero(0, 1);
    for (int i = 0; i <= o.n_s; ++i) p(i) = 0.05 * std::cyl_bessel_j(0.0, xi * s(i)) / (std::sqrt(M_PI) * std::abs(std::cyl_bessel_j(1.0, xi)));
    p(o.n_s) = 0.0;
    auto series = solve_radial(p, 1.0, o);
    double H0 = radial_enthalpy(series.front()), drift = 0.0;
    for (const auto& st : series) drift = std::max(drift, std::abs(radial_enthalpy(st) - H0) / H0);
    bool ok = r.final_state.t >= 1.0 - 1e-12 && r.max_enthalpy_drift <= 1e-4 && drift <= 1e-4;
    return {ok, fmt("full system %.2e, radial oracle %.2e", r.max_enthalpy_drift, drift)};
}

Verdict check_cross_validation()
{
    struct Level {
        int n;
        double dt;
        int n_s;
        double rdt;
    };
    std::vector<double> diffs;
    std::string d;
    for (Level L : {Level{16, 4e-4, 100, 2e-5}, Level{24, 2e-4, 200, 1e-5}, Level{0, 0, 0, 0}}) {
        SimConfig c = quiet(preset_config("radial-compare"));
        if (L.n > 0) {
            c.n_theta = c.n_r = L.n;
            c.n_modes = 8;
            c.dt = L.dt;
            c.snapshot_stride = static_cast<int>(std::lround(0.01 / L.dt));
            c.radial_n_s = L.n_s;
            c.radial_dt = L.rdt;
        }
        RunResult r = run_simulation(c);
        if (r.failure || !r.cross) return {false, "radial comparison unavailable"};
        diffs.push_back(r.cross->max_radius_diff);
        d += fmt("n %g: %.2e; ", c.n_theta, r.cross->max_radius_diff);
    }
    bool ok = diffs.back() <= 1e-3 && diffs[1] < diffs[0] && diffs[2] < diffs[1];
    return {ok, d + "default level is the preset"};
}

Verdict check_harmonic_extension()
{
    GridPtr g = make_grid(64, 32);
    Eigen::VectorXd h(g->n_theta());
    for (int l = 0; l < h.size(); ++l) h(l) = 0.02 * std::cos(3.0 * g->theta(l));
    GaugeState gs = build_gauge({h, 0.0}, *g);
    double err = 0.0;
    for (int i = 0; i < g->n_r(); ++i) {
        for (int l = 0; l < g->n_theta(); ++l) {
            double r = g->r(i), th = g->theta(l);
            // (1 + 0.02 cos 3t) (cos t, sin t) resolved into harmonics, then r^|k|.
            double X = r * std::cos(th) + 0.01 * (std::pow(r, 4) * std::cos(4 * th) + r * r * std::cos(2 * th));
            double Y = r * std::sin(th) + 0.01 * (std::pow(r, 4) * std::sin(4 * th) - r * r * std::sin(2 * th));
            err = std::max({err, std::abs(gs.psi.x(i, l) - X), std::abs(gs.psi.y(i, l) - Y)});
        }
    }
    return {err <= 1e-10, fmt("max nodal error %.2e", err)};
}

Verdict check_oddson()
{
    GridPtr g = make_grid(32, 16);
    OddsonRate r = oddson_rate({identity_coefficients(*g)}, *g);
    double dl = std::abs(r.lambda - lambda1());
    bool ok = std::abs(r.mu) <= 1e-10 && dl <= 1e-10 && r.alpha == 0.5 && r.k0 == 0.5 && r.beta_drift == 0.0;
    return {ok, fmt("mu %.2e, |lambda - lambda1| %.2e", r.mu, dl)};
}

Verdict check_duhamel()
{
    SimConfig c = quiet(preset_config("stefan-mixture"));
    c.frozen_gauge = true;
    RunResult r = run_simulation(c);
    if (r.failure) return {false, "run failed: " + *r.failure};
    double worst = 0.0;
    for (double v : r.duhamel_residual_X) worst = std::max(worst, v);
    const double K = r.initial.K, T = 2.0 * std::log(K);
    DuhamelTracker tr(*r.basis, r.initial.coeffs);
    bool pos = true;
    for (int i = 0; i <= 40; ++i) pos = pos && x_positivity_holds(tr, *r.basis, r.initial.c1, T + 0.25 * i);
    bool ok = !r.duhamel_residual_X.empty() && worst <= 1e-6 && pos;
    return {ok, fmt("max ||-q_t - X|| %.2e over %g samples; X bound on [%.3f, %.3f]", worst,
                    static_cast<double>(r.duhamel_residual_X.size()), T, T + 10.0) +
                    (pos ? " holds" : " violated")};
}

Verdict check_eigen_suite()
{
    GridPtr g = make_grid(64, 48);
    EigenBasis b = dirichlet_eigenbasis(64, g);
    double gram = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) gram = std::max(gram, std::abs(g->inner(b.field(i), b.field(j)) - (i == j)));
    double grad = 0.0;
    for (int j = 0; j < 8; ++j) {
        auto [gx, gy] = g->gradient(b.field(j));
        grad = std::max(grad, std::abs((g->inner(gx, gx) + g->inner(gy, gy)) / b.lambda(j) - 1.0));
    }
    // Positive Dirichlet family (1 - r^2)^p (1 + a x1 + c x2^2), calibration on even indices.
    std::vector<double> ratio;
    for (int p = 1; p <= 5; ++p) {
        for (double a : {0.0, 0.6}) {
            Field f = g->zeros();
            for (int i = 0; i < g->n_r(); ++i)
                for (int l = 0; l < g->n_theta(); ++l) {
                    double r = g->r(i), x = g->x1()(i, l), y = g->x2()(i, l);
                    f(i, l) = std::pow(1.0 - r * r, p) * (1.0 + a * x + 0.3 * a * y * y);
                }
            ratio.push_back(coercivity_ratio(f, b));
        }
    }
    double C = 0.0, held = 0.0;
    for (std::size_t k = 0; k < ratio.size(); ++k) (k % 2 == 0 ? C : held) = std::max(k % 2 == 0 ? C : held, ratio[k]);
    bool ok = gram <= 1e-6 && grad <= 1e-6 && held <= C;
    return {ok, fmt("Gram %.2e, gradient %.2e, C* %.4f (calibration), held-out max %.4f", gram, grad, C, held)};
}

Verdict check_barrier()
{
    SimConfig c = preset_config("barrier-check");
    GridPtr g = make_grid(c.n_theta, c.n_r);
    EigenBasis b = dirichlet_eigenbasis(c.n_modes, g);
    KappaSelection sel = select_kappa2(b);
    if (!sel.found) return {false, "no admissible kappa2"};
    BarrierParams p;
    p.kappa2 = sel.kappa2;
    BarrierResult r = barrier_residual(p, identity_coefficients(*g), b, 0.0);
    bool ok = r.max_value < 0.0 && r.closed_form_error <= 1e-10;
    // Same check on a coarser radial grid; the mismatch is differentiation roundoff growing like n_r^4.
    GridPtr gc = make_grid(c.n_theta, 12);
    BarrierResult rc = barrier_residual(p, identity_coefficients(*gc), dirichlet_eigenbasis(c.n_modes, gc), 0.0);
    return {ok, fmt("kappa2 %.4g, max residual %.4f, closed-form error %.2e (n_r = 12: %.2e)", sel.kappa2, r.max_value,
                    r.closed_form_error, rc.closed_form_error)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"linear decay rate", check_linear_decay},
        {"nonlinear decay band", check_nonlinear_band},
        {"Hopf lower envelope", check_hopf_envelope},
        {"sign flip of d_N q_t", check_sign_flip},
        {"boundary settling", check_boundary_settling},
        {"enthalpy conservation", check_enthalpy},
        {"radial cross-validation", check_cross_validation},
        {"harmonic extension", check_harmonic_extension},
        {"Oddson calculator", check_oddson},
        {"Duhamel reconstruction", check_duhamel},
        {"eigen/Poincare suite", check_eigen_suite},
        {"barrier check", check_barrier},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %-26s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
