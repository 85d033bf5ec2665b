#include "stefan/radial_oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stefan/error.hpp"

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;

double trapezoid_ps(const Eigen::VectorXd& f)
{
    const int n = static_cast<int>(f.size()) - 1;
    const double ds = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * f(i) * (i * ds);
    }
    return acc * ds;
}

double front_slope(const Eigen::VectorXd& p)
{
    const int n = static_cast<int>(p.size()) - 1;
    const double ds = 1.0 / n;
    return (3.0 * p(n) - 4.0 * p(n - 1) + p(n - 2)) / (2.0 * ds);
}

// Linear interpolation of p at s in [0, 1].
double interp(const Eigen::VectorXd& p, double s)
{
    const int n = static_cast<int>(p.size()) - 1;
    if (s >= 1.0) return 0.0;
    double x = s * n;
    int i = std::min(static_cast<int>(x), n - 1);
    double f = x - i;
    return (1.0 - f) * p(i) + f * p(i + 1);
}

} // namespace

Eigen::VectorXd radial_nodes(int n_s) { return Eigen::VectorXd::LinSpaced(n_s + 1, 0.0, 1.0); }

double radial_enthalpy(const RadialState& s) { return 2.0 * kPi * s.R * s.R * trapezoid_ps(s.p) + kPi * s.R * s.R; }

double radial_l2_squared(const RadialState& s)
{
    return 2.0 * kPi * s.R * s.R * trapezoid_ps(s.p.cwiseProduct(s.p));
}

std::vector<RadialState> solve_radial(const Eigen::VectorXd& p0, double R0, const RadialOptions& opt)
{
    const int n = opt.n_s;
    if (p0.size() != n + 1) throw ShapeError("initial profile must have n_s + 1 samples");
    if (!(R0 > 0.0) || !(opt.dt > 0.0) || opt.t_end < 0.0 || n < 8) throw DomainError("invalid radial solver options");
    if (std::abs(p0(n)) > 1e-14) throw PreconditionError("initial profile must vanish at s = 1");
    if (p0.minCoeff() < 0.0) throw PreconditionError("initial profile must be nonnegative");
    const bool zero = p0.cwiseAbs().maxCoeff() == 0.0;
    // First-order one-sided slope; the solver's front speed uses the second-order stencil.
    if (!zero && !(p0(n - 1) > 0.0)) throw PreconditionError("initial profile needs a negative slope at s = 1");

    const double ds = 1.0 / n;
    const int steps = static_cast<int>(std::llround(opt.t_end / opt.dt));
    std::vector<RadialState> out;
    RadialState st{0.0, R0, p0};
    out.push_back(st);

    // Tridiagonal unknowns p_0..p_{n-1}; p_n = 0.
    Eigen::VectorXd lower(n), diag(n), upper(n), rhs(n);
    for (int step = 1; step <= steps; ++step) {
        const double R = st.R;
        const double Rdot = -front_slope(st.p) / R;
        if (Rdot < -opt.reversal_tol) {
            throw ModelViolationError("front reversal at t = " + std::to_string(st.t) + " (R' = " + std::to_string(Rdot) + ")");
        }
        const double kap = opt.dt / (R * R * ds * ds);
        for (int i = 0; i < n; ++i) {
            double adv = 0.0;
            if (i > 0) adv = (i * ds) * (Rdot / R) * (st.p(i + 1) - st.p(i - 1)) / (2.0 * ds);
            rhs(i) = st.p(i) + opt.dt * adv;
            if (i == 0) {
                // p_ss + p_s / s -> 2 p_ss with the ghost p_{-1} = p_1.
                diag(i) = 1.0 + 4.0 * kap;
                upper(i) = -4.0 * kap;
                lower(i) = 0.0;
            } else {
                double s = i * ds;
                lower(i) = -kap * (1.0 - ds / (2.0 * s));
                diag(i) = 1.0 + 2.0 * kap;
                upper(i) = -kap * (1.0 + ds / (2.0 * s));
            }
        }
        upper(n - 1) = 0.0;  // p_n = 0
        // Thomas algorithm.
        for (int i = 1; i < n; ++i) {
            double w = lower(i) / diag(i - 1);
            diag(i) -= w * upper(i - 1);
            rhs(i) -= w * rhs(i - 1);
        }
        Eigen::VectorXd p(n + 1);
        p(n) = 0.0;
        p(n - 1) = rhs(n - 1) / diag(n - 1);
        for (int i = n - 2; i >= 0; --i) p(i) = (rhs(i) - upper(i) * p(i + 1)) / diag(i);
        st.p = std::move(p);
        st.R = R + opt.dt * Rdot;
        st.t = step * opt.dt;
        if (step % opt.stride == 0 || step == steps) out.push_back(st);
    }
    return out;
}

CrossReport cross_compare(const std::vector<AleSample>& ale, const std::vector<RadialState>& radial, const DiskGrid& grid)
{
    CrossReport rep;
    const Eigen::VectorXd& w = grid.radial_weights();
    std::size_t k = 0;
    for (const auto& a : ale) {
        if (a.h.maxCoeff() - a.h.minCoeff() > 1e-8) throw PreconditionError("ALE run is not radially symmetric");
        while (k < radial.size() && radial[k].t < a.t - 1e-9) ++k;
        if (k >= radial.size() || std::abs(radial[k].t - a.t) > 1e-9) continue;
        const RadialState& r = radial[k];
        const double Rale = 1.0 + a.h.mean();
        double rd = std::abs(Rale - r.R);
        double acc = 0.0;
        Eigen::VectorXd qmean = a.q.rowwise().mean();
        for (int i = 0; i < grid.n_r(); ++i) {
            double s = Rale * grid.r(i) / r.R;
            double d = qmean(i) - interp(r.p, s);
            acc += w(i) * d * d;
        }
        double pd = std::sqrt(2.0 * kPi * acc);
        rep.t.push_back(a.t);
        rep.radius_diff.push_back(rd);
        rep.profile_diff.push_back(pd);
        rep.max_radius_diff = std::max(rep.max_radius_diff, rd);
        rep.max_profile_diff = std::max(rep.max_profile_diff, pd);
    }
    return rep;
}

} // namespace stefan
