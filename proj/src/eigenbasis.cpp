#include "stefan/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "stefan/bessel.hpp"
#include "stefan/error.hpp"

namespace stefan {

namespace {

double trig(const EigenMode& mode, double theta)
{
    return mode.parity == Parity::cosine ? std::cos(mode.m * theta) : std::sin(mode.m * theta);
}

bool mode_less(const EigenMode& a, const EigenMode& b)
{
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return std::tuple(a.m, a.k, static_cast<int>(a.parity)) < std::tuple(b.m, b.k, static_cast<int>(b.parity));
}

} // namespace

double EigenMode::value(double r, double theta) const
{
    return norm_factor * bessel_j(m, zero * r) * trig(*this, theta);
}

double EigenMode::boundary_dr(double theta) const
{
    // J_m'(x) = (m / x) J_m(x) - J_{m+1}(x) and J_m(zero) = 0.
    return -norm_factor * zero * bessel_j(m + 1, zero) * trig(*this, theta);
}

Field EigenMode::sample(const DiskGrid& grid) const
{
    Field f(grid.n_r(), grid.n_theta());
    for (int i = 0; i < grid.n_r(); ++i) {
        double radial = (i == grid.boundary()) ? 0.0 : norm_factor * bessel_j(m, zero * grid.r(i));
        for (int l = 0; l < grid.n_theta(); ++l) f(i, l) = radial * trig(*this, grid.theta(l));
    }
    return f;
}

EigenMode make_mode(int m, int k, Parity parity)
{
    if (m < 0 || k < 1) throw DomainError("mode indices must satisfy m >= 0, k >= 1");
    if (m == 0 && parity == Parity::sine) throw DomainError("sine mode with m = 0 is identically zero");
    EigenMode mode;
    mode.m = m;
    mode.k = k;
    mode.parity = parity;
    mode.zero = bessel_zero(m, k);
    mode.lambda = mode.zero * mode.zero;
    const double jn = std::abs(bessel_j(m + 1, mode.zero));
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    mode.norm_factor = (m == 0 ? 1.0 : std::sqrt(2.0)) / (sqrt_pi * jn);
    return mode;
}

std::vector<EigenMode> lowest_modes(int n_modes)
{
    if (n_modes < 1) throw DomainError("n_modes must be positive");
    double bound = 8.0;
    while (true) {
        std::vector<EigenMode> all;
        for (int m = 0; m + 1.0 < bound && m <= kMaxBesselOrder - 1; ++m) {
            for (int k = 1;; ++k) {
                double z = bessel_zero(m, k);
                if (z > bound) break;
                all.push_back(make_mode(m, k, Parity::cosine));
                if (m > 0) all.push_back(make_mode(m, k, Parity::sine));
            }
        }
        if (static_cast<int>(all.size()) >= n_modes) {
            std::sort(all.begin(), all.end(), mode_less);
            all.resize(n_modes);
            return all;
        }
        bound *= 1.5;
        if (bound > kMaxBesselArgument) throw DomainError("requested more modes than the supported zero range holds");
    }
}

EigenBasis::EigenBasis(GridPtr grid, std::vector<EigenMode> modes) : grid_(std::move(grid)), modes_(std::move(modes))
{
    fields_.reserve(modes_.size());
    for (const auto& mode : modes_) fields_.push_back(mode.sample(*grid_));
}

int EigenBasis::index_of(int m, int k, Parity parity) const
{
    for (int j = 0; j < size(); ++j) {
        if (modes_[j].m == m && modes_[j].k == k && modes_[j].parity == parity) return j;
    }
    return -1;
}

Field EigenBasis::synthesize(const std::vector<double>& coeffs) const
{
    if (static_cast<int>(coeffs.size()) > size()) throw ShapeError("more coefficients than basis modes");
    Field f = grid_->zeros();
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j] != 0.0) f += coeffs[j] * fields_[j];
    }
    return f;
}

EigenBasis dirichlet_eigenbasis(int n_modes, GridPtr grid)
{
    std::vector<EigenMode> modes = lowest_modes(n_modes);
    int m_max = 0, k_max = 0;
    for (const auto& mode : modes) {
        m_max = std::max(m_max, mode.m);
        k_max = std::max(k_max, mode.k);
    }
    if (grid->n_theta() < 4 * m_max || grid->n_r() < 2 * k_max) {
        throw ResolutionError("grid " + std::to_string(grid->n_theta()) + "x" + std::to_string(grid->n_r()) +
                              " under-resolves modes up to m = " + std::to_string(m_max) +
                              ", k = " + std::to_string(k_max));
    }
    return EigenBasis(std::move(grid), std::move(modes));
}

std::vector<double> project_coeffs(const Field& q, const EigenBasis& basis)
{
    if (!basis.grid().matches(q)) throw ShapeError("field does not match basis grid");
    std::vector<double> c(basis.size());
    for (int j = 0; j < basis.size(); ++j) c[j] = basis.grid().inner(q, basis.field(j));
    return c;
}

double sobolev_norm_from_coeffs(const std::vector<double>& c, double s, const EigenBasis& basis)
{
    if (s < 0.0 || s > 8.0) throw DomainError("Sobolev index must lie in [0, 8]");
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size() && static_cast<int>(j) < basis.size(); ++j) {
        acc += std::pow(1.0 + basis.lambda(static_cast<int>(j)), s) * c[j] * c[j];
    }
    return std::sqrt(acc);
}

double sobolev_norm(const Field& q, double s, const EigenBasis& basis)
{
    return sobolev_norm_from_coeffs(project_coeffs(q, basis), s, basis);
}

double ratio_K_from_coeffs(const std::vector<double>& c, const EigenBasis& basis)
{
    double n0 = sobolev_norm_from_coeffs(c, 0.0, basis);
    if (n0 == 0.0) throw DegenerateInputError("ratio K undefined for a zero field");
    return sobolev_norm_from_coeffs(c, 4.0, basis) / n0;
}

double ratio_K(const Field& q0, const EigenBasis& basis)
{
    return ratio_K_from_coeffs(project_coeffs(q0, basis), basis);
}

} // namespace stefan
