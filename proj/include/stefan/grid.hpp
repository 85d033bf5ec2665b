#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stefan {

/// Nodal values on the polar grid: row i is the radial node r_i (ascending,
/// last row r = 1), column l is the angle theta_l = 2 pi l / n_theta.
using Field = Eigen::MatrixXd;

struct VecField {
    Field x;
    Field y;
};

/// 2x2 tensor field; (i, j) addresses component [i][j].
struct TensorField {
    Field c[2][2];

    Field& operator()(int i, int j) { return c[i][j]; }
    const Field& operator()(int i, int j) const { return c[i][j]; }
};

/// Polar collocation grid on the unit disk together with the spectral
/// operators defined on it.
///
/// Angles are equispaced, radii are the positive half of an odd-order
/// Chebyshev-Gauss-Lobatto set (r = 1 included, origin excluded). A scalar
/// field is split into real Fourier modes in theta; the radial profile of
/// wavenumber m has parity (-1)^m under r -> -r, so radial derivatives use
/// the Chebyshev matrix folded with that parity. Integrals use the trapezoid
/// rule in theta and Gauss-Legendre in u = r^2 applied to the even-parity
/// interpolant of the angular mean (so r dr = du / 2 is integrated exactly).
class DiskGrid {
public:
    DiskGrid(int n_theta, int n_r);

    int n_theta() const noexcept { return n_theta_; }
    int n_r() const noexcept { return n_r_; }
    int boundary() const noexcept { return n_r_ - 1; }
    double dtheta() const noexcept;

    double r(int i) const { return r_(i); }
    double theta(int l) const { return theta_(l); }
    const Eigen::VectorXd& radii() const noexcept { return r_; }
    const Eigen::VectorXd& angles() const noexcept { return theta_; }

    /// Cartesian coordinates of every node.
    const Field& x1() const noexcept { return x1_; }
    const Field& x2() const noexcept { return x2_; }
    const Field& radius_field() const noexcept { return rr_; }
    const Eigen::RowVectorXd& cos_theta() const noexcept { return cos_; }
    const Eigen::RowVectorXd& sin_theta() const noexcept { return sin_; }

    Field zeros() const { return Field::Zero(n_r_, n_theta_); }
    bool matches(const Field& f) const noexcept { return f.rows() == n_r_ && f.cols() == n_theta_; }
    bool same_shape(const DiskGrid& other) const noexcept
    {
        return n_theta_ == other.n_theta_ && n_r_ == other.n_r_;
    }

    // --- angular Fourier modes ----------------------------------------
    // Coefficient column layout: [a_0, a_1, b_1, ..., a_{M-1}, b_{M-1}, a_M]
    // with M = n_theta / 2.
    int max_wavenumber() const noexcept { return n_theta_ / 2; }
    int wavenumber(int col) const { return col_m_[col]; }
    Field to_modes(const Field& f) const { return f * fwd_; }
    Field from_modes(const Field& c) const { return c * inv_; }
    Eigen::VectorXd ring_to_modes(const Eigen::VectorXd& ring) const;
    Eigen::VectorXd ring_from_modes(const Eigen::VectorXd& coeffs) const;
    Field d_theta_modes(const Field& c) const;
    Eigen::VectorXd ring_d_theta(const Eigen::VectorXd& ring) const;

    // --- radial operators (act on mode coefficients) ------------------
    Field d_r_modes(const Field& c) const;
    Field d_rr_modes(const Field& c) const;
    Field laplacian_modes(const Field& c) const;
    /// Full n_r x n_r radial Laplacian D2 + D1/r - m^2/r^2 of wavenumber m.
    Eigen::MatrixXd radial_laplacian(int m) const;
    const Eigen::MatrixXd& radial_d1(int parity) const { return parity > 0 ? d1_even_ : d1_odd_; }

    // --- nodal conveniences --------------------------------------------
    Field d_theta(const Field& f) const { return from_modes(d_theta_modes(to_modes(f))); }
    Field d_r(const Field& f) const { return from_modes(d_r_modes(to_modes(f))); }
    Field laplacian(const Field& f) const { return from_modes(laplacian_modes(to_modes(f))); }
    /// Cartesian gradient (d/dx1, d/dx2).
    std::pair<Field, Field> gradient(const Field& f) const;
    Field d_x(const Field& f, int axis) const;

    /// Radial derivative on r = 1 from the full spectral stencil.
    Eigen::VectorXd boundary_d_r(const Field& f) const;
    /// Radial derivative on r = 1 from the one-sided finite-difference
    /// stencil over the `width` outermost nodes (order width - 1).
    Eigen::VectorXd boundary_d_r_one_sided(const Field& f, int width = 5) const;

    /// Value at the origin of the angular mean (even-parity extrapolation).
    double center_value(const Field& f) const;

    /// Integral over the unit disk.
    double integrate(const Field& f) const;
    double inner(const Field& f, const Field& g) const { return integrate(f.cwiseProduct(g)); }
    double norm_l2(const Field& f) const;
    /// Integral of a boundary function over theta in [0, 2 pi).
    double integrate_ring(const Eigen::VectorXd& g) const;

    const Eigen::VectorXd& radial_weights() const noexcept { return w_; }

    /// Weights for int rho(r) f r dr dtheta with rho sampled on composite
    /// Gauss-Legendre panels split at `breaks`; f enters through its interpolant.
    Eigen::VectorXd weighted_radial_weights(const std::function<double(double)>& rho, const std::vector<double>& breaks,
                                            int points_per_panel = 64) const;
    double integrate_radial(const Eigen::VectorXd& radial_w, const Field& f) const;

private:
    int n_theta_;
    int n_r_;
    Eigen::VectorXd r_;
    Eigen::VectorXd theta_;
    Eigen::RowVectorXd cos_;
    Eigen::RowVectorXd sin_;
    Field x1_, x2_, rr_;
    Eigen::VectorXd inv_r_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd fwd_, inv_;
    std::vector<int> col_m_;
    std::vector<int> even_cols_, odd_cols_;
    Eigen::MatrixXd d1_even_, d1_odd_, d2_even_, d2_odd_;
    Eigen::RowVectorXd center_interp_;
    Eigen::VectorXd u_, bary_;

    Eigen::RowVectorXd interp_row_u(double u) const;
};

using GridPtr = std::shared_ptr<const DiskGrid>;

inline GridPtr make_grid(int n_theta, int n_r) { return std::make_shared<const DiskGrid>(n_theta, n_r); }

/// Fornberg finite-difference weights for derivative `order` at x0.
Eigen::VectorXd fd_weights(const Eigen::VectorXd& nodes, double x0, int order);

/// Gauss-Legendre nodes and weights on [a, b].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x).
double smooth_step(double x);

/// Sobolev norm on the circle, (sum_k (1 + k^2)^s |g_k|^2)^(1/2), normalised
/// so that s = 0 gives the L2(0, 2 pi) norm.
double circle_sobolev_norm(const DiskGrid& grid, const Eigen::VectorXd& g, double s);

} // namespace stefan
