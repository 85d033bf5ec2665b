#include "stefan/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stefan/error.hpp"

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;

// Chebyshev-Gauss-Lobatto differentiation matrix on x_j = cos(j pi / N),
// built with trigonometric node differences and the negative-sum diagonal.
Eigen::MatrixXd chebyshev_d1(int n)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n + 1);
    auto c = [n](int j) { return (j == 0 || j == n) ? 2.0 : 1.0; };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            double diff = -2.0 * std::sin((i + j) * kPi / (2.0 * n)) * std::sin((i - j) * kPi / (2.0 * n));
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            d(i, j) = c(i) / c(j) * sign / diff;
        }
    }
    for (int i = 0; i <= n; ++i) d(i, i) = -(d.row(i).sum() - d(i, i));
    return d;
}

Eigen::MatrixXd negative_sum_diagonal(Eigen::MatrixXd m)
{
    for (int i = 0; i < m.rows(); ++i) m(i, i) = -(m.row(i).sum() - m(i, i));
    return m;
}

} // namespace

Eigen::VectorXd fd_weights(const Eigen::VectorXd& nodes, double x0, int order)
{
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, order + 1);
    double c1 = 1.0;
    double c4 = nodes(0) - x0;
    c(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes(i) - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes(i) - nodes(j);
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c.col(order);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a, double b)
{
    Eigen::VectorXd x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x(i) = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w(i) = (b - a) / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

DiskGrid::DiskGrid(int n_theta, int n_r) : n_theta_(n_theta), n_r_(n_r)
{
    if (n_theta < 16 || n_theta % 2 != 0) {
        throw DomainError("n_theta must be even and >= 16, got " + std::to_string(n_theta));
    }
    if (n_r < 8) throw DomainError("n_r must be >= 8, got " + std::to_string(n_r));

    const int big_n = 2 * n_r - 1;
    r_.resize(n_r);
    for (int a = 0; a < n_r; ++a) {
        int j = n_r - 1 - a;
        r_(a) = std::sin((big_n - 2.0 * j) * kPi / (2.0 * big_n));
    }
    r_(n_r - 1) = 1.0;
    inv_r_ = r_.cwiseInverse();

    theta_.resize(n_theta);
    cos_.resize(n_theta);
    sin_.resize(n_theta);
    for (int l = 0; l < n_theta; ++l) {
        theta_(l) = 2.0 * kPi * l / n_theta;
        cos_(l) = std::cos(theta_(l));
        sin_(l) = std::sin(theta_(l));
    }
    x1_ = r_ * cos_;
    x2_ = r_ * sin_;
    rr_ = r_ * Eigen::RowVectorXd::Ones(n_theta);

    // Real DFT pair.
    const int big_m = n_theta / 2;
    fwd_.resize(n_theta, n_theta);
    inv_.resize(n_theta, n_theta);
    col_m_.assign(n_theta, 0);
    for (int col = 0; col < n_theta; ++col) {
        col_m_[col] = (col == n_theta - 1) ? big_m : (col + 1) / 2;
    }
    for (int l = 0; l < n_theta; ++l) {
        fwd_(l, 0) = 1.0 / n_theta;
        inv_(0, l) = 1.0;
        for (int m = 1; m < big_m; ++m) {
            double c = std::cos(m * theta_(l)), s = std::sin(m * theta_(l));
            fwd_(l, 2 * m - 1) = 2.0 * c / n_theta;
            fwd_(l, 2 * m) = 2.0 * s / n_theta;
            inv_(2 * m - 1, l) = c;
            inv_(2 * m, l) = s;
        }
        double alt = (l % 2 == 0) ? 1.0 : -1.0;
        fwd_(l, n_theta - 1) = alt / n_theta;
        inv_(n_theta - 1, l) = alt;
    }
    for (int col = 0; col < n_theta; ++col) {
        (col_m_[col] % 2 == 0 ? even_cols_ : odd_cols_).push_back(col);
    }

    // Parity-folded radial differentiation.
    Eigen::MatrixXd d = chebyshev_d1(big_n);
    Eigen::MatrixXd d2 = negative_sum_diagonal(d * d);
    auto fold = [&](const Eigen::MatrixXd& full, double parity) {
        Eigen::MatrixXd out(n_r, n_r);
        for (int a = 0; a < n_r; ++a) {
            int ja = n_r - 1 - a;
            for (int b = 0; b < n_r; ++b) {
                int jb = n_r - 1 - b;
                out(a, b) = full(ja, jb) + parity * full(ja, big_n - jb);
            }
        }
        return out;
    };
    d1_even_ = fold(d, 1.0);
    d1_odd_ = fold(d, -1.0);
    d2_even_ = fold(d2, 1.0);
    d2_odd_ = fold(d2, -1.0);

    // Radial quadrature: interpolate in u = r^2 and integrate with
    // Gauss-Legendre, int_0^1 f r dr = 1/2 int_0^1 f du.
    Eigen::VectorXd u = r_.cwiseProduct(r_);
    Eigen::VectorXd log_prod(n_r);
    Eigen::VectorXd sign(n_r);
    for (int a = 0; a < n_r; ++a) {
        long double lp = 0.0L;
        double sg = 1.0;
        for (int b = 0; b < n_r; ++b) {
            if (b == a) continue;
            long double diff = static_cast<long double>(u(a)) - u(b);
            lp += std::log(std::abs(diff));
            if (diff < 0) sg = -sg;
        }
        log_prod(a) = static_cast<double>(lp);
        sign(a) = sg;
    }
    const double shift = (-log_prod).maxCoeff();
    Eigen::VectorXd bary(n_r);
    for (int a = 0; a < n_r; ++a) bary(a) = sign(a) * std::exp(-log_prod(a) - shift);

    u_ = u;
    bary_ = bary;
    auto [gx, gw] = gauss_legendre(n_r + 2, 0.0, 1.0);
    w_ = Eigen::VectorXd::Zero(n_r);
    for (int g = 0; g < gx.size(); ++g) w_ += 0.5 * gw(g) * interp_row_u(gx(g)).transpose();
    center_interp_ = interp_row_u(0.0);
}

Eigen::RowVectorXd DiskGrid::interp_row_u(double uu) const
{
    Eigen::RowVectorXd row(n_r_);
    for (int a = 0; a < n_r_; ++a) {
        if (uu == u_(a)) {
            row.setZero();
            row(a) = 1.0;
            return row;
        }
        row(a) = bary_(a) / (uu - u_(a));
    }
    return row / row.sum();
}

Eigen::VectorXd DiskGrid::weighted_radial_weights(const std::function<double(double)>& rho,
                                                  const std::vector<double>& breaks, int points) const
{
    std::vector<double> b{0.0};
    for (double x : breaks) {
        if (x > b.back() && x < 1.0) b.push_back(x);
    }
    b.push_back(1.0);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_r_);
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
        auto [gx, gw] = gauss_legendre(points, b[p], b[p + 1]);
        for (int g = 0; g < gx.size(); ++g) {
            double r = gx(g);
            w += gw(g) * rho(r) * r * interp_row_u(r * r).transpose();
        }
    }
    return w;
}

double DiskGrid::integrate_radial(const Eigen::VectorXd& radial_w, const Field& f) const
{
    if (!matches(f)) throw ShapeError("field shape does not match grid");
    return 2.0 * kPi * radial_w.dot(f.rowwise().mean());
}

double DiskGrid::dtheta() const noexcept { return 2.0 * kPi / n_theta_; }

Eigen::VectorXd DiskGrid::ring_to_modes(const Eigen::VectorXd& ring) const
{
    return (ring.transpose() * fwd_).transpose();
}

Eigen::VectorXd DiskGrid::ring_from_modes(const Eigen::VectorXd& coeffs) const
{
    return (coeffs.transpose() * inv_).transpose();
}

Field DiskGrid::d_theta_modes(const Field& c) const
{
    Field out = Field::Zero(c.rows(), c.cols());
    for (int m = 1; m < n_theta_ / 2; ++m) {
        out.col(2 * m - 1) = m * c.col(2 * m);
        out.col(2 * m) = -m * c.col(2 * m - 1);
    }
    return out;
}

Eigen::VectorXd DiskGrid::ring_d_theta(const Eigen::VectorXd& ring) const
{
    Field c = ring_to_modes(ring).transpose();
    return ring_from_modes(d_theta_modes(c).transpose());
}

Field DiskGrid::d_r_modes(const Field& c) const
{
    Field out(c.rows(), c.cols());
    out(Eigen::all, even_cols_) = d1_even_ * c(Eigen::all, even_cols_);
    out(Eigen::all, odd_cols_) = d1_odd_ * c(Eigen::all, odd_cols_);
    return out;
}

Field DiskGrid::d_rr_modes(const Field& c) const
{
    Field out(c.rows(), c.cols());
    out(Eigen::all, even_cols_) = d2_even_ * c(Eigen::all, even_cols_);
    out(Eigen::all, odd_cols_) = d2_odd_ * c(Eigen::all, odd_cols_);
    return out;
}

Field DiskGrid::laplacian_modes(const Field& c) const
{
    Field out = d_rr_modes(c) + inv_r_.asDiagonal() * d_r_modes(c);
    Eigen::RowVectorXd m2(c.cols());
    for (int col = 0; col < c.cols(); ++col) m2(col) = double(col_m_[col]) * col_m_[col];
    out -= (inv_r_.cwiseProduct(inv_r_)).asDiagonal() * c * m2.asDiagonal();
    return out;
}

Eigen::MatrixXd DiskGrid::radial_laplacian(int m) const
{
    const bool even = (m % 2 == 0);
    Eigen::MatrixXd out = (even ? d2_even_ : d2_odd_) + inv_r_.asDiagonal() * (even ? d1_even_ : d1_odd_);
    out.diagonal() -= double(m) * m * inv_r_.cwiseProduct(inv_r_);
    return out;
}

std::pair<Field, Field> DiskGrid::gradient(const Field& f) const
{
    Field c = to_modes(f);
    Field fr = from_modes(d_r_modes(c));
    Field ft = inv_r_.asDiagonal() * from_modes(d_theta_modes(c));
    Field gx = fr.array().rowwise() * cos_.array() - ft.array().rowwise() * sin_.array();
    Field gy = fr.array().rowwise() * sin_.array() + ft.array().rowwise() * cos_.array();
    return {gx, gy};
}

Field DiskGrid::d_x(const Field& f, int axis) const
{
    auto g = gradient(f);
    return axis == 0 ? g.first : g.second;
}

Eigen::VectorXd DiskGrid::boundary_d_r(const Field& f) const
{
    Field c = to_modes(f);
    Eigen::RowVectorXd row(n_theta_);
    for (int col = 0; col < n_theta_; ++col) {
        const Eigen::MatrixXd& d = (col_m_[col] % 2 == 0) ? d1_even_ : d1_odd_;
        row(col) = d.row(n_r_ - 1).dot(c.col(col));
    }
    return ring_from_modes(row.transpose());
}

Eigen::VectorXd DiskGrid::boundary_d_r_one_sided(const Field& f, int width) const
{
    if (width < 2 || width > n_r_) throw DomainError("one-sided stencil width out of range");
    Eigen::VectorXd nodes = r_.tail(width);
    Eigen::VectorXd w = fd_weights(nodes, 1.0, 1);
    return (w.transpose() * f.bottomRows(width)).transpose();
}

double DiskGrid::center_value(const Field& f) const
{
    Eigen::VectorXd mean = f.rowwise().mean();
    return center_interp_.dot(mean);
}

double DiskGrid::integrate(const Field& f) const
{
    if (!matches(f)) throw ShapeError("field shape does not match grid");
    return 2.0 * kPi * w_.dot(f.rowwise().mean());
}

double DiskGrid::norm_l2(const Field& f) const
{
    double s = integrate(f.cwiseProduct(f));
    return std::sqrt(std::max(s, 0.0));
}

double DiskGrid::integrate_ring(const Eigen::VectorXd& g) const { return g.sum() * dtheta(); }

double smooth_step(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double circle_sobolev_norm(const DiskGrid& grid, const Eigen::VectorXd& g, double s)
{
    Eigen::VectorXd c = grid.ring_to_modes(g);
    const int n = grid.n_theta();
    double acc = 0.0;
    for (int col = 0; col < n; ++col) {
        int m = grid.wavenumber(col);
        double weight = (col == 0 || col == n - 1) ? 2.0 * kPi : kPi;
        acc += weight * std::pow(1.0 + double(m) * m, s) * c(col) * c(col);
    }
    return std::sqrt(acc);
}

} // namespace stefan
