#include "stefan/gauge.hpp"

#include <cmath>
#include <string>

#include "stefan/error.hpp"

namespace stefan {

namespace {

// Cartesian gradient from nodal d_r and d_theta.
std::pair<Field, Field> cartesian(const DiskGrid& grid, const Field& f_r, const Field& f_th)
{
    Field ft = grid.radii().cwiseInverse().asDiagonal() * f_th;
    const auto& c = grid.cos_theta().array();
    const auto& s = grid.sin_theta().array();
    Field gx = f_r.array().rowwise() * c - ft.array().rowwise() * s;
    Field gy = f_r.array().rowwise() * s + ft.array().rowwise() * c;
    return {gx, gy};
}

} // namespace

GaugeState harmonic_extend(const HeightField& h, const DiskGrid& grid, double graph_floor)
{
    if (h.values.size() != grid.n_theta()) throw ShapeError("height field does not match grid");
    if ((1.0 + h.values.array()).minCoeff() < graph_floor) {
        throw GeometryError("1 + h fell below the graph floor " + std::to_string(graph_floor));
    }
    const int nr = grid.n_r();
    const int nt = grid.n_theta();
    Eigen::VectorXd R = 1.0 + h.values.array();
    Eigen::VectorXd g[2] = {R.cwiseProduct(grid.cos_theta().transpose()), R.cwiseProduct(grid.sin_theta().transpose())};

    GaugeState state;
    state.t = h.t;
    Field* psi[2] = {&state.psi.x, &state.psi.y};
    for (int comp = 0; comp < 2; ++comp) {
        Eigen::VectorXd c = grid.ring_to_modes(g[comp]);
        Field modes(nr, nt), modes_r(nr, nt);
        for (int col = 0; col < nt; ++col) {
            int m = grid.wavenumber(col);
            for (int i = 0; i < nr; ++i) {
                double r = grid.r(i);
                modes(i, col) = c(col) * std::pow(r, m);
                modes_r(i, col) = m == 0 ? 0.0 : c(col) * m * std::pow(r, m - 1);
            }
        }
        *psi[comp] = grid.from_modes(modes);
        Field f_r = grid.from_modes(modes_r);
        Field f_th = grid.from_modes(grid.d_theta_modes(modes));
        auto [gx, gy] = cartesian(grid, f_r, f_th);
        state.grad_psi(comp, 0) = gx;
        state.grad_psi(comp, 1) = gy;
    }
    // Exact boundary values rather than the resynthesised ring.
    state.psi.x.row(grid.boundary()) = g[0].transpose();
    state.psi.y.row(grid.boundary()) = g[1].transpose();
    state.psi_t = {grid.zeros(), grid.zeros()};
    return state;
}

GaugeState deformation_tensors(GaugeState state)
{
    const Field& a = state.grad_psi(0, 0);
    const Field& b = state.grad_psi(0, 1);
    const Field& c = state.grad_psi(1, 0);
    const Field& d = state.grad_psi(1, 1);
    state.J = a.cwiseProduct(d) - b.cwiseProduct(c);
    if (!(state.J.minCoeff() > 0.0)) {
        throw GaugeDegeneracyError("Jacobian determinant is not positive (min J = " +
                                   std::to_string(state.J.minCoeff()) + ")");
    }
    state.cof(0, 0) = d;
    state.cof(0, 1) = -b;
    state.cof(1, 0) = -c;
    state.cof(1, 1) = a;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) state.A(i, j) = state.cof(i, j).cwiseQuotient(state.J);
    }
    return state;
}

GaugeState build_gauge(const HeightField& h, const DiskGrid& grid, double graph_floor)
{
    return deformation_tensors(harmonic_extend(h, grid, graph_floor));
}

BoundaryFrames boundary_frames(const HeightField& h, const GaugeState& state, const DiskGrid& grid)
{
    const int b = grid.boundary();
    BoundaryFrames f;
    f.N_x = grid.cos_theta().transpose();
    f.N_y = grid.sin_theta().transpose();
    f.tau_x = -f.N_y;
    f.tau_y = f.N_x;
    Eigen::VectorXd R = 1.0 + h.values.array();
    Eigen::VectorXd h_th = grid.ring_d_theta(h.values);
    f.metric = (R.array().square() + h_th.array().square()).sqrt();
    f.n_x = (R.cwiseProduct(f.N_x) - h_th.cwiseProduct(f.tau_x)).cwiseQuotient(f.metric);
    f.n_y = (R.cwiseProduct(f.N_y) - h_th.cwiseProduct(f.tau_y)).cwiseQuotient(f.metric);
    // n_tilde_i = A(k, i) N_k.
    Eigen::VectorXd A00 = state.A(0, 0).row(b).transpose(), A01 = state.A(0, 1).row(b).transpose();
    Eigen::VectorXd A10 = state.A(1, 0).row(b).transpose(), A11 = state.A(1, 1).row(b).transpose();
    f.nt_x = A00.cwiseProduct(f.N_x) + A10.cwiseProduct(f.N_y);
    f.nt_y = A01.cwiseProduct(f.N_x) + A11.cwiseProduct(f.N_y);
    f.R_J = R.cwiseQuotient(state.J.row(b).transpose());
    return f;
}

GaugeReport gauge_validity(const HeightField& h, const GaugeState& state, const DiskGrid& grid,
                           const GaugeThresholds& thresholds)
{
    GaugeReport rep;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double id = (i == j) ? 1.0 : 0.0;
            rep.grad_deviation_inf =
                std::max(rep.grad_deviation_inf, (state.grad_psi(i, j).array() - id).abs().maxCoeff());
            Field prod = state.A(i, 0).cwiseProduct(state.grad_psi(0, j)) + state.A(i, 1).cwiseProduct(state.grad_psi(1, j));
            rep.inverse_residual = std::max(rep.inverse_residual, (prod.array() - id).abs().maxCoeff());
        }
    }
    rep.min_j = state.J.minCoeff();
    const double h_norm = std::sqrt(grid.integrate_ring(h.values.cwiseProduct(h.values)));
    if (h_norm > 0.0) {
        Field dx = state.psi.x - grid.x1();
        Field dy = state.psi.y - grid.x2();
        double psi_norm = std::sqrt(grid.integrate(dx.cwiseProduct(dx) + dy.cwiseProduct(dy)));
        rep.psi_ratio = psi_norm / h_norm;
    }
    rep.pass = rep.min_j >= thresholds.min_j && rep.grad_deviation_inf <= thresholds.max_grad_deviation;
    return rep;
}

TensorGradient tensor_gradient(const TensorField& t, const DiskGrid& grid)
{
    TensorGradient g;
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            auto [gx, gy] = grid.gradient(t(k, i));
            g.c[k][i][0] = std::move(gx);
            g.c[k][i][1] = std::move(gy);
        }
    }
    return g;
}

} // namespace stefan
