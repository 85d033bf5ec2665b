#pragma once

#include "stefan/grid.hpp"

namespace stefan {

/// Boundary graph r = 1 + h(theta) sampled on the grid angles.
struct HeightField {
    Eigen::VectorXd values;
    double t = 0.0;

    static HeightField zero(const DiskGrid& grid) { return {Eigen::VectorXd::Zero(grid.n_theta()), 0.0}; }
};

/// Harmonic map Psi and its deformation tensors. grad_psi(i, j) = d Psi^i / d x_j,
/// A = grad_psi^{-1}, cof = J A.
struct GaugeState {
    VecField psi;
    TensorField grad_psi;
    TensorField A;
    TensorField cof;
    Field J;
    VecField psi_t;
    bool has_psi_t = false;
    double t = 0.0;
};

struct BoundaryFrames {
    Eigen::VectorXd N_x, N_y;
    Eigen::VectorXd tau_x, tau_y;
    Eigen::VectorXd n_x, n_y;
    Eigen::VectorXd nt_x, nt_y;
    Eigen::VectorXd metric;  // sqrt(R^2 + h_theta^2)
    Eigen::VectorXd R_J;     // R / J on the boundary
};

struct GaugeThresholds {
    double min_j = 0.2;
    double max_grad_deviation = 0.5;
};

struct GaugeReport {
    double grad_deviation_inf = 0.0;  // max |grad Psi - Id|
    double min_j = 1.0;
    double psi_ratio = 0.0;           // ||Psi - e||_0 / |h|_0 (0 when h = 0)
    double inverse_residual = 0.0;    // max |A grad Psi - Id|
    bool pass = true;
};

/// Psi with boundary value (1 + h) xi, harmonic in the disk, computed mode by
/// mode as r^m times the boundary Fourier coefficients. Also fills grad_psi
/// from the analytic radial factors. Throws GeometryError if 1 + h < floor.
GaugeState harmonic_extend(const HeightField& h, const DiskGrid& grid, double graph_floor = 0.2);

/// Fills A, J and cof from grad_psi. Throws GaugeDegeneracyError if J <= 0.
GaugeState deformation_tensors(GaugeState state);

/// harmonic_extend followed by deformation_tensors.
GaugeState build_gauge(const HeightField& h, const DiskGrid& grid, double graph_floor = 0.2);

BoundaryFrames boundary_frames(const HeightField& h, const GaugeState& state, const DiskGrid& grid);

GaugeReport gauge_validity(const HeightField& h, const GaugeState& state, const DiskGrid& grid,
                           const GaugeThresholds& thresholds = {});

/// Spatial gradient of each tensor entry: out[k][i][j] = d_j T(k, i).
struct TensorGradient {
    Field c[2][2][2];
};
TensorGradient tensor_gradient(const TensorField& t, const DiskGrid& grid);

} // namespace stefan
