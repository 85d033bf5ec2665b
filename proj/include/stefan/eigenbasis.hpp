#pragma once

#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

enum class Parity { cosine, sine };

/// Dirichlet eigenfunction norm_factor * J_m(zero * r) * {cos, sin}(m theta)
/// of the unit disk, with eigenvalue zero^2.
struct EigenMode {
    int m = 0;
    int k = 1;
    Parity parity = Parity::cosine;
    double zero = 0.0;
    double lambda = 0.0;
    double norm_factor = 0.0;

    double value(double r, double theta) const;
    /// d/dr at r = 1.
    double boundary_dr(double theta) const;
    /// Nodal samples with the boundary ring set exactly to zero.
    Field sample(const DiskGrid& grid) const;
};

/// Builds a single mode; throws DomainError for sine with m = 0.
EigenMode make_mode(int m, int k, Parity parity);

/// Lowest n mode descriptors in eigenvalue order, ties broken by (m, k,
/// parity) with cosine first. Grid independent.
std::vector<EigenMode> lowest_modes(int n_modes);

class EigenBasis {
public:
    EigenBasis(GridPtr grid, std::vector<EigenMode> modes);

    int size() const noexcept { return static_cast<int>(modes_.size()); }
    const EigenMode& mode(int j) const { return modes_.at(j); }
    const std::vector<EigenMode>& modes() const noexcept { return modes_; }
    const Field& field(int j) const { return fields_.at(j); }
    double lambda(int j) const { return modes_.at(j).lambda; }
    const DiskGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }

    /// Index of mode (m, k, parity), or -1 when absent.
    int index_of(int m, int k, Parity parity) const;

    /// Sum_j c_j phi_j over the leading coeffs.size() modes.
    Field synthesize(const std::vector<double>& coeffs) const;

private:
    GridPtr grid_;
    std::vector<EigenMode> modes_;
    std::vector<Field> fields_;
};

/// Lowest n_modes Dirichlet eigenpairs sampled on grid. Throws
/// ResolutionError unless n_theta >= 4 max m and n_r >= 2 max k.
EigenBasis dirichlet_eigenbasis(int n_modes, GridPtr grid);

/// c_j = int q phi_j dx.
std::vector<double> project_coeffs(const Field& q, const EigenBasis& basis);

/// (sum_j (1 + lambda_j)^s c_j^2)^(1/2) over the basis.
double sobolev_norm(const Field& q, double s, const EigenBasis& basis);
double sobolev_norm_from_coeffs(const std::vector<double>& c, double s, const EigenBasis& basis);

/// ||q0||_4 / ||q0||_0; throws DegenerateInputError for q0 = 0.
double ratio_K(const Field& q0, const EigenBasis& basis);
double ratio_K_from_coeffs(const std::vector<double>& c, const EigenBasis& basis);

} // namespace stefan
