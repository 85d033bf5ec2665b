#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stefan/grid.hpp"

namespace stefan {

/// Radially symmetric Stefan state in front-fixed coordinates s = r / R.
struct RadialState {
    double t = 0.0;
    double R = 1.0;
    Eigen::VectorXd p;  // on the uniform grid s_i = i / n, i = 0..n
};

struct RadialOptions {
    int n_s = 400;
    double dt = 2.5e-6;
    double t_end = 1.0;
    int stride = 10;                // store every stride-th step
    double reversal_tol = 1e-10;    // allowed negative front speed
};

Eigen::VectorXd radial_nodes(int n_s);

/// Landau-transformed solve of p_t = R^-2 (p_ss + p_s / s) + s (R'/R) p_s with
/// R' = -p_s(1) / R; backward Euler diffusion with explicit front terms.
std::vector<RadialState> solve_radial(const Eigen::VectorXd& p0, double R0, const RadialOptions& options);

/// 2 pi R^2 int p s ds + pi R^2 (trapezoid in s).
double radial_enthalpy(const RadialState& state);
/// ||p||_0^2 over the physical disk of radius R.
double radial_l2_squared(const RadialState& state);

struct AleSample {
    double t = 0.0;
    Eigen::VectorXd h;
    Field q;
};

struct CrossReport {
    std::vector<double> t;
    std::vector<double> radius_diff;
    std::vector<double> profile_diff;
    double max_radius_diff = 0.0;
    double max_profile_diff = 0.0;
};

/// Matches ALE samples to radial states of equal time and compares the mean
/// radius and the temperature profile. Throws PreconditionError unless every
/// ALE height is constant in theta (to 1e-8).
CrossReport cross_compare(const std::vector<AleSample>& ale, const std::vector<RadialState>& radial, const DiskGrid& grid);

} // namespace stefan
