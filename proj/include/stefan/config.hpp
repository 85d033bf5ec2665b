#pragma once

#include <string>
#include <vector>

#include "stefan/solver.hpp"

namespace stefan {

/// Run configuration. Every field has a default; an empty config text gives
/// the frozen-heat preset.
struct SimConfig {
    std::string preset = "frozen-heat";

    int n_theta = 64;
    int n_r = 64;
    double dt = 1e-4;
    double t_end = 1.0;
    int snapshot_stride = 50;
    int n_modes = 16;

    std::vector<ModeCoefficient> q0_modes{{0, 1, Parity::cosine, 1.0}};
    double epsilon = 1.0;
    std::vector<HeightMode> h0_modes;
    CompatibilityMode compatibility_mode = CompatibilityMode::report;
    ValidationMode validation = ValidationMode::strict;

    double eta = -1.0;  // negative: 0.1 * lambda1
    double c_bar = 2.0;
    double bootstrap_c = 10.0;
    double F_C = 1.0;   // the unquantified C in F(K)
    double graph_floor = 0.2;
    double gauge_min_j = 0.2;
    double enthalpy_tol = 1e-4;
    double enforce_tol = 1e-9;
    double positivity_tol = 1e-8;
    double taylor_floor = 0.1;

    bool frozen_gauge = true;
    int energy_order = 4;
    int energy_time_order = 1;
    bool compute_energy = true;
    bool duhamel = true;
    int stencil_width = 5;

    double fit_t_a = 0.1;
    double fit_t_b = -1.0;  // negative: t_end

    bool radial_oracle = false;
    int radial_n_s = 400;
    double radial_dt = 2.5e-6;

    bool barrier = false;

    std::string output_dir = "out";
    bool write_fields = false;
};

/// Names accepted by `preset = ...`, in display order.
const std::vector<std::string>& preset_names();

/// Defaults of a named preset; throws DomainError for unknown names.
SimConfig preset_config(const std::string& name);

/// Parses key = value lines ('#' starts a comment). A preset key, wherever it
/// appears, is applied first and the remaining keys override it.
SimConfig parse_config(const std::string& text);

/// Effective configuration in the same format, one line per key, in a fixed
/// order; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const SimConfig& config);

/// Range checks shared by the parser and programmatic construction.
void validate_config(const SimConfig& config);

} // namespace stefan
