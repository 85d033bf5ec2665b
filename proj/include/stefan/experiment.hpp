#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/radial_oracle.hpp"

namespace stefan {

struct RunResult {
    SimConfig config;
    GridPtr grid;
    std::shared_ptr<const EigenBasis> basis;
    InitialReport initial;
    double lambda1 = 0.0;
    double eta = 0.0;
    double beta = 0.0;
    long steps = 0;

    std::vector<DiagnosticsRecord> records;
    std::vector<TaylorSample> taylor;  // every step
    double enthalpy0 = 0.0;
    double max_enthalpy_drift = 0.0;   // max |H - H0| / H0 over steps
    double min_h_step = std::numeric_limits<double>::infinity();
    double max_h_deviation = 0.0;      // sup |h - h0|

    // Duhamel bookkeeping at record times.
    std::vector<double> duhamel_t;
    std::vector<double> duhamel_residual;
    std::vector<double> duhamel_residual_X;

    // Coefficient monitors at record times.
    OddsonRate oddson;
    double max_A_deviation = 0.0;
    std::vector<double> forcing_t, forcing_sup;

    // Barrier evaluation (barrier = true).
    KappaSelection kappa;
    double barrier_closed_form_error = 0.0;
    double barrier_max_over_run = -std::numeric_limits<double>::infinity();
    bool barrier_margin_holds = true;
    double kappa1 = 0.0;

    std::vector<AleSample> samples;        // kept for the radial comparison
    std::vector<std::pair<double, Field>> field_snapshots;
    std::optional<std::vector<RadialState>> radial;
    std::optional<CrossReport> cross;
    double radial_enthalpy_drift = 0.0;

    std::optional<std::string> failure;
    std::optional<SimState> failure_state;
    SimState final_state;
};

/// Runs the configured simulation with per-step monitors and records at the
/// snapshot stride. Step failures are caught and reported in `failure`.
RunResult run_simulation(const SimConfig& config);

/// Ordered key = value summary (fits, flip time, K, F(K), check.* table).
std::vector<std::pair<std::string, std::string>> build_summary(const RunResult& result);

/// Fixed-column CSV; a zero-length run yields the header only.
std::string timeseries_csv(const std::vector<DiagnosticsRecord>& records);
inline constexpr const char* kTimeseriesHeader =
    "t,chi,E_beta,D_low,E_trunc,D_trunc,q_L2,q_H4_surrogate,h_mean,h_max,min_dNqt,hopf_ratio,enthalpy";

/// Writes timeseries.csv, summary.txt, config.txt and snapshots into dir.
/// Throws IoError on failure.
void emit_outputs(const RunResult& result, const std::string& dir);

/// run_simulation + emit_outputs; returns 0 on success, 1 on solver failure,
/// 2 on I/O failure. Progress lines go to log.
int run_experiment(const SimConfig& config, std::ostream& log);

/// Binary field snapshot: 32-byte header (8-byte magic "STEFANF1", uint32
/// n_theta, uint32 n_r, uint32 dtype code 1 = float64, uint32 reserved,
/// float64 time) followed by n_r * n_theta little-endian float64 values,
/// row-major with rows radial.
void write_snapshot(const std::string& path, const Field& field, double t);
std::pair<Field, double> read_snapshot(const std::string& path);

} // namespace stefan
