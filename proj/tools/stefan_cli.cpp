// Command-line front end: run configs and presets, list presets, quick checks.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "stefan/bessel.hpp"
#include "stefan/config.hpp"
#include "stefan/diagnostics.hpp"
#include "stefan/error.hpp"
#include "stefan/experiment.hpp"
#include "stefan/gauge.hpp"
#include "stefan/radial_oracle.hpp"

using namespace stefan;

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void apply_env_out(SimConfig& cfg)
{
    if (const char* env = std::getenv("STEFAN_OUT"); env && *env) cfg.output_dir = env;
}

struct Check {
    const char* name;
    std::function<bool(std::string&)> body;
};

int run_checks()
{
    std::vector<Check> checks = {
        {"bessel_zero",
         [](std::string& d) {
             double z = bessel_zero(0.0, 1);
             d = fmt(std::abs(bessel_j_series(0.0, z)));
             return std::abs(z - 2.404825557695773) < 1e-12;
         }},
        {"harmonic_extension_cos3",
         [](std::string& d) {
             auto grid = make_grid(16, 12);
             HeightField h{Eigen::VectorXd(grid->n_theta()), 0.0};
             for (int l = 0; l < grid->n_theta(); ++l) h.values(l) = 0.02 * std::cos(3 * grid->theta(l));
             GaugeState g = harmonic_extend(h, *grid);
             double err = 0.0;
             for (int i = 0; i < grid->n_r(); ++i) {
                 for (int l = 0; l < grid->n_theta(); ++l) {
                     double r = grid->r(i), th = grid->theta(l);
                     double ex = r * std::cos(th) + 0.01 * (std::pow(r, 4) * std::cos(4 * th) + r * r * std::cos(2 * th));
                     double ey = r * std::sin(th) + 0.01 * (std::pow(r, 4) * std::sin(4 * th) - r * r * std::sin(2 * th));
                     err = std::max({err, std::abs(g.psi.x(i, l) - ex), std::abs(g.psi.y(i, l) - ey)});
                 }
             }
             d = fmt(err);
             return err <= 1e-10;
         }},
        {"oddson_identity",
         [](std::string& d) {
             auto grid = make_grid(16, 12);
             OddsonRate r = oddson_rate({identity_coefficients(*grid)}, *grid);
             double target = std::pow(bessel_zero(0.0, 1), 2);
             d = "mu=" + fmt(r.mu) + " lambda=" + fmt(r.lambda);
             return std::abs(r.mu) <= 1e-10 && std::abs(r.lambda - target) <= 1e-10 * target;
         }},
        {"gram_identity",
         [](std::string& d) {
             auto grid = make_grid(32, 24);
             EigenBasis b = dirichlet_eigenbasis(8, grid);
             double err = 0.0;
             for (int i = 0; i < b.size(); ++i) {
                 for (int j = 0; j < b.size(); ++j) {
                     err = std::max(err, std::abs(grid->inner(b.field(i), b.field(j)) - (i == j ? 1.0 : 0.0)));
                 }
             }
             d = fmt(err);
             return err <= 1e-6;
         }},
        {"radial_equilibrium",
         [](std::string& d) {
             RadialOptions o;
             o.n_s = 50;
             o.dt = 1e-3;
             o.t_end = 0.1;
             auto series = solve_radial(Eigen::VectorXd::Zero(51), 1.0, o);
             double dev = std::abs(series.back().R - 1.0);
             d = fmt(dev);
             return dev == 0.0;
         }},
        {"empty_config_defaults",
         [](std::string& d) {
             bool same = echo_config(parse_config("")) == echo_config(preset_config("frozen-heat"));
             d = same ? "frozen-heat" : "mismatch";
             return same;
         }},
        {"snapshot_roundtrip",
         [](std::string& d) {
             Field f = Field::Random(5, 7);
             auto path = (std::filesystem::temp_directory_path() / "stefan_check_snapshot.bin").string();
             write_snapshot(path, f, 0.25);
             auto [g, t] = read_snapshot(path);
             std::filesystem::remove(path);
             bool ok = t == 0.25 && g.rows() == 5 && g.cols() == 7 && (g.array() == f.array()).all();
             d = ok ? "bit-identical" : "mismatch";
             return ok;
         }},
    };
    int failed = 0;
    for (const auto& c : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.body(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << " (" << detail << ")\n";
        failed += ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stefan problem simulator on near-circular domains"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a configuration file");
    run->add_option("config", config_path, "path to a key = value config")->required();

    std::string preset_name, out_dir;
    auto* preset = app.add_subcommand("preset", "run a named preset");
    preset->add_option("name", preset_name, "preset name")->required();
    preset->add_option("--out", out_dir, "output directory");

    auto* list = app.add_subcommand("list-presets", "print preset names");
    auto* check = app.add_subcommand("check", "run the fast invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& n : preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (*check) return run_checks();
        SimConfig cfg;
        if (*run) {
            std::ifstream f(config_path);
            if (!f) {
                std::cerr << "error: cannot read " << config_path << "\n";
                return 2;
            }
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = parse_config(ss.str());
        } else {
            cfg = preset_config(preset_name);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
        }
        apply_env_out(cfg);
        return run_experiment(cfg, std::cerr);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
