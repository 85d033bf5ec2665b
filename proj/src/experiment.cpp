#include "stefan/experiment.hpp"

#include <cmath>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "stefan/bessel.hpp"
#include "stefan/error.hpp"

namespace stefan {

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string flag(bool b) { return b ? "true" : "false"; }

InitialSpec initial_spec(const SimConfig& c)
{
    InitialSpec s;
    s.q0_modes = c.q0_modes;
    s.epsilon = c.epsilon;
    s.h0_modes = c.h0_modes;
    s.compatibility = c.compatibility_mode;
    s.validation = c.validation;
    s.taylor_floor = c.taylor_floor;
    s.positivity_tol = c.positivity_tol;
    s.enforce_tol = c.enforce_tol;
    s.graph_floor = c.graph_floor;
    return s;
}

GaugeState previous_gauge(const SimState& s)
{
    GaugeState g;
    g.A = s.prev->A;
    g.psi_t = s.prev->psi_t;
    g.has_psi_t = true;
    return g;
}

VariableCoefficients rate_of(const VariableCoefficients& now, const VariableCoefficients& before, double dt)
{
    VariableCoefficients r;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) r.a(i, j) = (now.a(i, j) - before.a(i, j)) / dt;
    }
    r.a(0, 0).array() += 1.0;
    r.a(1, 1).array() += 1.0;
    r.b.x = (now.b.x - before.b.x) / dt;
    r.b.y = (now.b.y - before.b.y) / dt;
    return r;
}

struct OddsonAccumulator {
    bool any = false;
    double alpha = 0.0, k0 = 0.0, beta = 0.0;

    void add(const OddsonRate& r)
    {
        if (!any) {
            alpha = r.alpha;
            k0 = r.k0;
            beta = r.beta_drift;
            any = true;
            return;
        }
        alpha = std::min(alpha, r.alpha);
        k0 = std::min(k0, r.k0);
        beta = std::max(beta, r.beta_drift);
    }

    OddsonRate finish() const
    {
        OddsonRate r;
        if (!any) return r;
        r.alpha = alpha;
        r.k0 = k0;
        r.beta_drift = beta;
        r.mu = (beta + 1.0) / (2.0 * alpha) - 1.0;
        r.xi0 = bessel_zero(r.mu, 1);
        r.lambda = alpha * r.xi0 * r.xi0 / k0;
        return r;
    }
};

std::vector<RadialState> radial_reference(const SimConfig& c, const RunResult& res)
{
    if (c.compatibility_mode != CompatibilityMode::report) {
        throw PreconditionError("radial oracle needs unmodified eigenmode initial data");
    }
    double h_const = 0.0;
    for (const auto& hm : c.h0_modes) {
        if (hm.m != 0 || hm.sin_coeff != 0.0) throw PreconditionError("radial oracle needs a circular initial boundary");
        h_const += hm.cos_coeff;
    }
    Eigen::VectorXd s = radial_nodes(c.radial_n_s);
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(s.size());
    for (const auto& mc : c.q0_modes) {
        if (mc.m != 0) throw PreconditionError("radial oracle needs radially symmetric initial temperature");
        EigenMode mode = make_mode(0, mc.k, Parity::cosine);
        for (int i = 0; i < s.size(); ++i) p0(i) += c.epsilon * mc.value * mode.value(s(i), 0.0);
    }
    p0(s.size() - 1) = 0.0;
    RadialOptions opt;
    opt.n_s = c.radial_n_s;
    opt.dt = c.radial_dt;
    opt.t_end = res.steps * c.dt;
    double ratio = c.snapshot_stride * c.dt / c.radial_dt;
    opt.stride = static_cast<int>(std::llround(ratio));
    if (opt.stride < 1 || std::abs(ratio - opt.stride) > 1e-6 * ratio) {
        throw DomainError("snapshot interval must be an integer multiple of radial_dt");
    }
    return solve_radial(p0, 1.0 + h_const, opt);
}

} // namespace

RunResult run_simulation(const SimConfig& cfg)
{
    validate_config(cfg);
    RunResult res;
    res.config = cfg;
    res.grid = make_grid(cfg.n_theta, cfg.n_r);
    res.basis = std::make_shared<const EigenBasis>(dirichlet_eigenbasis(cfg.n_modes, res.grid));
    const EigenBasis& basis = *res.basis;
    const DiskGrid& g = *res.grid;
    res.lambda1 = basis.lambda(0);
    res.eta = cfg.eta < 0.0 ? 0.1 * res.lambda1 : cfg.eta;
    res.beta = 2.0 * res.lambda1 - res.eta;

    InitialData init = build_initial_data(initial_spec(cfg), basis);
    res.initial = init.report;

    StepperOptions so;
    so.dt = cfg.dt;
    so.frozen_gauge = cfg.frozen_gauge;
    so.graph_floor = cfg.graph_floor;
    so.min_j = cfg.gauge_min_j;
    Stepper stepper(res.grid, so);

    SimState s = init.state;
    stepper.finalize(s);
    const Eigen::VectorXd h0 = s.h.values;
    const bool identity_frozen = cfg.frozen_gauge && h0.cwiseAbs().maxCoeff() == 0.0;

    DiagnosticsOptions dopt;
    dopt.beta = res.beta;
    dopt.energy_order = cfg.energy_order;
    dopt.energy_time_order = cfg.energy_time_order;
    dopt.stencil_width = cfg.stencil_width;
    dopt.compute_energy = cfg.compute_energy;

    DuhamelTracker tracker(basis, init.report.coeffs);
    std::optional<VariableCoefficients> coeff_prev;
    OddsonAccumulator oddson;
    if (cfg.barrier) res.kappa = select_kappa2(basis);

    res.enthalpy0 = enthalpy(s, g);
    res.steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));

    auto coefficients = [&](const SimState& st) {
        return identity_frozen ? identity_coefficients(g) : variable_coefficients(st.gauge, g);
    };
    auto taylor_sample = [&](const SimState& st) {
        Eigen::VectorXd dnqt = g.boundary_d_r_one_sided(st.q_t, cfg.stencil_width);
        Eigen::VectorXd dnq = g.boundary_d_r_one_sided(st.q.values, cfg.stencil_width);
        double ratio = 0.0;
        for (int l = 0; l < dnq.size(); ++l) {
            if (dnq(l) != 0.0) ratio = std::max(ratio, std::abs(dnqt(l) / dnq(l)));
        }
        res.taylor.push_back({st.t, dnqt.minCoeff(), ratio});
    };
    auto record = [&](const SimState& st) {
        res.records.push_back(record_diagnostics(st, stepper, basis, dopt));
        if (cfg.duhamel && tracker.covers(st.t)) {
            DuhamelSplit split = tracker.split(st.t, st.q_t);
            res.duhamel_t.push_back(st.t);
            res.duhamel_residual.push_back(split.residual);
            res.duhamel_residual_X.push_back(split.residual_X);
        }
        VariableCoefficients c = coefficients(st);
        oddson.add(oddson_rate({c}, g));
        res.max_A_deviation = std::max(res.max_A_deviation, identity_frozen ? 0.0 : tensor_deviation_2norm(st.gauge.A));
        if (st.prev && !identity_frozen) {
            VariableCoefficients before = variable_coefficients(previous_gauge(st), g);
            Field forcing = coefficient_deviation(rate_of(c, before, st.t - st.prev->t), st.q.values, g);
            res.forcing_t.push_back(st.t);
            res.forcing_sup.push_back(forcing.cwiseAbs().maxCoeff());
        }
        if (cfg.barrier && res.kappa.found) {
            BarrierParams bp;
            bp.kappa1 = 1.0;
            bp.kappa2 = res.kappa.kappa2;
            BarrierResult br = barrier_residual(bp, c, basis, st.t, res.kappa.C1);
            double scale = std::exp(-1.5 * res.lambda1 * st.t);
            res.barrier_max_over_run = std::max(res.barrier_max_over_run, br.max_value / scale);
            res.barrier_closed_form_error = std::max(res.barrier_closed_form_error, br.closed_form_error / scale);
            res.barrier_margin_holds = res.barrier_margin_holds && br.below_margin;
        }
        if (cfg.radial_oracle) res.samples.push_back({st.t, st.h.values, st.q.values});
        if (cfg.write_fields) res.field_snapshots.emplace_back(st.t, st.q.values);
    };

    if (res.steps > 0) {
        record(s);
        taylor_sample(s);
    }
    for (long n = 1; n <= res.steps; ++n) {
        SimState next;
        try {
            next = stepper.advance(s);
        } catch (const StepFailure& e) {
            res.failure = e.what();
            res.failure_state = e.last_good();
            break;
        }
        res.min_h_step = std::min(res.min_h_step, (next.h.values - s.h.values).minCoeff());
        res.max_h_deviation = std::max(res.max_h_deviation, (next.h.values - h0).cwiseAbs().maxCoeff());
        res.max_enthalpy_drift =
            std::max(res.max_enthalpy_drift, std::abs(enthalpy(next, g) - res.enthalpy0) / std::abs(res.enthalpy0));
        taylor_sample(next);

        if (cfg.duhamel) {
            if (identity_frozen) {
                tracker.push(next.t, g.zeros());
            } else {
                if (!coeff_prev) {
                    auto [gx, gy] = g.gradient(s.q.values);
                    VecField w = cfg.frozen_gauge ? VecField{g.zeros(), g.zeros()} : next.gauge.psi_t;
                    tracker.set_initial_velocity_term(Field(gx.cwiseProduct(w.x) + gy.cwiseProduct(w.y)));
                    coeff_prev = variable_coefficients(s.gauge, w, g);
                }
                VariableCoefficients now = variable_coefficients(next.gauge, g);
                tracker.push(next.t, duhamel_nonlinearity(now, *coeff_prev, cfg.dt, next.q.values, next.q_t, g));
                coeff_prev = std::move(now);
            }
        }
        s = std::move(next);
        if (n % cfg.snapshot_stride == 0 || n == res.steps) record(s);
    }
    res.final_state = s;
    res.oddson = oddson.finish();
    if (res.min_h_step == std::numeric_limits<double>::infinity()) res.min_h_step = 0.0;

    if (cfg.barrier && res.kappa.found && res.initial.c1 > 0.0 && cfg.epsilon > 0.0 && !res.forcing_t.empty()) {
        double C2 = fit_forcing_constant(res.forcing_t, res.forcing_sup, res.initial.c1, cfg.epsilon, res.beta);
        res.kappa1 = C2 / res.kappa.C1 * res.initial.c1 * cfg.epsilon;
    }
    if (cfg.radial_oracle && !res.failure) {
        res.radial = radial_reference(cfg, res);
        res.cross = cross_compare(res.samples, *res.radial, g);
        double H0 = radial_enthalpy(res.radial->front());
        for (const auto& st : *res.radial) {
            res.radial_enthalpy_drift = std::max(res.radial_enthalpy_drift, std::abs(radial_enthalpy(st) - H0) / H0);
        }
    }
    return res;
}

std::vector<std::pair<std::string, std::string>> build_summary(const RunResult& r)
{
    std::vector<std::pair<std::string, std::string>> out;
    auto put = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
    const SimConfig& c = r.config;
    put("preset", c.preset);
    put("status", r.failure ? "failed" : "ok");
    if (r.failure) put("failure", *r.failure);
    put("steps", std::to_string(r.steps));
    put("t_final", num(r.final_state.t));
    put("lambda1", num(r.lambda1));
    put("eta", num(r.eta));
    put("beta", num(r.beta));
    put("energy_order", std::to_string(c.energy_order));
    put("energy_time_order", std::to_string(c.energy_time_order));

    const InitialReport& ini = r.initial;
    put("initial.c1", num(ini.c1));
    put("initial.positivity_margin", num(ini.positivity_margin));
    put("initial.taylor_margin", num(ini.taylor_margin));
    put("initial.positivity_ok", flag(ini.positivity_ok));
    put("initial.taylor_ok", flag(ini.taylor_ok));
    put("initial.r1_max", num(ini.residuals.r1_max));
    put("initial.r2_max", num(ini.residuals.r2_max));
    put("K", num(ini.K));
    double T_K = ini.K > 1.0 ? c.c_bar * std::log(ini.K) : 0.0;
    put("T_K", num(T_K));
    put("log10_F_K", ini.K > 1.0 ? num(log10_F(ini.K, c.F_C, c.c_bar, r.lambda1)) : "undefined");

    // Decay fit of ||q||_0^2.
    std::vector<double> t, q2, chi;
    for (const auto& rec : r.records) {
        t.push_back(rec.t);
        q2.push_back(rec.q_L2 * rec.q_L2);
        chi.push_back(rec.chi);
    }
    double fit_b = c.fit_t_b < 0.0 ? r.final_state.t : c.fit_t_b;
    std::optional<double> exponent;
    try {
        exponent = fit_decay_exponent(t, q2, c.fit_t_a, fit_b);
    } catch (const DomainError&) {
    }
    put("fit.window", num(c.fit_t_a) + "," + num(fit_b));
    put("fit.q_L2_sq_exponent", exponent ? num(*exponent) : "undefined");
    put("fit.two_lambda1", num(2.0 * r.lambda1));

    bool chi_positive = !r.records.empty();
    double chi_min = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.records) {
        chi_positive = chi_positive && rec.chi > 0.0;
        chi_min = std::min(chi_min, rec.chi);
    }
    put("chi_min", r.records.empty() ? "undefined" : num(chi_min));
    put("chi_positive", flag(chi_positive));

    // Hopf envelope e^{(lambda1 + eta/2) t} chi(t) relative to its value at t = 0.1.
    std::optional<double> env_ref;
    double env_min = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.records) {
        double e = std::exp((r.lambda1 + 0.5 * r.eta) * rec.t) * rec.chi;
        env_min = std::min(env_min, e);
        if (!env_ref && rec.t >= 0.1 - 1e-12) env_ref = e;
    }
    put("hopf_envelope_ratio", env_ref ? num(env_min / *env_ref) : "undefined");

    TaylorReport tr = taylor_sign_monitor(r.taylor, std::max(ini.K, 1.0 + 1e-12), c.c_bar, r.eta);
    put("sign_flip_time", tr.t_star ? num(*tr.t_star) : "none");
    put("sign_flip_starts_negative", flag(tr.starts_negative));
    put("sign_flip_persists", flag(tr.persists));
    auto predicted = ini.zero_data ? std::nullopt : series_flip_time(ini.coeffs, *r.basis, std::max(r.final_state.t, 1e-3));
    put("sign_flip_series_prediction", predicted ? num(*predicted) : "none");
    put("hopf_C", num(tr.hopf_C));
    put("hopf_bound_holds", flag(tr.hopf_bound_holds));

    double E0 = r.records.empty() ? 0.0 : r.records.front().E_beta;
    double Esup = 0.0;
    for (const auto& rec : r.records) Esup = std::max(Esup, rec.E_beta);
    put("E_beta_sup_ratio", E0 > 0.0 ? num(Esup / E0) : "undefined");

    put("enthalpy_drift", num(r.max_enthalpy_drift));
    put("h_min_step", num(r.min_h_step));
    put("h_sup_deviation", num(r.max_h_deviation));
    put("h_final_mean", num(r.final_state.h.values.mean()));

    put("oddson.alpha", num(r.oddson.alpha));
    put("oddson.k0", num(r.oddson.k0));
    put("oddson.beta_drift", num(r.oddson.beta_drift));
    put("oddson.mu", num(r.oddson.mu));
    put("oddson.lambda", num(r.oddson.lambda));
    put("max_A_deviation", num(r.max_A_deviation));

    double dres = 0.0, dresX = 0.0;
    for (std::size_t i = 0; i < r.duhamel_t.size(); ++i) {
        dres = std::max(dres, r.duhamel_residual[i]);
        dresX = std::max(dresX, r.duhamel_residual_X[i]);
    }
    if (c.duhamel) {
        put("duhamel.max_residual", num(dres));
        put("duhamel.max_residual_X", num(dresX));
    }
    if (c.barrier) {
        put("barrier.kappa2", num(r.kappa.kappa2));
        put("barrier.C1", num(r.kappa.C1));
        put("barrier.kappa1", num(r.kappa1));
        put("barrier.max_scaled_residual", num(r.barrier_max_over_run));
        put("barrier.closed_form_error", num(r.barrier_closed_form_error));
    }
    if (r.cross) {
        put("radial.max_radius_diff", num(r.cross->max_radius_diff));
        put("radial.max_profile_diff", num(r.cross->max_profile_diff));
        put("radial.enthalpy_drift", num(r.radial_enthalpy_drift));
    }

    // Check table.
    put("check.chi_positive", chi_positive ? "pass" : "fail");
    if (!c.frozen_gauge) put("check.enthalpy_drift", r.max_enthalpy_drift <= c.enthalpy_tol ? "pass" : "fail");
    if (E0 > 0.0) put("check.bootstrap_energy", Esup <= c.bootstrap_c * E0 ? "pass" : "fail");
    put("check.sign_flip_present", tr.t_star ? "pass" : "fail");
    if (c.frozen_gauge && exponent) {
        put("check.decay_exponent", std::abs(*exponent - 2.0 * r.lambda1) <= 0.01 * 2.0 * r.lambda1 ? "pass" : "fail");
    }
    if (r.cross) {
        put("check.radial_radius_diff", r.cross->max_radius_diff <= 1e-3 ? "pass" : "fail");
        put("check.radial_enthalpy_drift", r.radial_enthalpy_drift <= c.enthalpy_tol ? "pass" : "fail");
    }
    if (c.barrier) {
        put("check.barrier_identity_negative", r.kappa.found ? "pass" : "fail");
        put("check.barrier_margin", r.barrier_margin_holds ? "pass" : "fail");
    }
    put("check.run_completed", r.failure ? "fail" : "pass");
    return out;
}

std::string timeseries_csv(const std::vector<DiagnosticsRecord>& records)
{
    std::string out = std::string(kTimeseriesHeader) + "\n";
    for (const auto& r : records) {
        const double v[] = {r.t,    r.chi,  r.E_beta, r.D_low,    r.E_trunc,  r.D_trunc,    r.q_L2,
                            r.q_H4, r.h_mean, r.h_max, r.min_dNqt, r.hopf_ratio, r.enthalpy};
        for (std::size_t i = 0; i < std::size(v); ++i) {
            if (i) out += ",";
            out += num(v[i]);
        }
        out += "\n";
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + p.string());
}

constexpr char kMagic[8] = {'S', 'T', 'E', 'F', 'A', 'N', 'F', '1'};

} // namespace

void write_snapshot(const std::string& path, const Field& field, double t)
{
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native != std::endian::little) {
        throw IoError("snapshot writer supports little-endian hosts only");
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::uint32_t dims[4] = {static_cast<std::uint32_t>(field.cols()), static_cast<std::uint32_t>(field.rows()), 1u, 0u};
    f.write(kMagic, 8);
    f.write(reinterpret_cast<const char*>(dims), sizeof dims);
    f.write(reinterpret_cast<const char*>(&t), 8);
    for (int i = 0; i < field.rows(); ++i) {
        for (int l = 0; l < field.cols(); ++l) {
            double v = field(i, l);
            f.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!f) throw IoError("write failed for " + path);
}

std::pair<Field, double> read_snapshot(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[8];
    std::uint32_t dims[4];
    double t;
    f.read(magic, 8);
    f.read(reinterpret_cast<char*>(dims), sizeof dims);
    f.read(reinterpret_cast<char*>(&t), 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad snapshot header in " + path);
    if (dims[2] != 1u) throw IoError("unsupported snapshot dtype code " + std::to_string(dims[2]));
    Field field(dims[1], dims[0]);
    for (int i = 0; i < field.rows(); ++i) {
        for (int l = 0; l < field.cols(); ++l) f.read(reinterpret_cast<char*>(&field(i, l)), 8);
    }
    if (!f) throw IoError("truncated snapshot " + path);
    return {field, t};
}

void emit_outputs(const RunResult& r, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    write_text(fs::path(dir) / "timeseries.csv", timeseries_csv(r.records));
    std::string summary;
    for (const auto& [k, v] : build_summary(r)) summary += k + " = " + v + "\n";
    write_text(fs::path(dir) / "summary.txt", summary);
    write_text(fs::path(dir) / "config.txt", echo_config(r.config));
    if (!r.field_snapshots.empty()) {
        fs::create_directories(fs::path(dir) / "snapshots", ec);
        if (ec) throw IoError("cannot create snapshot directory: " + ec.message());
        for (std::size_t i = 0; i < r.field_snapshots.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "q_%06zu.bin", i);
            write_snapshot((fs::path(dir) / "snapshots" / name).string(), r.field_snapshots[i].second,
                           r.field_snapshots[i].first);
        }
    }
    if (r.failure_state) {
        write_snapshot((fs::path(dir) / "failure_q.bin").string(), r.failure_state->q.values, r.failure_state->t);
        Field h(1, r.failure_state->h.values.size());
        h.row(0) = r.failure_state->h.values.transpose();
        write_snapshot((fs::path(dir) / "failure_h.bin").string(), h, r.failure_state->t);
    }
}

int run_experiment(const SimConfig& config, std::ostream& log)
{
    RunResult result;
    try {
        result = run_simulation(config);
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        emit_outputs(result, config.output_dir);
    } catch (const IoError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
    log << "wrote " << result.records.size() << " records to " << config.output_dir << "\n";
    if (result.failure) {
        log << "solver failure: " << *result.failure << "\n";
        return 1;
    }
    return 0;
}

} // namespace stefan
