#pragma once

// Parameter sweeps along one axis (eps, m or dt) run as independent jobs on a
// small worker pool, followed by pairwise differences and a log-log fit.

#include "tumorsim/config.hpp"
#include "tumorsim/run.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace tumorsim {

enum class SweepAxis { eps, m, dt };

inline SweepAxis parse_axis(const std::string& s)
{
    if (s == "eps") {
        return SweepAxis::eps;
    }
    if (s == "m") {
        return SweepAxis::m;
    }
    if (s == "dt") {
        return SweepAxis::dt;
    }
    throw std::invalid_argument("unknown sweep axis '" + s + "' (expected eps, m or dt)");
}

inline const char* axis_name(SweepAxis a)
{
    switch (a) {
    case SweepAxis::eps:
        return "eps";
    case SweepAxis::m:
        return "m";
    default:
        return "dt";
    }
}

struct SweepRun {
    double value = 0.0;
    RunConfig config;  // the resolved configuration of this run
    bool ok = false;
    std::string error;
    long abort_step = -1;
    RunSummary summary;
    std::optional<State> final_state;
    DiagRecord final_diag;
    double diff_prev = NAN;  // L2 distance of the final state to the previous run's
};

struct ConvergenceReport {
    SweepAxis axis = SweepAxis::eps;
    std::vector<SweepRun> runs;
    std::string fit_quantity;  // what was fitted against the axis value
    SlopeFit fit;
    std::string note;  // set when there are too few points to fit

    bool all_ok() const
    {
        return std::all_of(runs.begin(), runs.end(), [](const SweepRun& r) { return r.ok; });
    }
};

/// Worker count: hardware concurrency, capped by TUMORSIM_THREADS and by the job count.
inline unsigned worker_count(std::size_t jobs)
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TUMORSIM_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) {
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        }
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Configuration for one value on an axis. On the m axis the grid is raised to
/// the dealiasing minimum.
inline RunConfig sweep_config(const RunConfig& base, SweepAxis axis, double value)
{
    RunConfig c = base;
    switch (axis) {
    case SweepAxis::eps:
        c.model.eps = value;
        break;
    case SweepAxis::m: {
        const int m = static_cast<int>(std::lround(value));
        if (m < 1 || std::abs(value - m) > 1e-9) {
            throw ConfigError("basis.m", "sweep values on the m axis must be positive integers");
        }
        c.basis.modes = m;
        c.basis.grid = std::max(c.basis.grid, BasisSpec::min_grid(m));
        break;
    }
    case SweepAxis::dt:
        c.scheme.dt = value;
        break;
    }
    if (!(value > 0)) {
        throw ConfigError(axis_name(axis), "sweep values must be positive");
    }
    return c;
}

inline std::string sweep_run_dir_name(SweepAxis axis, std::size_t index, double value)
{
    return "run_" + std::to_string(index) + "_" + axis_name(axis) + "_" + format_shortest(value);
}

struct SweepOptions {
    std::filesystem::path out_dir;  // empty: keep results in memory only
    std::filesystem::path base_dir = std::filesystem::current_path();  // for relative snapshot paths
};

inline void run_one(SweepRun& r, SweepAxis axis, std::size_t index, const SweepOptions& opt)
{
    try {
        const Model m = build_model(r.config);
        const State s0 = build_initial_state(r.config, m, opt.base_dir);
        RunOptions ro;
        ro.keep_states = false;
        std::optional<DiagCsvWriter> csv;
        std::filesystem::path dir;
        if (!opt.out_dir.empty()) {
            dir = opt.out_dir / sweep_run_dir_name(axis, index, r.value);
            std::filesystem::create_directories(dir);
            csv.emplace(dir / "diagnostics.csv");
            ro.on_sample = [&](const Sample& smp) { csv->write(smp.diag); };
        }
        Trajectory tr = run(m, s0, effective_scheme(r.config), ro);
        r.summary = tr.summary;
        r.final_diag = tr.samples.empty() ? DiagRecord{} : tr.samples.back().diag;
        if (tr.abort) {
            r.error = tr.abort->reason;
            r.abort_step = tr.abort->step;
            return;
        }
        r.final_state = tr.final_state();
        if (!dir.empty()) {
            write_state_snapshot(dir, tr.samples.back().step, m.basis, *r.final_state);
        }
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
}

/// Runs the base configuration at each value, in parallel, and fits the
/// axis-specific quantity: time-max dist_theta_L2 against eps, successive
/// final-state differences against m or dt.
inline ConvergenceReport refine_study(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                                      const SweepOptions& opt = {})
{
    if (values.size() < 3) {
        throw std::invalid_argument("refine_study: need at least three values");
    }
    ConvergenceReport rep;
    rep.axis = axis;
    rep.runs.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        rep.runs[i].value = values[i];
        rep.runs[i].config = sweep_config(base, axis, values[i]);
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rep.runs.size(); i = next++) {
            run_one(rep.runs[i], axis, i, opt);
        }
    };
    const unsigned nw = worker_count(values.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nw; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    for (std::size_t i = 1; i < rep.runs.size(); ++i) {
        const auto& a = rep.runs[i - 1];
        auto& b = rep.runs[i];
        if (a.ok && b.ok) {
            b.diff_prev = state_distance(a.config.basis, *a.final_state, b.config.basis, *b.final_state);
        }
    }

    std::vector<double> x, y;
    if (axis == SweepAxis::eps) {
        rep.fit_quantity = "max_dist_theta_L2";
        for (const auto& r : rep.runs) {
            if (r.ok && r.summary.max_dist_theta_L2 > 0) {
                x.push_back(r.value);
                y.push_back(r.summary.max_dist_theta_L2);
            }
        }
    } else {
        rep.fit_quantity = "diff_prev";
        for (const auto& r : rep.runs) {
            if (r.ok && std::isfinite(r.diff_prev) && r.diff_prev > 0) {
                x.push_back(r.value);
                y.push_back(r.diff_prev);
            }
        }
    }
    if (x.size() >= 2) {
        rep.fit = fit_loglog(x, y);
    } else {
        rep.note = axis == SweepAxis::eps ? "fewer than two runs left Theta" : "fewer than two usable differences";
    }
    return rep;
}

inline std::string sweep_summary_header()
{
    return "value,dt,m,N,status,abort_step,steps,max_dist_theta_L2,max_mass_err,max_balance_residual,"
           "mean_phi0,mean_phi1,mean_phi2,diff_prev";
}

/// Summary CSV: one row per run, then one "# fit" line.
inline std::string sweep_summary_csv(const ConvergenceReport& rep)
{
    std::string out = sweep_summary_header() + "\n";
    for (const auto& r : rep.runs) {
        const auto& d = r.final_diag;
        out += format_double(r.value) + "," + format_double(effective_scheme(r.config).dt) + ","
               + std::to_string(r.config.basis.modes) + "," + std::to_string(r.config.basis.grid) + ","
               + (r.ok ? "ok" : "failed") + "," + std::to_string(r.abort_step) + "," + std::to_string(r.summary.steps)
               + "," + format_double(r.summary.max_dist_theta_L2) + "," + format_double(r.summary.max_mass_err) + ","
               + format_double(r.summary.max_balance_residual) + "," + format_double(d.mean_phi0) + ","
               + format_double(d.mean_phi1) + "," + format_double(d.mean_phi2) + "," + format_double(r.diff_prev)
               + "\n";
    }
    for (const auto& r : rep.runs) {
        if (!r.ok) {
            out += "# error value=" + format_shortest(r.value) + " step=" + std::to_string(r.abort_step) + ": "
                   + r.error + "\n";
        }
    }
    out += std::string("# fit axis=") + axis_name(rep.axis) + " quantity=" + rep.fit_quantity
           + " slope=" + format_double(rep.fit.slope) + " residual=" + format_double(rep.fit.residual)
           + (rep.note.empty() ? "" : " note=" + rep.note) + "\n";
    return out;
}

}  // namespace tumorsim
