// tumorsim: validate | run | sweep for the three-phase porous-medium tumor model.
//
// Exit codes: 0 success, 1 configuration or hypothesis failure, 2 runtime abort.

#include "tumorsim/config.hpp"
#include "tumorsim/run.hpp"
#include "tumorsim/sweep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tumorsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAbort = 2;

struct Loaded {
    RunConfig config;
    fs::path base_dir;  // directory of the config file, for relative snapshot paths
};

std::optional<Loaded> load(const std::string& path)
{
    try {
        Loaded l{parse_config(path), fs::absolute(path).parent_path()};
        return l;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return std::nullopt;
    }
}

void print_report(const HypothesisReport& rep)
{
    for (const auto& c : rep.clauses) {
        std::cout << "clause " << c.id << ": " << (c.passed ? "pass" : "FAIL") << "  " << c.title << "\n";
        for (const auto& f : c.failures) {
            std::cout << "    " << f << "\n";
        }
    }
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v) {
        out += (out.empty() ? "" : ",") + s;
    }
    return out;
}

/// Validates the hypotheses; returns false when the run must not proceed.
bool check_hypotheses(const RunConfig& c, const Model& m, const State& s0, bool force, bool verbose)
{
    const HypothesisReport rep = validate_hypotheses(m, s0, c.delta, c.scheme.t_end, ValidationOptions{4000, c.seed});
    if (verbose || !rep.all_passed()) {
        print_report(rep);
    }
    if (rep.all_passed()) {
        return true;
    }
    const std::string ids = join(rep.failed_ids());
    if (force) {
        std::cerr << "warning: hypothesis clauses failed (" << ids << "); continuing because of --force\n";
        return true;
    }
    std::cerr << "validation failed: clauses " << ids << "\n";
    return false;
}

int cmd_validate(const std::string& config_path)
{
    const auto l = load(config_path);
    if (!l) {
        return kExitInvalid;
    }
    try {
        const Model m = build_model(l->config);
        const State s0 = build_initial_state(l->config, m, l->base_dir);
        return check_hypotheses(l->config, m, s0, false, true) ? kExitOk : kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
}

int cmd_run(const std::string& config_path, const std::string& out_opt, bool force)
{
    auto l = load(config_path);
    if (!l) {
        return kExitInvalid;
    }
    RunConfig& c = l->config;
    if (!out_opt.empty()) {
        c.output_dir = out_opt;
    }
    std::optional<Model> m;
    State s0;
    try {
        m.emplace(build_model(c));
        s0 = build_initial_state(c, *m, l->base_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    if (!check_hypotheses(c, *m, s0, force, false)) {
        return kExitInvalid;
    }
    const SchemeConfig scheme = effective_scheme(c);
    if (scheme.dt > 0.5 * c.model.eps) {
        std::cerr << "warning: dt = " << scheme.dt << " exceeds eps/2; the explicit Yosida term may be unstable\n";
    }

    const fs::path out = c.output_dir;
    fs::create_directories(out);
    write_text(out / "config.ini", emit_config(c));

    const long nsteps = scheme.steps();
    DiagCsvWriter csv(out / "diagnostics.csv");
    RunOptions ro;
    ro.keep_states = false;
    ro.on_sample = [&](const Sample& smp) {
        csv.write(smp.diag);
        const bool snap = smp.step == 0 || smp.step == nsteps
                          || (c.snapshot_every > 0 && smp.step % c.snapshot_every == 0);
        if (snap) {
            write_state_snapshot(out, smp.step, m->basis, smp.state);
        }
    };
    const Trajectory tr = run(*m, s0, scheme, ro);
    const RunSummary& s = tr.summary;

    std::printf("steps %ld  t %.6g\n", s.steps, tr.samples.back().diag.t);
    std::printf("max mass_err %.3e  max |mean w| %.3e  max |balance_residual| %.3e\n", s.max_mass_err,
                s.max_abs_mean_w, s.max_balance_residual);
    std::printf("min dissipation %.6g  max dist_theta_L2 %.3e  max condition %.3e\n", s.min_dissipation,
                s.max_dist_theta_L2, s.max_condition);
    const DiagRecord& last = tr.samples.back().diag;
    std::printf("final means %.9f %.9f %.9f\n", last.mean_phi0, last.mean_phi1, last.mean_phi2);
    std::printf("output %s\n", out.string().c_str());
    if (tr.abort) {
        std::cerr << "runtime abort at step " << tr.abort->step << " (t = " << tr.abort->t
                  << "): " << tr.abort->reason << "\n";
        return kExitAbort;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_opt, bool force, const std::string& axis_name,
              const std::vector<double>& values)
{
    auto l = load(config_path);
    if (!l) {
        return kExitInvalid;
    }
    RunConfig& c = l->config;
    SweepAxis axis;
    try {
        axis = parse_axis(axis_name);
        if (values.size() < 3) {
            throw std::invalid_argument("--values needs at least three entries");
        }
        for (double v : values) {
            sweep_config(c, axis, v);
        }
        const Model m = build_model(c);
        if (!check_hypotheses(c, m, build_initial_state(c, m, l->base_dir), force, false)) {
            return kExitInvalid;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    const fs::path out = out_opt.empty() ? fs::path(c.output_dir) : fs::path(out_opt);
    fs::create_directories(out);
    write_text(out / "config.ini", emit_config(c));
    const ConvergenceReport rep = refine_study(c, axis, values, SweepOptions{out, l->base_dir});
    const std::string summary = sweep_summary_csv(rep);
    write_text(out / "sweep_summary.csv", summary);
    std::cout << summary;
    if (!rep.all_ok()) {
        for (const auto& r : rep.runs) {
            if (!r.ok) {
                std::cerr << "run " << axis_name << "=" << r.value << " failed at step " << r.abort_step << ": "
                          << r.error << "\n";
            }
        }
        return kExitAbort;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Three-phase porous-medium tumor model: Yosida-regularized spectral Galerkin simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis;
    bool force = false;
    std::vector<double> values;

    auto* validate = app.add_subcommand("validate", "check the standing hypotheses on a configuration");
    validate->add_option("--config", config_path, "configuration file")->required();

    auto* runc = app.add_subcommand("run", "integrate one configuration and write diagnostics and snapshots");
    runc->add_option("--config", config_path, "configuration file")->required();
    runc->add_option("--out", out_dir, "output directory (overrides output.dir)");
    runc->add_flag("--force", force, "run even when hypothesis clauses fail");

    auto* sweep = app.add_subcommand("sweep", "run a configuration along one parameter axis and fit a slope");
    sweep->add_option("--config", config_path, "configuration file")->required();
    sweep->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sweep->add_flag("--force", force, "run even when hypothesis clauses fail");
    sweep->add_option("--axis", axis, "eps, m or dt")->required()->check(CLI::IsMember({"eps", "m", "dt"}));
    sweep->add_option("--values", values, "comma-separated axis values")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*validate) {
            return cmd_validate(config_path);
        }
        if (*runc) {
            return cmd_run(config_path, out_dir, force);
        }
        return cmd_sweep(config_path, out_dir, force, axis, values);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    }
}
