#include "tumorsim/config.hpp"
#include "tumorsim/run.hpp"
#include "tumorsim/sweep.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tumorsim {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tumorsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(Config, EmptyTextGivesDefaults)
{
    const RunConfig c = parse_config_text("");
    EXPECT_EQ(c, RunConfig{});
    EXPECT_EQ(c.basis.dim, 1);
    EXPECT_EQ(c.basis.modes, 32);
    EXPECT_EQ(c.basis.grid, 96);
    EXPECT_EQ(c.scheme.dt, 1e-4);
    EXPECT_EQ(c.scheme.t_end, 0.5);
    EXPECT_EQ(c.delta, 0.05);
    EXPECT_EQ(c.model.eps, 0.01);
    EXPECT_EQ(c.rho_star.value(3.0), 1.0);
}

TEST(Config, CommentsAndWhitespace)
{
    const RunConfig c = parse_config_text("# header\n\n  model.eps =  0.001   # inline\nbasis.m=16\n");
    EXPECT_EQ(c.model.eps, 0.001);
    EXPECT_EQ(c.basis.modes, 16);
}

TEST(Config, RangeErrorNamesTheKey)
{
    try {
        parse_config_text("model.eps = -1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key, "model.eps");
        EXPECT_NE(std::string(e.what()).find("model.eps"), std::string::npos);
    }
}

TEST(Config, UnknownKeyAndMalformedValues)
{
    auto key_of = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const ConfigError& e) {
            return e.key;
        }
        return std::string("<none>");
    };
    EXPECT_EQ(key_of("model.epsilon = 0.1\n"), "model.epsilon");
    EXPECT_EQ(key_of("scheme.dt = 1e-4x\n"), "scheme.dt");
    EXPECT_EQ(key_of("scheme.kind = euler\n"), "scheme.kind");
    EXPECT_EQ(key_of("basis.m = 2.5\n"), "basis.m");
    EXPECT_EQ(key_of("basis.m = 32\nbasis.n = 40\n"), "basis.n");
    EXPECT_EQ(key_of("rho_star = 0:1,0:2\n"), "rho_star");
    EXPECT_EQ(key_of("init.phi1.profile = complement\n"), "init.phi1.profile");
    EXPECT_EQ(key_of("g.r_inner = 3\ng.r_outer = 2\n"), "g.r_outer");
    EXPECT_THROW(parse_config_text("just words\n"), ConfigError);
}

TEST(Config, MissingFileIsAnError) { EXPECT_THROW(parse_config("/nonexistent/tumorsim.ini"), ConfigError); }

TEST(Config, EmitParseRoundTrip)
{
    RunConfig c = parse_config_text(
        "model.eps = 0.0123456789\nscheme.kind = rk4\nrho_star = 0:1,0.5:0.25,2:0.75\nmodel.c = standard\n"
        "init.phi2.profile = bump\ninit.phi2.width = 0.07\nf.kind = softplus\ngamma.kind = constant\n"
        "gamma.value = 0.3\nseed = 42\noutput.dir = some dir\n");
    c.c.c[0][1] = -1.0 / 3.0 + 1e-17;
    const RunConfig back = parse_config_text(emit_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(emit_config(back), emit_config(c));
}

TEST(Config, SetValueAppliesOneKey)
{
    RunConfig c;
    set_config_value(c, "model.eps", "1e-3");
    EXPECT_EQ(c.model.eps, 1e-3);
    EXPECT_THROW(set_config_value(c, "nope", "1"), ConfigError);
}

TEST(Config, NoiseIsSeeded)
{
    RunConfig c;
    c.init.noise_amp = 0.01;
    const Model m = build_model(c);
    const State a = build_initial_state(c, m);
    EXPECT_EQ(a, build_initial_state(c, m));
    c.seed = 2;
    EXPECT_NE(a, build_initial_state(c, m));
    EXPECT_NEAR(CosineBasis::mean(a.phi[1]), 0.35, 1e-15);  // the constant mode is not perturbed
}

TEST(Format, NumbersRoundTripExactly)
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23, 0.0, -0.0}) {
        double back = 1.0;
        ASSERT_TRUE(parse_double(format_double(v), back));
        EXPECT_EQ(std::signbit(back), std::signbit(v));
        EXPECT_EQ(back, v);
        ASSERT_TRUE(parse_double(format_shortest(v), back));
        EXPECT_EQ(back, v);
    }
    double x = 0;
    EXPECT_FALSE(parse_double("1.0e", x));
    EXPECT_FALSE(parse_double("", x));
    EXPECT_TRUE(parse_double(" +2 ", x));
    EXPECT_EQ(x, 2.0);
}

TEST(Snapshot, StateRoundTripsBitwise)
{
    for (int dim : {1, 2}) {
        RunConfig c;
        c.basis = dim == 1 ? BasisSpec{1, 12, 24} : BasisSpec{2, 6, 12};
        c.init.noise_amp = 0.03;
        c.init.w = ProfileSpec::cosine(0.0, 0.05, 2);
        const Model m = build_model(c);
        State s = build_initial_state(c, m);
        s.t = 0.1 + 1e-17;
        const fs::path dir = scratch_dir("snap" + std::to_string(dim));
        write_state_snapshot(dir, 7, m.basis, s);
        EXPECT_TRUE(fs::exists(dir / "snap_00000007_phi0.csv"));
        const State back = read_state_snapshot(dir, 7, m.basis);
        EXPECT_EQ(back, s);
        const SnapshotField f = read_snapshot_field(dir / "snap_00000007_rho.csv");
        EXPECT_EQ(f.header.at("dim"), std::to_string(dim));
        EXPECT_EQ(f.header.at("field"), "rho");
        EXPECT_EQ(f.values.size(), m.basis.node_count());
        EXPECT_EQ(f.coords[1][0], m.basis.node_coords(1).first);
    }
}

TEST(Snapshot, GridMismatchIsRejected)
{
    RunConfig c;
    const Model m = build_model(c);
    const fs::path dir = scratch_dir("snapmismatch");
    write_state_snapshot(dir, 0, m.basis, build_initial_state(c, m));
    const CosineBasis other(BasisSpec{1, 16, 48});
    EXPECT_THROW(read_state_snapshot(dir, 0, other), std::runtime_error);
}

TEST(Snapshot, InitialProfileFromFile)
{
    RunConfig c;
    const Model m = build_model(c);
    const fs::path dir = scratch_dir("snapinit");
    State s = build_initial_state(c, m);
    s.phi[2].coeffs[3] = 0.01;
    s.phi[0].coeffs[3] = -0.01;
    write_state_snapshot(dir, 0, m.basis, s);
    RunConfig d = parse_config_text("init.phi2.profile = snapshot\ninit.phi2.file = snap_00000000_phi2.csv\n");
    const State r = build_initial_state(d, m, dir);
    for (std::size_t k = 0; k < r.phi[2].coeffs.size(); ++k) {
        EXPECT_NEAR(r.phi[2].coeffs[k], s.phi[2].coeffs[k], 1e-15);
    }
}

TEST(DiagnosticsCsv, HeaderAndDeterminism)
{
    RunConfig c;
    c.scheme.t_end = 0.003;
    c.scheme.output_every = 10;
    const Model m = build_model(c);
    const State s0 = build_initial_state(c, m);
    const fs::path dir = scratch_dir("csv");
    for (const char* name : {"a.csv", "b.csv"}) {
        DiagCsvWriter w(dir / name);
        RunOptions ro;
        ro.on_sample = [&](const Sample& smp) { w.write(smp.diag); };
        run(m, s0, c.scheme, ro);
    }
    const std::string a = slurp(dir / "a.csv");
    EXPECT_EQ(a, slurp(dir / "b.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "t,F,F0eps,dissipation,boundary_flux,power,balance_residual,mass_err,mean_phi0,mean_phi1,mean_phi2,"
              "mean_w,dist_theta_L2,omega2_measure,w_inf,rho_inf");
    const auto recs = read_diag_csv(dir / "a.csv");
    ASSERT_EQ(recs.size(), 4u);
    EXPECT_EQ(recs[3].t, 0.003);
}

TEST(Sweep, WorkerCountHonoursTheEnvironment)
{
    ::setenv("TUMORSIM_THREADS", "1", 1);
    EXPECT_EQ(worker_count(8), 1u);
    ::setenv("TUMORSIM_THREADS", "junk", 1);
    EXPECT_GE(worker_count(8), 1u);
    ::unsetenv("TUMORSIM_THREADS");
    EXPECT_LE(worker_count(2), 2u);
}

TEST(Sweep, AxisConfigurations)
{
    RunConfig base;
    EXPECT_EQ(sweep_config(base, SweepAxis::eps, 1e-3).model.eps, 1e-3);
    EXPECT_EQ(effective_scheme(sweep_config(base, SweepAxis::eps, 1e-3)).dt, 1e-4);
    base.dt_eps2_cap = 2.0;
    EXPECT_EQ(effective_scheme(sweep_config(base, SweepAxis::eps, 1e-3)).dt, 2e-6);
    EXPECT_EQ(effective_scheme(sweep_config(base, SweepAxis::eps, 1e-1)).dt, 1e-4);
    const RunConfig m64 = sweep_config(base, SweepAxis::m, 64);
    EXPECT_EQ(m64.basis.modes, 64);
    EXPECT_EQ(m64.basis.grid, BasisSpec::min_grid(64));
    EXPECT_EQ(sweep_config(base, SweepAxis::m, 8).basis.grid, 96);
    EXPECT_THROW(sweep_config(base, SweepAxis::m, 8.5), ConfigError);
    EXPECT_THROW(sweep_config(base, SweepAxis::dt, -1.0), ConfigError);
    EXPECT_THROW(parse_axis("time"), std::invalid_argument);
}

TEST(Sweep, DtAxisIsFirstOrderAndReportsFailures)
{
    RunConfig base;
    base.scheme.t_end = 0.02;
    const fs::path dir = scratch_dir("sweep");
    const ConvergenceReport rep = refine_study(base, SweepAxis::dt, {4e-4, 2e-4, 1e-4, 5e-5}, {dir});
    ASSERT_TRUE(rep.all_ok());
    EXPECT_TRUE(std::isnan(rep.runs[0].diff_prev));
    EXPECT_NEAR(rep.fit.slope, 1.0, 0.15);
    EXPECT_TRUE(fs::exists(dir / sweep_run_dir_name(SweepAxis::dt, 2, 1e-4) / "diagnostics.csv"));
    const std::string csv = sweep_summary_csv(rep);
    EXPECT_NE(csv.find("# fit axis=dt quantity=diff_prev slope="), std::string::npos);

    RunConfig bad = base;
    bad.init.phi[0] = ProfileSpec::uniform(0.45);  // phase sum defect aborts at step 0
    const ConvergenceReport rb = refine_study(bad, SweepAxis::dt, {4e-4, 2e-4, 1e-4});
    EXPECT_FALSE(rb.all_ok());
    EXPECT_EQ(rb.runs[1].abort_step, 0);
    EXPECT_NE(sweep_summary_csv(rb).find("# error value=" + format_shortest(2e-4) + " step=0"), std::string::npos);
    EXPECT_THROW(refine_study(base, SweepAxis::dt, {1e-4, 2e-4}), std::invalid_argument);
}

}  // namespace
}  // namespace tumorsim
