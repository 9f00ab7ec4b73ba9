#include "tumorsim/config.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

namespace tumorsim {
namespace {

HypothesisReport check(const RunConfig& c)
{
    const Model m = build_model(c);
    return validate_hypotheses(m, build_initial_state(c, m), c.delta, c.scheme.t_end);
}

std::vector<std::string> failed(const RunConfig& c) { return check(c).failed_ids(); }

TEST(Hypotheses, DefaultsPassEveryClause)
{
    const auto rep = check(RunConfig{});
    ASSERT_EQ(rep.clauses.size(), 8u);
    for (const auto& c : rep.clauses) {
        EXPECT_TRUE(c.passed) << c.id << ": " << (c.failures.empty() ? "" : c.failures.front());
    }
    EXPECT_TRUE(rep.all_passed());
    EXPECT_NE(rep.find("iv"), nullptr);
    EXPECT_EQ(rep.find("ix"), nullptr);
}

TEST(Hypotheses, BadRowSumFailsOnlyClauseI)
{
    RunConfig c;
    c.c.c[0][0] += 0.1;
    EXPECT_EQ(failed(c), std::vector<std::string>{"i"});
}

TEST(Hypotheses, OverclaimedCoercivityFailsClauseI)
{
    RunConfig c;
    c.c.c_hat = 5.0;
    EXPECT_EQ(failed(c), std::vector<std::string>{"i"});
}

TEST(Hypotheses, ElasticityOutOfRangeFailsOnlyClauseII)
{
    RunConfig c;
    c.constitutive.E.kind = Elasticity::Kind::constant;
    c.constitutive.E.constant = 2.0;  // above K = 1.5
    EXPECT_EQ(failed(c), std::vector<std::string>{"ii"});
}

TEST(Hypotheses, GrowthRateAboveKFailsOnlyClauseIII)
{
    RunConfig c;
    c.constitutive.gamma.kind = GrowthRate::Kind::constant;
    c.constitutive.gamma.constant = 2.0;
    EXPECT_EQ(failed(c), std::vector<std::string>{"iii"});
}

TEST(Hypotheses, PressureBoundsOrderFailsOnlyClauseIV)
{
    RunConfig c;
    c.constitutive.f.f0 = 3.0;
    c.constitutive.f.f1 = 2.0;
    EXPECT_EQ(failed(c), std::vector<std::string>{"iv"});
}

TEST(Hypotheses, DeltaOutOfRangeFailsOnlyClauseV)
{
    RunConfig c;
    c.delta = 0.4;
    // A large delta also moves the mean phase out of Theta_delta.
    const auto ids = failed(c);
    ASSERT_FALSE(ids.empty());
    EXPECT_EQ(ids.front(), "v");
    c.delta = -0.1;
    EXPECT_EQ(failed(c), std::vector<std::string>{"v"});
}

TEST(Hypotheses, InitialMeanOutsideThetaDeltaFailsOnlyClauseVII)
{
    RunConfig c;
    c.init.phi[1] = ProfileSpec::cosine(0.02, 0.01, 1);
    const auto rep = check(c);
    EXPECT_EQ(rep.failed_ids(), std::vector<std::string>{"vii"});
    ASSERT_EQ(rep.find("vii")->failures.size(), 1u);
    EXPECT_NE(rep.find("vii")->failures.front().find("Theta_delta"), std::string::npos);
}

TEST(Hypotheses, NonzeroMeanVolumeDifferenceFailsOnlyClauseVII)
{
    RunConfig c;
    c.init.w = ProfileSpec::uniform(0.1);
    const auto rep = check(c);
    EXPECT_EQ(rep.failed_ids(), std::vector<std::string>{"vii"});
    EXPECT_NE(rep.find("vii")->failures.front().find("mean(w0)"), std::string::npos);
}

TEST(Hypotheses, PhaseSumDefectFailsClauseVII)
{
    RunConfig c;
    c.init.phi[0] = ProfileSpec::uniform(0.45);
    EXPECT_EQ(failed(c), std::vector<std::string>{"vii"});
}

TEST(Hypotheses, RhoStarTableMustIncrease)
{
    RunConfig c;
    c.rho_star.knots = {{0.0, 1.0}, {0.0, 0.5}};
    EXPECT_EQ(failed(c), std::vector<std::string>{"viii"});
}

TEST(Hypotheses, ReportIsDeterministicForAFixedSeed)
{
    RunConfig c;
    c.c.c[1][2] += 0.05;
    const auto a = check(c);
    const auto b = check(c);
    ASSERT_EQ(a.clauses.size(), b.clauses.size());
    for (std::size_t i = 0; i < a.clauses.size(); ++i) {
        EXPECT_EQ(a.clauses[i].failures, b.clauses[i].failures);
    }
}

}  // namespace
}  // namespace tumorsim
