#pragma once

// Sampled checks of the standing hypotheses on the data, clause by clause.
// Never throws on a failed clause; the caller decides what to do with the report.

#include "tumorsim/model.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace tumorsim {

struct ClauseResult {
    std::string id;  // "i" .. "viii"
    std::string title;
    bool passed = true;
    std::vector<std::string> failures;

    void fail(std::string why)
    {
        passed = false;
        failures.push_back(std::move(why));
    }
};

struct HypothesisReport {
    std::vector<ClauseResult> clauses;

    bool all_passed() const
    {
        for (const auto& c : clauses) {
            if (!c.passed) {
                return false;
            }
        }
        return true;
    }

    std::vector<std::string> failed_ids() const
    {
        std::vector<std::string> out;
        for (const auto& c : clauses) {
            if (!c.passed) {
                out.push_back(c.id);
            }
        }
        return out;
    }

    const ClauseResult* find(const std::string& id) const
    {
        for (const auto& c : clauses) {
            if (c.id == id) {
                return &c;
            }
        }
        return nullptr;
    }
};

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

struct ValidationOptions {
    int samples = 4000;
    std::uint64_t seed = 1;
    double lo = -2.0;  // sampling box for phase pairs and nutrient values
    double hi = 3.0;
};

inline HypothesisReport validate_hypotheses(const Model& model, const State& initial, double delta, double T,
                                            const ValidationOptions& opt = {})
{
    using detail::fmt;
    const auto& cs = model.constitutive;
    const double K = cs.K;
    HypothesisReport rep;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(opt.lo, opt.hi);
    constexpr double rel = 1e-6;

    {
        ClauseResult c{"i", "interaction matrix: zero row/column sums, coercivity", true, {}};
        for (int i = 0; i < 3; ++i) {
            if (std::abs(model.c.row_sum(i)) > 1e-12) {
                c.fail("row " + std::to_string(i) + " sums to " + fmt(model.c.row_sum(i)));
            }
            if (std::abs(model.c.col_sum(i)) > 1e-12) {
                c.fail("column " + std::to_string(i) + " sums to " + fmt(model.c.col_sum(i)));
            }
        }
        if (!(model.c.c_hat > 0)) {
            c.fail("c_hat = " + fmt(model.c.c_hat) + " is not positive");
        }
        const double viol = model.c.sampled_coercivity_violation(1000, opt.seed);
        if (viol > 1e-10) {
            c.fail("coercivity violated by " + fmt(viol) + " on random triples");
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"ii", "E, A map into [0, K] and are Lipschitz", true, {}};
        if (!(K >= 1.0)) {
            c.fail("K = " + fmt(K) + " < 1");
        }
        double emin = INFINITY, emax = -INFINITY, amin = INFINITY, amax = -INFINITY, lip = 0.0;
        const double h = 1e-6;
        for (int s = 0; s < opt.samples; ++s) {
            const PhaseVec p{u(rng), u(rng)};
            const double e = cs.E.value(p);
            const double a = cs.A.value(p);
            emin = std::min(emin, e);
            emax = std::max(emax, e);
            amin = std::min(amin, a);
            amax = std::max(amax, a);
            for (PhaseVec d : {PhaseVec{h, 0}, PhaseVec{0, h}}) {
                lip = std::max(lip, std::abs(cs.E.value(p + d) - e) / h);
                lip = std::max(lip, std::abs(cs.A.value(p + d) - a) / h);
            }
        }
        if (emin < 0.0 || emax > K) {
            c.fail("E sampled range [" + fmt(emin) + ", " + fmt(emax) + "] not within [0, " + fmt(K) + "]");
        }
        if (amin < 0.0 || amax > K) {
            c.fail("A sampled range [" + fmt(amin) + ", " + fmt(amax) + "] not within [0, " + fmt(K) + "]");
        }
        if (!std::isfinite(lip) || lip > 1e6) {
            c.fail("E/A difference quotients reach " + fmt(lip));
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"iii", "|gamma| <= K and |gamma'| <= K", true, {}};
        double gmax = 0.0, dmax = 0.0;
        const double h = 1e-6;
        for (int s = 0; s < opt.samples; ++s) {
            const double r = 4.0 * u(rng);
            gmax = std::max(gmax, std::abs(cs.gamma.value(r)));
            dmax = std::max(dmax, std::abs(cs.gamma.value(r + h) - cs.gamma.value(r - h)) / (2 * h));
        }
        if (gmax > K) {
            c.fail("sup |gamma| sampled " + fmt(gmax) + " > K = " + fmt(K));
        }
        if (dmax > K * (1 + rel)) {
            c.fail("sup |gamma'| sampled " + fmt(dmax) + " > K = " + fmt(K));
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"iv", "f' within [f0, f1] with f1 > f0 > 0", true, {}};
        const auto& f = cs.f;
        if (!(f.f1 > f.f0 && f.f0 > 0)) {
            c.fail("bounds f0 = " + fmt(f.f0) + ", f1 = " + fmt(f.f1) + " do not satisfy f1 > f0 > 0");
        }
        double smin = INFINITY, smax = -INFINITY;
        const double h = 1e-5;
        for (int s = 0; s < opt.samples; ++s) {
            const double p = 10.0 * u(rng);
            const double d = (f.value(p + h) - f.value(p - h)) / (2 * h);
            smin = std::min(smin, d);
            smax = std::max(smax, d);
        }
        if (smin < f.f0 * (1 - rel) || smax > f.f1 * (1 + rel)) {
            c.fail("sampled f' range [" + fmt(smin) + ", " + fmt(smax) + "] not within [" + fmt(f.f0) + ", "
                   + fmt(f.f1) + "]");
        }
        if (std::abs(f.value(0.0) - f.z0) > 1e-12) {
            c.fail("f(0) = " + fmt(f.value(0.0)) + " differs from z0 = " + fmt(f.z0));
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"v", "psi is the indicator of Theta; delta in (0, 1 - 1/sqrt 2)", true, {}};
        if (!(delta > 0.0 && delta < ThetaDelta::upper_limit())) {
            c.fail("delta = " + fmt(delta) + " outside (0, " + fmt(ThetaDelta::upper_limit()) + ")");
        }
        if (!(T >= 0.0)) {
            c.fail("horizon T = " + fmt(T) + " is negative");
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"vi", "g is C^2 with bounded g, grad g, <grad g, phi>", true, {}};
        const double cg = cs.g.sup_bound();
        if (!std::isfinite(cg)) {
            c.fail("bound C_g is not finite");
        }
        for (int s = 0; s < opt.samples; ++s) {
            const PhaseVec p{2.0 * u(rng), 2.0 * u(rng)};
            const PhaseVec gr = cs.g.grad(p);
            const double worst = std::max({std::abs(cs.g.value(p)), norm(gr), std::abs(dot(gr, p))});
            if (worst > cg) {
                c.fail("sample exceeds C_g = " + fmt(cg) + ": " + fmt(worst));
                break;
            }
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"vii", "initial data: phases sum to 1, mean w = 0, mean phase in Theta_delta", true, {}};
        const NodalState n = evaluate_nodes(model, initial);
        double sum_err = 0.0;
        bool finite = true;
        for (std::size_t j = 0; j < n.phi[0].values.size(); ++j) {
            const double s = n.phi[0].values[j] + n.phi[1].values[j] + n.phi[2].values[j];
            sum_err = std::max(sum_err, std::abs(s - 1.0));
            finite = finite && std::isfinite(s) && std::isfinite(initial.w.values[j]) && std::isfinite(n.rho.values[j]);
        }
        if (!finite) {
            c.fail("initial data contain non-finite values");
        }
        if (sum_err > 1e-12) {
            c.fail("max |phi0 + phi1 + phi2 - 1| = " + fmt(sum_err));
        }
        const double wbar = model.basis.mean(initial.w);
        if (std::abs(wbar) > 1e-12) {
            c.fail("mean(w0) = " + fmt(wbar));
        }
        const PhaseVec bar{n.mean[1], n.mean[2]};
        if (!in_theta_delta(bar, delta)) {
            c.fail("mean phase (" + fmt(bar.phi1) + ", " + fmt(bar.phi2) + ") not in Theta_delta, delta = "
                   + fmt(delta));
        }
        rep.clauses.push_back(std::move(c));
    }

    {
        ClauseResult c{"viii", "rho* bounded with square-integrable time derivative", true, {}};
        const auto& knots = model.rho_star.knots;
        if (knots.empty()) {
            c.fail("rho* has no values");
        }
        for (std::size_t i = 0; i < knots.size(); ++i) {
            if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second)) {
                c.fail("rho* knot " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
                c.fail("rho* table times not strictly increasing at knot " + std::to_string(i));
            }
        }
        rep.clauses.push_back(std::move(c));
    }
    return rep;
}

}  // namespace tumorsim
