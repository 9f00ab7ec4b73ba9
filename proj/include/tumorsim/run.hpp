#pragma once

// Run orchestration: fixed-step integration from an initial state with
// diagnostics sampled on a cadence and a few quantities tracked every step.

#include "tumorsim/diagnostics.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tumorsim {

struct Sample {
    long step = 0;
    State state;
    DiagRecord diag;
};

/// Extremes over every step, not only the sampled ones.
struct RunSummary {
    long steps = 0;
    double max_mass_err = 0.0;
    double max_abs_mean_w = 0.0;
    double max_balance_residual = 0.0;  // over steps n >= 1
    double min_dissipation = INFINITY;
    double min_dissipation_integrand = INFINITY;
    double max_condition = 1.0;
    double max_dist_theta_L2 = 0.0;
    int max_substeps = 1;
    bool dt_exceeds_half_eps = false;
};

struct RunAbort {
    long step = 0;  // index of the step that failed (1-based; 0 = initial state)
    double t = 0.0;
    std::string reason;
};

struct Trajectory {
    std::vector<Sample> samples;
    RunSummary summary;
    std::optional<RunAbort> abort;

    std::vector<DiagRecord> records() const
    {
        std::vector<DiagRecord> r;
        r.reserve(samples.size());
        for (const auto& s : samples) {
            r.push_back(s.diag);
        }
        return r;
    }
    const State& final_state() const { return samples.back().state; }
};

struct RunOptions {
    bool keep_states = true;  // when false only the first and last samples carry their state
    std::function<void(const Sample&)> on_sample;  // called for every sample, with its state, as it is produced
};

namespace detail {

inline bool finite_state(const State& s)
{
    auto ok = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) {
                return false;
            }
        }
        return true;
    };
    return ok(s.phi[0].coeffs) && ok(s.phi[1].coeffs) && ok(s.phi[2].coeffs) && ok(s.rho.coeffs) && ok(s.w.values);
}

}  // namespace detail

inline Trajectory run(const Model& m, const State& initial, const SchemeConfig& scheme, const RunOptions& opt = {})
{
    scheme.validate();
    Trajectory traj;
    RunSummary& sum = traj.summary;
    sum.dt_exceeds_half_eps = scheme.dt > 0.5 * m.params.eps;
    detail::LawsonCache cache;

    const long nsteps = scheme.steps();
    auto emit = [&](long step, const State& s, const DiagRecord& d) {
        Sample smp{step, s, d};
        if (opt.on_sample) {
            opt.on_sample(smp);
        }
        if (!(opt.keep_states || step == 0 || step == nsteps)) {
            smp.state = State{};
        }
        traj.samples.push_back(std::move(smp));
    };
    auto track = [&](const DiagRecord& d) {
        sum.max_mass_err = std::max(sum.max_mass_err, d.mass_err);
        sum.max_abs_mean_w = std::max(sum.max_abs_mean_w, std::abs(d.mean_w));
        sum.max_dist_theta_L2 = std::max(sum.max_dist_theta_L2, d.dist_theta_L2);
    };

    State cur = initial;
    std::optional<Evaluation> ev;
    DiagRecord rec;
    try {
        if (!detail::finite_state(cur)) {
            throw std::runtime_error("non-finite value in the initial state");
        }
        ev = evaluate(m, cur);
        rec = state_record(m, cur, ev->nodes);
        const BalanceTerms b0 = energy_balance_instant(m, cur, *ev);
        set_balance(rec, b0);
        sum.min_dissipation = std::min(sum.min_dissipation, b0.diss.dissipation);
        sum.min_dissipation_integrand = std::min(sum.min_dissipation_integrand, b0.diss.min_integrand);
    } catch (const std::exception& e) {
        traj.abort = RunAbort{0, cur.t, e.what()};
        return traj;
    }
    track(rec);
    emit(0, cur, rec);

    for (long n = 1; n <= nsteps; ++n) {
        const double dt = std::min(scheme.dt, scheme.t_end - cur.t);
        try {
            StepInfo info;
            State next = scheme.kind == SchemeKind::imex1 ? step_imex(m, cur, dt, &info)
                                                          : step_rk4(m, cur, dt, cache, &info);
            if (n == nsteps) {
                next.t = scheme.t_end;
            }
            if (!detail::finite_state(next)) {
                throw std::runtime_error("non-finite value after step");
            }
            sum.max_condition = std::max(sum.max_condition, info.max_condition);
            sum.max_substeps = std::max(sum.max_substeps, info.substeps);

            Evaluation ev_next = evaluate(m, next);
            DiagRecord r = state_record(m, next, ev_next.nodes);
            const BalanceTerms b = energy_balance_step(m, cur, *ev, rec.F, next, ev_next, r.F);
            set_balance(r, b);
            sum.max_balance_residual = std::max(sum.max_balance_residual, std::abs(b.residual));
            sum.min_dissipation = std::min(sum.min_dissipation, b.diss.dissipation);
            sum.min_dissipation_integrand = std::min(sum.min_dissipation_integrand, b.diss.min_integrand);
            track(r);

            cur = std::move(next);
            ev = std::move(ev_next);
            rec = r;
            sum.steps = n;
            if (n % scheme.output_every == 0 || n == nsteps) {
                emit(n, cur, rec);
            }
        } catch (const std::exception& e) {
            traj.abort = RunAbort{n, cur.t, e.what()};
            break;
        }
    }
    return traj;
}

struct BalanceSeries {
    std::vector<double> t;
    std::vector<double> residual;
    std::vector<double> dissipation;
    double max_abs_residual = 0.0;
    double min_dissipation = INFINITY;
};

/// Balance residuals carried by the sampled records. Each sampled record holds
/// the residual of the step that ends at it; the initial record holds the
/// instantaneous identity.
inline BalanceSeries energy_balance(const Trajectory& traj)
{
    if (traj.samples.size() < 2) {
        throw std::invalid_argument("energy_balance: need at least two samples");
    }
    BalanceSeries out;
    for (const auto& s : traj.samples) {
        out.t.push_back(s.diag.t);
        out.residual.push_back(s.diag.balance_residual);
        out.dissipation.push_back(s.diag.dissipation);
        out.max_abs_residual = std::max(out.max_abs_residual, std::abs(s.diag.balance_residual));
        out.min_dissipation = std::min(out.min_dissipation, s.diag.dissipation);
    }
    return out;
}

}  // namespace tumorsim
