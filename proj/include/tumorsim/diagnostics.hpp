#pragma once

// Run-time measurements of the analytical invariants: energy balance,
// dissipation, mean-value bounds, distance to Theta, the variational
// inequality residual and distances between states of different resolution.

#include "tumorsim/stepper.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tumorsim {

struct DiagRecord {
    double t = 0.0;
    double F = 0.0;
    double F0eps = 0.0;
    double dissipation = 0.0;    // nu |w'|^2 + D |grad rho|^2 + int A rho^2
    double boundary_flux = 0.0;  // kappa int_{dOmega} rho (rho - rho*)
    double power = 0.0;          // sum_i int phi_i' mu_i
    double balance_residual = 0.0;
    double mass_err = 0.0;  // max |phi0 + phi1 + phi2 - 1| on the grid
    double mean_phi0 = 0.0;
    double mean_phi1 = 0.0;
    double mean_phi2 = 0.0;
    double mean_w = 0.0;
    double dist_theta_L2 = 0.0;
    double omega2_measure = 0.0;
    double w_inf = 0.0;
    double rho_inf = 0.0;
};

inline constexpr std::array<const char*, 16> kDiagColumns = {
    "t",         "F",         "F0eps",     "dissipation", "boundary_flux", "power",          "balance_residual",
    "mass_err",  "mean_phi0", "mean_phi1", "mean_phi2",   "mean_w",        "dist_theta_L2", "omega2_measure",
    "w_inf",     "rho_inf"};

inline std::array<double, 16> diag_values(const DiagRecord& r)
{
    return {r.t,         r.F,         r.F0eps,     r.dissipation, r.boundary_flux, r.power,         r.balance_residual,
            r.mass_err,  r.mean_phi0, r.mean_phi1, r.mean_phi2,   r.mean_w,        r.dist_theta_L2, r.omega2_measure,
            r.w_inf,     r.rho_inf};
}

struct ThetaViolation {
    double dist_L2 = 0.0;
    double omega2_measure = 0.0;
};

/// L2 norm of dist(phi(x), Theta) and the measure of {dist > eps^{1/4}}.
inline ThetaViolation theta_violation(const Model& m, const NodalState& n, double eps)
{
    const double thr = std::pow(eps, 0.25);
    double d2 = 0.0, meas = 0.0;
    for (std::size_t j = 0; j < n.phi[1].values.size(); ++j) {
        const double d = dist_theta(n.phase(j));
        d2 += d * d;
        if (d > thr) {
            meas += 1.0;
        }
    }
    return {std::sqrt(d2 * m.basis.weight()), meas * m.basis.weight()};
}
inline ThetaViolation theta_violation(const Model& m, const State& s)
{
    return theta_violation(m, evaluate_nodes(m, s), m.params.eps);
}

/// Dissipation nu |w'|^2 + D |grad rho|^2 + int A rho^2 and the Robin flux for
/// a given w rate, nutrient state and boundary datum.
struct DissipationParts {
    double dissipation = 0.0;
    double boundary_flux = 0.0;
    double min_integrand = 0.0;  // smallest pointwise value of A rho^2 + nu w'^2
};

inline DissipationParts dissipation(const Model& m, const NodalState& n, const ModalField& rho, const GridField& wdot,
                                    double rho_star)
{
    const auto& b = m.basis;
    DissipationParts out;
    double s = 0.0;
    out.min_integrand = INFINITY;
    for (std::size_t j = 0; j < wdot.values.size(); ++j) {
        const double r = n.rho.values[j];
        const double v = m.params.nu * wdot.values[j] * wdot.values[j] + m.constitutive.A.value(n.phase(j)) * r * r;
        s += v;
        out.min_integrand = std::min(out.min_integrand, v);
    }
    out.dissipation = s * b.weight() + m.params.D * b.gradient_norm_sq(rho);
    BoundaryField tr = b.boundary_trace(rho);
    for (double& v : tr.values) {
        v *= v - rho_star;
    }
    out.boundary_flux = m.params.kappa * b.boundary_integrate(tr);
    return out;
}

/// Energy balance over one step from state a to state b, with the chemical
/// potentials averaged over the two ends:
///   [sum_i <(phi_i^b - phi_i^a)/dt, (mu_i^a + mu_i^b)/2> - (F^b - F^a)/dt] - [dissipation + flux],
/// dissipation from the backward difference of w and the nutrient at a.
struct BalanceTerms {
    double power = 0.0;
    double dFdt = 0.0;
    DissipationParts diss;
    double residual = 0.0;
};

inline BalanceTerms energy_balance_step(const Model& m, const State& a, const Evaluation& ev_a, double F_a,
                                        const State& b, const Evaluation& ev_b, double F_b)
{
    const double dt = b.t - a.t;
    if (!(dt > 0)) {
        throw std::invalid_argument("energy_balance_step: states must be ordered in time");
    }
    BalanceTerms out;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < a.phi[i].coeffs.size(); ++k) {
            const double mid = 0.5 * (ev_a.mu.mu[i].coeffs[k] + ev_b.mu.mu[i].coeffs[k]);
            out.power += (b.phi[i].coeffs[k] - a.phi[i].coeffs[k]) / dt * mid;
        }
    }
    GridField wdot = b.w;
    for (std::size_t j = 0; j < wdot.values.size(); ++j) {
        wdot.values[j] = (b.w.values[j] - a.w.values[j]) / dt;
    }
    out.dFdt = (F_b - F_a) / dt;
    out.diss = dissipation(m, ev_a.nodes, a.rho, wdot, m.rho_star.value(a.t));
    out.residual = out.power - out.dFdt - out.diss.dissipation - out.diss.boundary_flux;
    return out;
}

/// The same balance for the semi-discrete system at one instant, with the
/// time derivative of F obtained by the chain rule. It vanishes identically
/// when the phase denominators equal 1.
inline BalanceTerms energy_balance_instant(const Model& m, const State& s, const Evaluation& ev)
{
    const auto& b = m.basis;
    BalanceTerms out;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < s.phi[i].coeffs.size(); ++k) {
            out.power += ev.rate.phi[i].coeffs[k] * ev.mu.mu[i].coeffs[k];
        }
    }
    double wpart = 0.0;
    for (std::size_t j = 0; j < s.w.values.size(); ++j) {
        const double e = m.constitutive.E.value(ev.nodes.phase(j));
        wpart += (e * s.w.values[j] - ev.p.values[j]) * ev.rate.w.values[j];
    }
    double rhopart = 0.0;
    for (std::size_t k = 0; k < s.rho.coeffs.size(); ++k) {
        rhopart += s.rho.coeffs[k] * ev.rate.rho.coeffs[k];
    }
    out.dFdt = out.power + wpart * b.weight() + rhopart;
    out.diss = dissipation(m, ev.nodes, s.rho, ev.rate.w, m.rho_star.value(s.t));
    out.residual = out.power - out.dFdt - out.diss.dissipation - out.diss.boundary_flux;
    return out;
}

/// Grid-level record of a state; the balance columns are filled by the caller.
inline DiagRecord state_record(const Model& m, const State& s, const NodalState& n)
{
    DiagRecord r;
    r.t = s.t;
    const FreeEnergy e = free_energy(m, s, n);
    r.F = e.F;
    r.F0eps = e.F0eps;
    for (std::size_t j = 0; j < s.w.values.size(); ++j) {
        const double sum = n.phi[0].values[j] + n.phi[1].values[j] + n.phi[2].values[j];
        r.mass_err = std::max(r.mass_err, std::abs(sum - 1.0));
        r.w_inf = std::max(r.w_inf, std::abs(s.w.values[j]));
        r.rho_inf = std::max(r.rho_inf, std::abs(n.rho.values[j]));
    }
    r.mean_phi0 = n.mean[0];
    r.mean_phi1 = n.mean[1];
    r.mean_phi2 = n.mean[2];
    r.mean_w = m.basis.mean(s.w);
    const ThetaViolation tv = theta_violation(m, n, m.params.eps);
    r.dist_theta_L2 = tv.dist_L2;
    r.omega2_measure = tv.omega2_measure;
    return r;
}

inline void set_balance(DiagRecord& r, const BalanceTerms& b)
{
    r.power = b.power;
    r.dissipation = b.diss.dissipation;
    r.boundary_flux = b.diss.boundary_flux;
    r.balance_residual = b.residual;
}

/// Lower bound mean(phi0)(t) >= mean(phi0)(0) exp(-K t) and the minima of the
/// other two means against delta exp(-K t) (reported only).
struct MeanBoundReport {
    double K = 0.0;
    double worst_phi0_gap = INFINITY;  // min over t of mean(phi0)(t) - mean(phi0)(0) e^{-Kt}
    double min_phi1 = INFINITY;
    double min_phi2 = INFINITY;
    double worst_phi12_gap = INFINITY;  // min over t of min(mean phi1, mean phi2) - delta e^{-Kt}
    bool phi0_bound_holds(double tol) const { return worst_phi0_gap >= -tol; }
};

inline MeanBoundReport mean_bounds(const std::vector<DiagRecord>& recs, double K, double delta)
{
    MeanBoundReport rep;
    rep.K = K;
    if (recs.empty()) {
        return rep;
    }
    const double m0 = recs.front().mean_phi0;
    for (const auto& r : recs) {
        const double decay = std::exp(-K * r.t);
        rep.worst_phi0_gap = std::min(rep.worst_phi0_gap, r.mean_phi0 - m0 * decay);
        rep.min_phi1 = std::min(rep.min_phi1, r.mean_phi1);
        rep.min_phi2 = std::min(rep.min_phi2, r.mean_phi2);
        rep.worst_phi12_gap = std::min(rep.worst_phi12_gap, std::min(r.mean_phi1, r.mean_phi2) - delta * decay);
    }
    return rep;
}

/// Left-hand side of the variational inequality for the constant test pair v,
/// with psi dropped for v in Theta and phi replaced by its projection:
///   int <mu - grad g - grad E w^2/2, v - J phi> + |grad phi1|^2 + |grad phi2|^2.
inline double vi_lhs(const Model& m, const State& s, const Mu& mu, const NodalState& n, PhaseVec v)
{
    const auto& b = m.basis;
    const auto& cs = m.constitutive;
    const GridField mu1 = b.inverse(mu.mu[1]);
    const GridField mu2 = b.inverse(mu.mu[2]);
    // The smooth parts are removed through their projections, matching mu.
    GridField s1 = b.zero_grid(), s2 = b.zero_grid();
    for (std::size_t j = 0; j < s1.values.size(); ++j) {
        const PhaseVec p = n.phase(j);
        const double hw = 0.5 * s.w.values[j] * s.w.values[j];
        s1.values[j] = cs.g.grad(p).phi1 + cs.E.grad(p).phi1 * hw;
        s2.values[j] = cs.g.grad(p).phi2 + cs.E.grad(p).phi2 * hw;
    }
    const GridField ps1 = b.inverse(b.forward(s1));
    const GridField ps2 = b.inverse(b.forward(s2));
    double acc = 0.0;
    for (std::size_t j = 0; j < s1.values.size(); ++j) {
        const PhaseVec jp = project_theta(n.phase(j));
        acc += (mu1.values[j] - ps1.values[j]) * (v.phi1 - jp.phi1) + (mu2.values[j] - ps2.values[j]) * (v.phi2 - jp.phi2);
    }
    return acc * b.weight() + b.gradient_norm_sq(s.phi[1]) + b.gradient_norm_sq(s.phi[2]);
}

/// Largest violation (positive part) of the variational inequality over the
/// given constant test pairs; the left-hand side is affine in v, so the three
/// vertices of Theta already give the maximum over all of Theta.
inline double vi_residual(const Model& m, const State& s, const std::vector<PhaseVec>& tests)
{
    const NodalState n = evaluate_nodes(m, s);
    const Mu mu = chemical_potentials(m, s, n);
    double worst = 0.0;
    for (const PhaseVec& v : tests) {
        worst = std::max(worst, vi_lhs(m, s, mu, n, v));
    }
    return worst;
}

inline std::vector<PhaseVec> default_vi_tests(const State& s)
{
    return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {CosineBasis::mean(s.phi[1]), CosineBasis::mean(s.phi[2])}};
}

namespace detail {

/// Coefficients of a grid field in the full cosine family its grid resolves.
inline ModalField full_spectrum(int dim, const GridField& g)
{
    const std::size_t total = g.values.size();
    const int n = dim == 1 ? static_cast<int>(total) : static_cast<int>(std::lround(std::sqrt(double(total))));
    const CosineBasis b(BasisSpec{dim, n - 1, n});
    return b.forward(g);
}

/// Squared L2 distance between two modal fields given on tensor grids of
/// possibly different truncation (missing modes count as zero).
inline double modal_distance_sq(int dim, const ModalField& a, int ma, const ModalField& b, int mb)
{
    const int mx = std::max(ma, mb);
    double s = 0.0;
    auto coeff = [dim](const ModalField& f, int m, int kx, int ky) {
        if (kx > m || ky > m) {
            return 0.0;
        }
        return dim == 1 ? f.coeffs[kx] : f.coeffs[static_cast<std::size_t>(ky) * (m + 1) + kx];
    };
    for (int ky = 0; ky <= (dim == 1 ? 0 : mx); ++ky) {
        for (int kx = 0; kx <= mx; ++kx) {
            const double d = coeff(a, ma, kx, ky) - coeff(b, mb, kx, ky);
            s += d * d;
        }
    }
    return s;
}

}  // namespace detail

/// L2(Omega) distance between two states over all five unknowns, valid across
/// different mode counts and grids.
inline double state_distance(const BasisSpec& sa, const State& a, const BasisSpec& sb, const State& b)
{
    if (sa.dim != sb.dim) {
        throw std::invalid_argument("state_distance: dimensions differ");
    }
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        s += detail::modal_distance_sq(sa.dim, a.phi[i], sa.modes, b.phi[i], sb.modes);
    }
    s += detail::modal_distance_sq(sa.dim, a.rho, sa.modes, b.rho, sb.modes);
    if (sa.grid == sb.grid) {
        double d = 0.0;
        for (std::size_t j = 0; j < a.w.values.size(); ++j) {
            const double e = a.w.values[j] - b.w.values[j];
            d += e * e;
        }
        s += d / static_cast<double>(a.w.values.size());
    } else {
        s += detail::modal_distance_sq(sa.dim, detail::full_spectrum(sa.dim, a.w), sa.grid - 1,
                                       detail::full_spectrum(sb.dim, b.w), sb.grid - 1);
    }
    return std::sqrt(s);
}

/// Least-squares fit of log y against log x.
struct SlopeFit {
    double slope = NAN;
    double intercept = NAN;
    double residual = NAN;  // root-mean-square residual of the fit in log space
};

inline SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_loglog: need at least two matching points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    SlopeFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        r2 += e * e;
    }
    f.residual = std::sqrt(r2 / n);
    return f;
}

}  // namespace tumorsim
