#pragma once

// Right-hand-side physics of the eps-regularized three-phase system:
// pressure law, chemical potentials, mass sources and the free energy.

#include "tumorsim/basis.hpp"
#include "tumorsim/constitutive.hpp"
#include "tumorsim/interaction.hpp"
#include "tumorsim/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tumorsim {

/// Raised when |phi0| + |phi1| + |phi2| (or the same sum of means) drops below 1,
/// which cannot happen while the mass identity holds.
class DenominatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// External nutrient level on the boundary: a constant, or piecewise-linear in
/// t through (t, value) knots with constant extrapolation.
struct RhoStar {
    std::vector<std::pair<double, double>> knots{{0.0, 1.0}};

    static RhoStar constant(double v) { return RhoStar{{{0.0, v}}}; }
    bool is_constant() const { return knots.size() == 1; }

    double value(double t) const
    {
        if (knots.size() == 1 || t <= knots.front().first) {
            return knots.front().second;
        }
        if (t >= knots.back().first) {
            return knots.back().second;
        }
        auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double x, const auto& k) { return x < k.first; });
        const auto& [t1, v1] = *it;
        const auto& [t0, v0] = *(it - 1);
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }

    friend bool operator==(const RhoStar&, const RhoStar&) = default;
};

struct ModelParams {
    double nu = 1.0;     // viscosity
    double D = 1.0;      // nutrient diffusivity
    double kappa = 1.0;  // boundary permeability for the nutrient
    double eps = 0.01;   // Yosida parameter

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Model {
    CosineBasis basis;
    ConstitutiveSet constitutive;
    InteractionMatrix c;
    ModelParams params;
    RhoStar rho_star;

    Model(BasisSpec spec, ConstitutiveSet cs, InteractionMatrix cm, ModelParams p, RhoStar rs)
        : basis(spec), constitutive(cs), c(cm), params(p), rho_star(std::move(rs))
    {
        if (!(p.nu > 0) || !(p.D > 0) || !(p.kappa >= 0) || !(p.eps > 0)) {
            throw std::invalid_argument("Model: nu, D, eps must be positive and kappa nonnegative");
        }
    }

    YosidaParams yosida() const { return YosidaParams(params.eps); }
};

/// phi[0..2] and rho as cosine coefficients, w on the grid.
struct State {
    double t = 0.0;
    std::array<ModalField, 3> phi;
    ModalField rho;
    GridField w;

    friend bool operator==(const State&, const State&) = default;
};

/// Grid values of the modal fields, plus their means.
struct NodalState {
    std::array<GridField, 3> phi;
    GridField rho;
    std::array<double, 3> mean{};

    PhaseVec phase(std::size_t j) const { return {phi[1].values[j], phi[2].values[j]}; }
};

inline NodalState evaluate_nodes(const Model& m, const State& s)
{
    NodalState n;
    for (int i = 0; i < 3; ++i) {
        n.phi[i] = m.basis.inverse(s.phi[i]);
        n.mean[i] = CosineBasis::mean(s.phi[i]);
    }
    n.rho = m.basis.inverse(s.rho);
    return n;
}

/// Pointwise p = f^{-1}(phi0 - w).
inline GridField pressure(const Model& m, const NodalState& n, const GridField& w)
{
    GridField p = m.basis.zero_grid();
    for (std::size_t j = 0; j < p.values.size(); ++j) {
        p.values[j] = m.constitutive.f.inverse(n.phi[0].values[j] - w.values[j]);
    }
    return p;
}
inline GridField pressure(const Model& m, const State& s) { return pressure(m, evaluate_nodes(m, s), s.w); }

/// Chemical potentials as Galerkin coefficients: mu0 = P_m p and
/// mu_i = -Lap phi_i + P_m(d_i psi^eps + d_i g + d_i E w^2 / 2), i = 1, 2.
struct Mu {
    std::array<ModalField, 3> mu;
};

/// The pointwise part d_i(psi^eps + g) + d_i E w^2 / 2 on the grid, i = 1, 2.
inline std::array<GridField, 2> potential_gradient(const Model& m, const NodalState& n, const GridField& w)
{
    const auto eps = m.yosida();
    const auto& cs = m.constitutive;
    std::array<GridField, 2> out{m.basis.zero_grid(), m.basis.zero_grid()};
    for (std::size_t j = 0; j < w.values.size(); ++j) {
        const PhaseVec p = n.phase(j);
        const double half_w2 = 0.5 * w.values[j] * w.values[j];
        const PhaseVec gy = yosida_grad(p, eps);
        const PhaseVec gg = cs.g.grad(p);
        const PhaseVec ge = cs.E.grad(p);
        out[0].values[j] = gy.phi1 + gg.phi1 + ge.phi1 * half_w2;
        out[1].values[j] = gy.phi2 + gg.phi2 + ge.phi2 * half_w2;
    }
    return out;
}

inline Mu chemical_potentials(const Model& m, const State& s, const NodalState& n)
{
    Mu out;
    out.mu[0] = m.basis.forward(pressure(m, n, s.w));
    const auto grad = potential_gradient(m, n, s.w);
    for (int i = 1; i < 3; ++i) {
        ModalField mu = m.basis.forward(grad[i - 1]);
        for (std::size_t k = 0; k < mu.coeffs.size(); ++k) {
            mu.coeffs[k] += m.basis.eigenvalue(k) * s.phi[i].coeffs[k];
        }
        out.mu[i] = std::move(mu);
    }
    return out;
}
inline Mu chemical_potentials(const Model& m, const State& s) { return chemical_potentials(m, s, evaluate_nodes(m, s)); }

namespace detail {
inline std::string full_digits(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Tolerance below 1 accepted for the phase-sum denominators.
inline constexpr double kDenominatorTolerance = 1e-8;

/// |phi0| + |phi1| + |phi2| at every node; throws if any value is below 1 - tol.
inline GridField phase_denominator(const NodalState& n)
{
    GridField den{std::vector<double>(n.phi[0].values.size())};
    for (std::size_t j = 0; j < den.values.size(); ++j) {
        const double d = std::abs(n.phi[0].values[j]) + std::abs(n.phi[1].values[j]) + std::abs(n.phi[2].values[j]);
        if (!(d >= 1.0 - kDenominatorTolerance)) {
            throw DenominatorError("phase denominator " + detail::full_digits(d) + " < 1 at node " + std::to_string(j));
        }
        den.values[j] = d;
    }
    return den;
}

struct Sources {
    GridField Q;
    std::array<GridField, 3> S;
};

/// S0 = -Q (1 - phi0), S_i = Q phi_i with
/// Q = gamma(rho) mean(phi0) / ((|phi0|+|phi1|+|phi2|)(|mean phi0|+|mean phi1|+|mean phi2|)).
inline Sources sources(const Model& m, const NodalState& n)
{
    const GridField den = phase_denominator(n);
    const double den_mean = std::abs(n.mean[0]) + std::abs(n.mean[1]) + std::abs(n.mean[2]);
    if (!(den_mean >= 1.0 - kDenominatorTolerance)) {
        throw DenominatorError("mean phase denominator " + detail::full_digits(den_mean) + " < 1");
    }
    const std::size_t count = den.values.size();
    Sources out{GridField{std::vector<double>(count)},
                {GridField{std::vector<double>(count)}, GridField{std::vector<double>(count)},
                 GridField{std::vector<double>(count)}}};
    for (std::size_t j = 0; j < count; ++j) {
        const double q = m.constitutive.gamma.value(n.rho.values[j]) * n.mean[0] / (den.values[j] * den_mean);
        out.Q.values[j] = q;
        out.S[0].values[j] = -q * (1.0 - n.phi[0].values[j]);
        out.S[1].values[j] = q * n.phi[1].values[j];
        out.S[2].values[j] = q * n.phi[2].values[j];
    }
    return out;
}
inline Sources sources(const Model& m, const State& s) { return sources(m, evaluate_nodes(m, s)); }

struct FreeEnergy {
    double F = 0.0;      // full energy including the nutrient part
    double F0eps = 0.0;  // reduced energy without rho^2 / 2
    struct Parts {
        double pressure = 0.0;      // int Fhat(phi0 - w)
        double yosida = 0.0;        // int psi^eps
        double perturbation = 0.0;  // int g
        double elastic = 0.0;       // int E w^2 / 2
        double gradient = 0.0;      // int |grad phi1|^2 / 2 + |grad phi2|^2 / 2
        double nutrient = 0.0;      // int rho^2 / 2
    } parts;
};

inline FreeEnergy free_energy(const Model& m, const State& s, const NodalState& n)
{
    const auto eps = m.yosida();
    const auto& cs = m.constitutive;
    FreeEnergy e;
    double fp = 0.0, fy = 0.0, fg = 0.0, fe = 0.0;
    for (std::size_t j = 0; j < s.w.values.size(); ++j) {
        const PhaseVec p = n.phase(j);
        const double w = s.w.values[j];
        fp += cs.f.energy(n.phi[0].values[j] - w);
        fy += yosida_val(p, eps);
        fg += cs.g.value(p);
        fe += 0.5 * cs.E.value(p) * w * w;
    }
    const double wt = m.basis.weight();
    e.parts.pressure = fp * wt;
    e.parts.yosida = fy * wt;
    e.parts.perturbation = fg * wt;
    e.parts.elastic = fe * wt;
    e.parts.gradient = 0.5 * (m.basis.gradient_norm_sq(s.phi[1]) + m.basis.gradient_norm_sq(s.phi[2]));
    e.parts.nutrient = 0.5 * CosineBasis::l2_norm_sq(s.rho);
    e.F0eps = e.parts.pressure + e.parts.yosida + e.parts.perturbation + e.parts.elastic + e.parts.gradient;
    e.F = e.F0eps + e.parts.nutrient;
    return e;
}
inline FreeEnergy free_energy(const Model& m, const State& s) { return free_energy(m, s, evaluate_nodes(m, s)); }

}  // namespace tumorsim
