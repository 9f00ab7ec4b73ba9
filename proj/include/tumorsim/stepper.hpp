#pragma once

// Time integration of the Galerkin system. IMEX1 treats the biharmonic
// coupling, the linearized pressure diffusion, nutrient diffusion and the
// E w relaxation implicitly; everything else is explicit. RK4 is the
// integrating-factor (Lawson) form of classical RK4 and serves as reference.

#include "tumorsim/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tumorsim {

enum class SchemeKind { imex1, rk4 };

struct SchemeConfig {
    double dt = 1e-4;
    double t_end = 0.5;
    SchemeKind kind = SchemeKind::imex1;
    int output_every = 100;

    void validate() const
    {
        if (!(dt > 0) || !std::isfinite(dt)) {
            throw std::invalid_argument("scheme.dt must be positive");
        }
        if (!(t_end >= 0) || !std::isfinite(t_end)) {
            throw std::invalid_argument("scheme.t_end must be nonnegative");
        }
        if (output_every < 1) {
            throw std::invalid_argument("scheme.output_every must be at least 1");
        }
    }

    /// Number of steps to reach t_end (the last one may be shortened).
    long steps() const
    {
        const double n = t_end / dt;
        const long r = std::lround(n);
        return std::abs(n - static_cast<double>(r)) < 1e-9 * std::max(1.0, n) ? r : static_cast<long>(std::ceil(n));
    }

    friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

class SingularModeError : public std::runtime_error {
public:
    SingularModeError(std::size_t k, double dt)
        : std::runtime_error("implicit matrix singular for mode " + std::to_string(k) + " at dt = " + std::to_string(dt)),
          mode(k), step(dt)
    {
    }
    std::size_t mode;
    double step;
};

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

namespace detail {

inline Vec3 mat_vec(const Mat3& a, const Vec3& x)
{
    Vec3 y{};
    for (int i = 0; i < 3; ++i) {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2];
    }
    return y;
}

inline Mat3 mul(const Mat3& a, const Mat3& b)
{
    Mat3 c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    return c;
}

inline Mat3 identity3()
{
    return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

inline double norm1(const Mat3& a)
{
    double best = 0.0;
    for (int j = 0; j < 3; ++j) {
        best = std::max(best, std::abs(a[0][j]) + std::abs(a[1][j]) + std::abs(a[2][j]));
    }
    return best;
}

/// Inverse by cofactors; returns false when the determinant is negligible
/// relative to the entry scale.
inline bool invert(const Mat3& a, Mat3& inv)
{
    const double c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    const double c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    const double c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    const double det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    const double scale = norm1(a);
    if (!std::isfinite(det) || std::abs(det) <= 1e-14 * scale * scale * scale) {
        return false;
    }
    const double r = 1.0 / det;
    inv[0] = {c00 * r, (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * r, (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * r};
    inv[1] = {c01 * r, (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * r, (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * r};
    inv[2] = {c02 * r, (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * r, (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * r};
    return true;
}

/// exp(A) by scaling and squaring with a diagonal [6/6] Pade approximant.
inline Mat3 expm(Mat3 a)
{
    int s = 0;
    const double nrm = norm1(a);
    if (nrm > 0.5) {
        s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
        const double f = std::ldexp(1.0, -s);
        for (auto& row : a) {
            for (auto& v : row) {
                v *= f;
            }
        }
    }
    static constexpr std::array<double, 7> c = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0,
                                                1.0 / 665280.0};
    Mat3 num = identity3(), den = identity3(), pw = identity3();
    for (int k = 1; k <= 6; ++k) {
        pw = mul(pw, a);
        const double sign = (k % 2) ? -1.0 : 1.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                num[i][j] += c[k] * pw[i][j];
                den[i][j] += sign * c[k] * pw[i][j];
            }
        }
    }
    Mat3 dinv;
    if (!invert(den, dinv)) {
        throw std::runtime_error("expm: Pade denominator singular");
    }
    Mat3 r = mul(dinv, num);
    for (int k = 0; k < s; ++k) {
        r = mul(r, r);
    }
    return r;
}

}  // namespace detail

/// Time derivative of every unknown, in the unknowns' own representation.
struct Tendency {
    std::array<ModalField, 3> phi;
    ModalField rho;
    GridField w;
};

/// Everything computed from one state when assembling the right-hand side.
struct Evaluation {
    NodalState nodes;
    Mu mu;
    GridField p;
    GridField den;
    Sources src;
    Tendency rate;  // full semi-discrete right-hand side
};

/// Slope of f used in the implicit pressure channel: a for the linear law,
/// otherwise f' at f^{-1}(mean(phi0 - w)).
inline double frozen_slope(const Model& m, const State& s)
{
    const auto& f = m.constitutive.f;
    if (f.kind == PressureLaw::Kind::linear) {
        return f.a;
    }
    const double z = CosineBasis::mean(s.phi[0]) - m.basis.mean(s.w);
    return f.slope(f.inverse(z));
}

/// Stiff linear generator M_k of the phase block for mode k: the phi tendency
/// contains -M_k (phi0, phi1, phi2)_k.
inline Mat3 mode_operator(const Model& m, std::size_t k, double slope)
{
    const double lam = m.basis.eigenvalue(k);
    Mat3 op{};
    for (int i = 0; i < 3; ++i) {
        op[i][0] = lam * m.c.c[i][0] / slope;
        op[i][1] = lam * lam * m.c.c[i][1];
        op[i][2] = lam * lam * m.c.c[i][2];
    }
    return op;
}

inline Evaluation evaluate(const Model& m, const State& s)
{
    const auto& b = m.basis;
    Evaluation ev;
    ev.nodes = evaluate_nodes(m, s);
    ev.mu = chemical_potentials(m, s, ev.nodes);
    ev.p = pressure(m, ev.nodes, s.w);
    ev.den = phase_denominator(ev.nodes);
    ev.src = sources(m, ev.nodes);

    Tendency& r = ev.rate;
    for (int i = 0; i < 3; ++i) {
        r.phi[i] = b.forward(ev.src.S[i]);
        for (std::size_t k = 0; k < r.phi[i].coeffs.size(); ++k) {
            const double lam = b.eigenvalue(k);
            double flux = 0.0;
            for (int j = 0; j < 3; ++j) {
                flux += m.c.c[i][j] * ev.mu.mu[j].coeffs[k];
            }
            r.phi[i].coeffs[k] -= lam * flux;
        }
    }

    GridField arho = b.zero_grid();
    for (std::size_t j = 0; j < arho.values.size(); ++j) {
        arho.values[j] = m.constitutive.A.value(ev.nodes.phase(j)) * ev.nodes.rho.values[j];
    }
    r.rho = b.forward(arho);
    BoundaryField gap = b.boundary_trace(s.rho);
    const double rs = m.rho_star.value(s.t);
    for (double& v : gap.values) {
        v -= rs;
    }
    const ModalField load = b.boundary_load(gap);
    for (std::size_t k = 0; k < r.rho.coeffs.size(); ++k) {
        r.rho.coeffs[k] = -m.params.D * b.eigenvalue(k) * s.rho.coeffs[k] - r.rho.coeffs[k] - m.params.kappa * load.coeffs[k];
    }

    GridField h = b.zero_grid();
    for (std::size_t j = 0; j < h.values.size(); ++j) {
        h.values[j] = m.constitutive.E.value(ev.nodes.phase(j)) * s.w.values[j] - ev.p.values[j] / ev.den.values[j];
    }
    const double hbar = b.mean(h);
    r.w = b.zero_grid();
    for (std::size_t j = 0; j < h.values.size(); ++j) {
        r.w.values[j] = (hbar - h.values[j]) / m.params.nu;
    }
    return ev;
}

/// Full right-hand side of the semi-discrete system.
inline Tendency rhs(const Model& m, const State& s) { return evaluate(m, s).rate; }

/// Right-hand side with the stiff linear parts removed: phi block without
/// -M_k u_k, rho without -D lambda_k rho_k. The w tendency is returned in full.
inline Tendency rhs_explicit(const Model& m, const State& s, const Evaluation& ev, double slope)
{
    Tendency r = ev.rate;
    for (std::size_t k = 0; k < r.rho.coeffs.size(); ++k) {
        const Mat3 op = mode_operator(m, k, slope);
        const Vec3 u{s.phi[0].coeffs[k], s.phi[1].coeffs[k], s.phi[2].coeffs[k]};
        const Vec3 mu = detail::mat_vec(op, u);
        for (int i = 0; i < 3; ++i) {
            r.phi[i].coeffs[k] += mu[i];
        }
        r.rho.coeffs[k] += m.params.D * m.basis.eigenvalue(k) * s.rho.coeffs[k];
    }
    return r;
}

/// Per-step statistics of the implicit solves.
struct StepInfo {
    double max_condition = 1.0;  // 1-norm condition number of I + dt M_k
    int substeps = 1;
};

/// Semi-implicit w update: E w implicit pointwise, pressure and mean explicit,
/// then the mean is removed.
inline GridField step_w(const Model& m, const State& s, const Evaluation& ev, double dt)
{
    const auto& b = m.basis;
    GridField w = s.w;
    for (std::size_t j = 0; j < w.values.size(); ++j) {
        const double e = m.constitutive.E.value(ev.nodes.phase(j));
        const double rate_explicit = ev.rate.w.values[j] + e * s.w.values[j] / m.params.nu;
        w.values[j] = (s.w.values[j] + dt * rate_explicit) / (1.0 + dt * e / m.params.nu);
    }
    const double wbar = b.mean(w);
    for (double& v : w.values) {
        v -= wbar;
    }
    return w;
}

inline State step_imex(const Model& m, const State& s, double dt, StepInfo* info = nullptr)
{
    const Evaluation ev = evaluate(m, s);
    const double slope = frozen_slope(m, s);
    const Tendency ex = rhs_explicit(m, s, ev, slope);

    State out;
    out.t = s.t + dt;
    out.phi = s.phi;
    out.rho = s.rho;
    double cond = 1.0;
    for (std::size_t k = 0; k < s.rho.coeffs.size(); ++k) {
        Mat3 a = mode_operator(m, k, slope);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                a[i][j] = (i == j ? 1.0 : 0.0) + dt * a[i][j];
            }
        }
        Mat3 inv;
        if (!detail::invert(a, inv)) {
            throw SingularModeError(k, dt);
        }
        cond = std::max(cond, detail::norm1(a) * detail::norm1(inv));
        Vec3 r;
        for (int i = 0; i < 3; ++i) {
            r[i] = s.phi[i].coeffs[k] + dt * ex.phi[i].coeffs[k];
        }
        const Vec3 u = detail::mat_vec(inv, r);
        for (int i = 0; i < 3; ++i) {
            out.phi[i].coeffs[k] = u[i];
        }
        out.rho.coeffs[k] = (s.rho.coeffs[k] + dt * ex.rho.coeffs[k]) / (1.0 + dt * m.params.D * m.basis.eigenvalue(k));
    }
    out.w = step_w(m, s, ev, dt);
    if (info) {
        info->max_condition = cond;
        info->substeps = 1;
    }
    return out;
}

/// Stability limit for the explicit part of the Lawson RK4 scheme, from a
/// bound on the Jacobian of the non-stiff terms.
inline double rk4_substep_limit(const Model& m)
{
    double cnorm = 0.0;
    for (int i = 0; i < 3; ++i) {
        cnorm = std::max(cnorm, std::abs(m.c.c[i][0]) + std::abs(m.c.c[i][1]) + std::abs(m.c.c[i][2]));
    }
    double lam_max = 0.0;
    for (std::size_t k = 0; k < m.basis.mode_count(); ++k) {
        lam_max = std::max(lam_max, m.basis.eigenvalue(k));
    }
    const auto& cs = m.constitutive;
    // Second derivatives of the pointwise potential: Yosida (1/eps), g (about alpha),
    // the E w^2/2 term, and the nonlinear remainder of the pressure law.
    const double curvature = 1.0 / m.params.eps + 2.0 * std::abs(cs.g.alpha) + 2.0 * cs.K
                             + (cs.f.kind == PressureLaw::Kind::linear ? 0.0 : 1.0 / cs.f.f0 - 1.0 / cs.f.f1);
    // Trace of the Robin operator bounds its norm.
    double boundary = 0.0;
    for (std::size_t k = 0; k < m.basis.mode_count(); ++k) {
        ModalField e = m.basis.zero_modal();
        e.coeffs[k] = 1.0;
        BoundaryField tr = m.basis.boundary_trace(e);
        for (double& v : tr.values) {
            v *= v;
        }
        boundary += m.basis.boundary_integrate(tr);
    }
    const double rate = cnorm * lam_max * curvature + m.params.kappa * boundary + cs.K + (cs.K + 1.0) / m.params.nu;
    return 2.5 / rate;
}

namespace detail {

struct LawsonCache {
    double h = -1.0;
    double slope = 0.0;
    std::vector<Mat3> half;     // exp(-h/2 M_k)
    std::vector<double> rhalf;  // exp(-h/2 D lambda_k)
};

inline void lawson_prepare(const Model& m, double h, double slope, LawsonCache& c)
{
    if (c.h == h && c.slope == slope) {
        return;
    }
    c.h = h;
    c.slope = slope;
    const std::size_t n = m.basis.mode_count();
    c.half.resize(n);
    c.rhalf.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        Mat3 a = mode_operator(m, k, slope);
        for (auto& row : a) {
            for (auto& v : row) {
                v *= -0.5 * h;
            }
        }
        c.half[k] = expm(a);
        c.rhalf[k] = std::exp(-0.5 * h * m.params.D * m.basis.eigenvalue(k));
    }
}

/// y <- E y for the half-step propagator E (w is left unchanged).
inline void propagate(const LawsonCache& c, State& y)
{
    for (std::size_t k = 0; k < c.half.size(); ++k) {
        const Vec3 u = mat_vec(c.half[k], Vec3{y.phi[0].coeffs[k], y.phi[1].coeffs[k], y.phi[2].coeffs[k]});
        for (int i = 0; i < 3; ++i) {
            y.phi[i].coeffs[k] = u[i];
        }
        y.rho.coeffs[k] *= c.rhalf[k];
    }
}
inline void propagate(const LawsonCache& c, Tendency& y)
{
    for (std::size_t k = 0; k < c.half.size(); ++k) {
        const Vec3 u = mat_vec(c.half[k], Vec3{y.phi[0].coeffs[k], y.phi[1].coeffs[k], y.phi[2].coeffs[k]});
        for (int i = 0; i < 3; ++i) {
            y.phi[i].coeffs[k] = u[i];
        }
        y.rho.coeffs[k] *= c.rhalf[k];
    }
}

/// y += a * r
inline void axpy(State& y, double a, const Tendency& r)
{
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < y.phi[i].coeffs.size(); ++k) {
            y.phi[i].coeffs[k] += a * r.phi[i].coeffs[k];
        }
    }
    for (std::size_t k = 0; k < y.rho.coeffs.size(); ++k) {
        y.rho.coeffs[k] += a * r.rho.coeffs[k];
    }
    for (std::size_t j = 0; j < y.w.values.size(); ++j) {
        y.w.values[j] += a * r.w.values[j];
    }
}

inline Tendency explicit_part(const Model& m, const State& s, double slope)
{
    const Evaluation ev = evaluate(m, s);
    return rhs_explicit(m, s, ev, slope);
}

}  // namespace detail

/// One Lawson RK4 step of size h with the stiff linear part integrated
/// exactly. With E = exp(-h L / 2):
///   u+ = E^2 u + h/6 (E^2 k1 + 2 E (k2 + k3) + k4).
inline State lawson_rk4_step(const Model& m, const State& s, double h, double slope, detail::LawsonCache& cache)
{
    using detail::axpy;
    using detail::propagate;
    detail::lawson_prepare(m, h, slope, cache);

    const Tendency k1 = detail::explicit_part(m, s, slope);

    State y2 = s;
    axpy(y2, 0.5 * h, k1);
    propagate(cache, y2);
    y2.t = s.t + 0.5 * h;
    const Tendency k2 = detail::explicit_part(m, y2, slope);

    State eu = s;
    propagate(cache, eu);
    State y3 = eu;
    axpy(y3, 0.5 * h, k2);
    y3.t = s.t + 0.5 * h;
    const Tendency k3 = detail::explicit_part(m, y3, slope);

    State y4 = eu;
    axpy(y4, h, k3);
    propagate(cache, y4);
    y4.t = s.t + h;
    const Tendency k4 = detail::explicit_part(m, y4, slope);

    State out = s;
    axpy(out, h / 6.0, k1);
    propagate(cache, out);
    axpy(out, h / 3.0, k2);
    axpy(out, h / 3.0, k3);
    propagate(cache, out);
    axpy(out, h / 6.0, k4);
    out.t = s.t + h;
    const double wbar = m.basis.mean(out.w);
    for (double& v : out.w.values) {
        v -= wbar;
    }
    return out;
}

/// Reference step: Lawson RK4 over dt, split into equal substeps below the
/// stability limit of the explicit part.
inline State step_rk4(const Model& m, const State& s, double dt, detail::LawsonCache& cache, StepInfo* info = nullptr)
{
    const int n = std::max(1, static_cast<int>(std::ceil(dt / rk4_substep_limit(m))));
    const double h = dt / n;
    const double slope = frozen_slope(m, s);
    State y = s;
    for (int i = 0; i < n; ++i) {
        y = lawson_rk4_step(m, y, h, slope, cache);
    }
    y.t = s.t + dt;
    if (info) {
        info->substeps = n;
        info->max_condition = 1.0;
    }
    return y;
}

}  // namespace tumorsim
