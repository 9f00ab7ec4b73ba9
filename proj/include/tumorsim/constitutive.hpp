#pragma once

// Named constitutive curves: pressure law f, growth rate gamma, elasticity E,
// nutrient consumption A and the smooth perturbation g of the phase potential.

#include "tumorsim/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tumorsim {

class PressureInversionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// 16-point Gauss-Legendre rule on [a, b], split into panels of width <= 1.
template <class F>
double gauss_legendre(F&& f, double a, double b)
{
    static constexpr std::array<double, 8> x = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                                0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                                0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> w = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                                0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                                0.0622535239386479, 0.0271524594117541};
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a))));
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
        }
        total += s * half;
    }
    return total;
}

/// C^2 step from 1 (t <= 0) to 0 (t >= 1).
inline double smooth_cutoff(double t)
{
    if (t <= 0.0) {
        return 1.0;
    }
    if (t >= 1.0) {
        return 0.0;
    }
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
inline double smooth_cutoff_derivative(double t)
{
    if (t <= 0.0 || t >= 1.0) {
        return 0.0;
    }
    return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}

}  // namespace detail

/// Increasing pressure law w = phi0 - f(p), with f0 <= f' <= f1.
struct PressureLaw {
    enum class Kind { linear, softplus };
    Kind kind = Kind::linear;
    double a = 1.0;   // slope of the linear law
    double z0 = 0.5;  // f(0)
    double f0 = 0.9;
    double f1 = 1.1;

    double value(double p) const
    {
        if (kind == Kind::linear) {
            return z0 + a * p;
        }
        return z0 + f0 * p + (f1 - f0) * (detail::softplus(p) - std::numbers::ln2);
    }

    double slope(double p) const
    {
        if (kind == Kind::linear) {
            return a;
        }
        return f0 + (f1 - f0) * detail::logistic(p);
    }

    /// f^{-1}(z). Linear law in closed form, otherwise safeguarded Newton to |f(p) - z| <= 1e-12.
    double inverse(double z) const
    {
        if (kind == Kind::linear) {
            return (z - z0) / a;
        }
        const double d = z - z0;
        double lo = std::min(d / f0, d / f1);
        double hi = std::max(d / f0, d / f1);
        double p = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double r = value(p) - z;
            // The second test only triggers for |z| so large that 1e-12 is below roundoff.
            if (std::abs(r) <= 1e-12 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(p)) {
                return p;
            }
            if (r > 0) {
                hi = p;
            } else {
                lo = p;
            }
            double next = p - r / slope(p);
            if (!(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            p = next;
        }
        throw PressureInversionError("pressure law inversion did not converge for z = " + std::to_string(z));
    }

    /// Fhat(z) = int_{z0}^{z} f^{-1}(s) ds.
    double energy(double z) const
    {
        if (kind == Kind::linear) {
            return (z - z0) * (z - z0) / (2.0 * a);
        }
        // Substituting s = f(q): Fhat = int_0^{p} q f'(q) dq with p = f^{-1}(z).
        const double p = inverse(z);
        return detail::gauss_legendre([this](double q) { return q * slope(q); }, 0.0, p);
    }

    friend bool operator==(const PressureLaw&, const PressureLaw&) = default;
};

/// Nutrient-dependent growth rate.
struct GrowthRate {
    enum class Kind { tanh, constant };
    Kind kind = Kind::tanh;
    double amp = 0.5;
    double scale = 1.0;
    double constant = 0.5;

    double value(double rho) const { return kind == Kind::tanh ? amp * std::tanh(rho / scale) : constant; }
    double derivative(double rho) const
    {
        if (kind == Kind::constant) {
            return 0.0;
        }
        const double t = std::tanh(rho / scale);
        return amp * (1.0 - t * t) / scale;
    }
    /// sup |gamma|.
    double bound() const { return kind == Kind::tanh ? std::abs(amp) : std::abs(constant); }
    /// sup |gamma'|.
    double lipschitz() const { return kind == Kind::tanh ? std::abs(amp / scale) : 0.0; }

    friend bool operator==(const GrowthRate&, const GrowthRate&) = default;
};

/// Identity on [0, 1], saturating smoothly towards [-sigma, 1 + sigma] outside (C^1).
/// sigma = 0 gives the hard clamp.
inline double soft_clamp(double x, double sigma)
{
    if (x >= 0.0 && x <= 1.0) {
        return x;
    }
    if (sigma <= 0.0) {
        return std::clamp(x, 0.0, 1.0);
    }
    return x < 0.0 ? sigma * std::tanh(x / sigma) : 1.0 + sigma * std::tanh((x - 1.0) / sigma);
}
inline double soft_clamp_derivative(double x, double sigma)
{
    if (x >= 0.0 && x <= 1.0) {
        return 1.0;
    }
    if (sigma <= 0.0) {
        return 0.0;
    }
    const double t = x < 0.0 ? std::tanh(x / sigma) : std::tanh((x - 1.0) / sigma);
    return 1.0 - t * t;
}

/// Elasticity modulus E(phi1, phi2) = base + slope * soft_clamp(phi2).
struct Elasticity {
    enum class Kind { clamp_linear, constant };
    Kind kind = Kind::clamp_linear;
    double base = 0.5;
    double slope = 0.5;
    double sigma = 0.5;
    double constant = 1.0;

    double value(PhaseVec p) const
    {
        return kind == Kind::constant ? constant : base + slope * soft_clamp(p.phi2, sigma);
    }
    PhaseVec grad(PhaseVec p) const
    {
        if (kind == Kind::constant) {
            return {0.0, 0.0};
        }
        return {0.0, slope * soft_clamp_derivative(p.phi2, sigma)};
    }

    friend bool operator==(const Elasticity&, const Elasticity&) = default;
};

/// Consumption rate A(phi1, phi2) = base + slope * clamp(phi2, 0, 1). Only
/// Lipschitz continuity is needed since A is never differentiated.
struct Consumption {
    enum class Kind { clamp_linear, constant };
    Kind kind = Kind::clamp_linear;
    double base = 0.0;
    double slope = 0.5;
    double constant = 0.5;

    double value(PhaseVec p) const
    {
        return kind == Kind::constant ? constant : base + slope * std::clamp(p.phi2, 0.0, 1.0);
    }

    friend bool operator==(const Consumption&, const Consumption&) = default;
};

/// Non-convex perturbation g = alpha phi1 phi2 chi(|phi|), chi a C^2 cutoff
/// equal to 1 for |phi| <= r_inner and 0 for |phi| >= r_outer.
struct Perturbation {
    enum class Kind { product, zero };
    Kind kind = Kind::product;
    double alpha = 2.0;
    double r_inner = 2.0;
    double r_outer = 3.0;

    double value(PhaseVec p) const
    {
        if (kind == Kind::zero) {
            return 0.0;
        }
        return alpha * p.phi1 * p.phi2 * cutoff(norm(p));
    }

    PhaseVec grad(PhaseVec p) const
    {
        if (kind == Kind::zero) {
            return {0.0, 0.0};
        }
        const double r = norm(p);
        const double chi = cutoff(r);
        PhaseVec out{alpha * p.phi2 * chi, alpha * p.phi1 * chi};
        if (r > r_inner && r < r_outer) {
            const double dchi = detail::smooth_cutoff_derivative((r - r_inner) / (r_outer - r_inner)) / (r_outer - r_inner);
            const double c = alpha * p.phi1 * p.phi2 * dchi / r;
            out.phi1 += c * p.phi1;
            out.phi2 += c * p.phi2;
        }
        return out;
    }

    /// C_g = sup{|g|, |grad g|, |<grad g, phi>|}, by dense polar sampling of the support.
    double sup_bound() const
    {
        if (kind == Kind::zero) {
            return 0.0;
        }
        double best = 0.0;
        constexpr int radial = 400;
        constexpr int angular = 720;
        for (int i = 0; i <= radial; ++i) {
            const double r = r_outer * i / radial;
            for (int j = 0; j < angular; ++j) {
                const double th = 2.0 * std::numbers::pi * j / angular;
                const PhaseVec p{r * std::cos(th), r * std::sin(th)};
                const PhaseVec gr = grad(p);
                best = std::max({best, std::abs(value(p)), norm(gr), std::abs(dot(gr, p))});
            }
        }
        return best * 1.01;
    }

    friend bool operator==(const Perturbation&, const Perturbation&) = default;

private:
    double cutoff(double r) const { return detail::smooth_cutoff((r - r_inner) / (r_outer - r_inner)); }
};

struct ConstitutiveSet {
    PressureLaw f;
    GrowthRate gamma;
    Elasticity E;
    Consumption A;
    Perturbation g;
    double K = 1.5;

    friend bool operator==(const ConstitutiveSet&, const ConstitutiveSet&) = default;
};

}  // namespace tumorsim
