#pragma once

// Convex-analysis core for the phase constraint. The admissible set is the
// triangle Theta = {phi1 >= 0, phi2 >= 0, phi1 + phi2 <= 1}; psi is its
// indicator, so the resolvent J^eps is the Euclidean projection onto Theta and
// does not depend on eps.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tumorsim {

struct PhaseVec {
    double phi1 = 0.0;
    double phi2 = 0.0;

    friend constexpr PhaseVec operator+(PhaseVec a, PhaseVec b) { return {a.phi1 + b.phi1, a.phi2 + b.phi2}; }
    friend constexpr PhaseVec operator-(PhaseVec a, PhaseVec b) { return {a.phi1 - b.phi1, a.phi2 - b.phi2}; }
    friend constexpr PhaseVec operator*(double s, PhaseVec a) { return {s * a.phi1, s * a.phi2}; }
    friend constexpr PhaseVec operator/(PhaseVec a, double s) { return {a.phi1 / s, a.phi2 / s}; }
    friend constexpr bool operator==(PhaseVec, PhaseVec) = default;
};

constexpr double dot(PhaseVec a, PhaseVec b) { return a.phi1 * b.phi1 + a.phi2 * b.phi2; }
inline double norm(PhaseVec a) { return std::hypot(a.phi1, a.phi2); }

/// Regularization parameter of the Yosida approximation.
class YosidaParams {
public:
    explicit YosidaParams(double epsilon) : epsilon_(epsilon)
    {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw std::invalid_argument("YosidaParams: epsilon must be a positive finite number, got "
                                        + std::to_string(epsilon));
        }
    }
    double epsilon() const { return epsilon_; }

private:
    double epsilon_;
};

/// Inner margin delta of Theta_delta; valid range is the open interval (0, 1 - 1/sqrt(2)).
class ThetaDelta {
public:
    static constexpr double upper_limit() { return 1.0 - 0.70710678118654752440; }

    explicit ThetaDelta(double delta) : delta_(delta)
    {
        if (!(delta > 0.0) || !(delta < upper_limit())) {
            throw std::invalid_argument("ThetaDelta: delta must lie in (0, 1 - 1/sqrt(2)), got "
                                        + std::to_string(delta));
        }
    }
    double delta() const { return delta_; }

    /// delta * exp(-K T - 2), the shrunken margin used over a horizon T.
    double horizon_margin(double K, double T) const { return delta_ * std::exp(-K * T - 2.0); }

private:
    double delta_;
};

constexpr bool in_theta(PhaseVec p)
{
    return p.phi1 >= 0.0 && p.phi2 >= 0.0 && p.phi1 + p.phi2 <= 1.0;
}

/// Euclidean projection onto Theta by normal-cone case analysis.
constexpr PhaseVec project_theta(PhaseVec p)
{
    const double x = p.phi1;
    const double y = p.phi2;
    if (in_theta(p)) {
        return p;
    }
    if (x <= 0.0 && y <= 0.0) {
        return {0.0, 0.0};
    }
    if (x - y >= 1.0 && x >= 1.0) {
        return {1.0, 0.0};
    }
    if (y - x >= 1.0 && y >= 1.0) {
        return {0.0, 1.0};
    }
    if (x + y > 1.0) {
        // Remaining outside points above the hypotenuse have |x - y| < 1.
        return {0.5 * (1.0 + x - y), 0.5 * (1.0 - x + y)};
    }
    if (x < 0.0) {
        return {0.0, y};  // 0 < y < 1 here
    }
    return {x, 0.0};  // y < 0, 0 < x < 1
}

inline double dist_theta(PhaseVec p) { return norm(p - project_theta(p)); }

/// Gradient of the Yosida approximation, (phi - J phi) / eps.
inline PhaseVec yosida_grad(PhaseVec p, const YosidaParams& eps)
{
    return (p - project_theta(p)) / eps.epsilon();
}

/// Yosida approximation of the indicator: dist(phi, Theta)^2 / (2 eps).
inline double yosida_val(PhaseVec p, const YosidaParams& eps)
{
    const PhaseVec d = p - project_theta(p);
    return dot(d, d) / (2.0 * eps.epsilon());
}

/// Distance to the boundary of Theta for points inside Theta: the smallest of
/// the three edge distances. Negative outside Theta.
inline double boundary_distance(PhaseVec p)
{
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return std::min({p.phi1, p.phi2, (1.0 - p.phi1 - p.phi2) * inv_sqrt2});
}

inline bool in_theta_delta(PhaseVec p, double delta)
{
    return in_theta(p) && boundary_distance(p) >= delta;
}

}  // namespace tumorsim
