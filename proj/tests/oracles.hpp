#pragma once

// Independent reference computations used only by the test suites. Nothing in
// here calls into the library's projection or transform code.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

struct GridProjection {
    double phi1;
    double phi2;
    double distance;
};

/// Nearest point of the triangle {a >= 0, b >= 0, a + b <= 1} among the lattice
/// points with the given spacing (brute force).
inline GridProjection brute_force_projection(double x, double y, double spacing = 1e-3)
{
    const int n = static_cast<int>(std::lround(1.0 / spacing));
    GridProjection best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int i = 0; i <= n; ++i) {
        const double a = i * spacing;
        for (int j = 0; i + j <= n; ++j) {
            const double b = j * spacing;
            const double d = std::hypot(x - a, y - b);
            if (d < best.distance) {
                best = {a, b, d};
            }
        }
    }
    return best;
}

/// Dense midpoint quadrature of f(x) on [0, 1].
inline double midpoint_integral(const std::function<double(double)>& f, int nodes)
{
    double s = 0.0;
    for (int j = 0; j < nodes; ++j) {
        s += f((j + 0.5) / nodes);
    }
    return s / nodes;
}

/// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000)
{
    if (panels % 2) {
        ++panels;
    }
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    }
    return s * h / 3.0;
}

/// Bisection root of a monotone increasing function.
inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi)
{
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// exp(-t M) for a small dense matrix by scaling and squaring of a Taylor series.
inline std::vector<std::vector<double>> matrix_exponential(std::vector<std::vector<double>> m, double t)
{
    const std::size_t n = m.size();
    double norm = 0.0;
    for (auto& row : m) {
        double r = 0.0;
        for (auto& v : row) {
            v *= -t;
            r += std::abs(v);
        }
        norm = std::max(norm, r);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = std::ldexp(1.0, -squarings);
    for (auto& row : m) {
        for (auto& v : row) {
            v *= scale;
        }
    }
    auto mul = [n](const auto& a, const auto& b) {
        std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t j = 0; j < n; ++j) {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        return c;
    };
    std::vector<std::vector<double>> result(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> term(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for (int k = 1; k < 30; ++k) {
        term = mul(term, m);
        for (auto& row : term) {
            for (auto& v : row) {
                v /= k;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                result[i][j] += term[i][j];
            }
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = mul(result, result);
    }
    return result;
}

/// Reverse-logistic solution of y' = -g y (1 - y).
inline double reverse_logistic(double y0, double g, double t)
{
    const double e = std::exp(-g * t);
    return y0 * e / (1.0 - y0 + y0 * e);
}

/// Classical RK4 for a scalar autonomous ODE with many small steps.
inline double rk4_scalar(const std::function<double(double)>& f, double y0, double t, int steps)
{
    const double h = t / steps;
    double y = y0;
    for (int i = 0; i < steps; ++i) {
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * h * k1);
        const double k3 = f(y + 0.5 * h * k2);
        const double k4 = f(y + h * k3);
        y += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
    return y;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
