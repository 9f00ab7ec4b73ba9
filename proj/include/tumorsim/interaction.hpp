#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace tumorsim {

/// Constant interaction coefficients c_ij coupling the three mass balances.
struct InteractionMatrix {
    using Matrix = std::array<std::array<double, 3>, 3>;

    Matrix c{};
    double c_hat = 0.0;

    /// c = I - (1/3) ones, coercive with c_hat = 2/3.
    static InteractionMatrix standard()
    {
        InteractionMatrix m;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                m.c[i][j] = (i == j ? 1.0 : 0.0) - 1.0 / 3.0;
            }
        }
        m.c_hat = 2.0 / 3.0;
        return m;
    }

    double row_sum(int i) const { return c[i][0] + c[i][1] + c[i][2]; }
    double col_sum(int j) const { return c[0][j] + c[1][j] + c[2][j]; }

    /// -sum_{i != j} c_ij |xi_i - xi_j|^2 for three vectors xi_i in R^3.
    double dissipation_form(const std::array<std::array<double, 3>, 3>& xi) const
    {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i == j) {
                    continue;
                }
                double d2 = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const double d = xi[i][k] - xi[j][k];
                    d2 += d * d;
                }
                s -= c[i][j] * d2;
            }
        }
        return s;
    }

    /// Largest constant in the coercivity inequality, in closed form. The form
    /// only depends on d1 = xi1 - xi0 and d2 = xi2 - xi0:
    ///   -(c10+c01)|d1|^2 - (c20+c02)|d2|^2 - (c12+c21)|d1-d2|^2,
    /// so the optimum is the smallest eigenvalue of a symmetric 2x2 matrix.
    double coercivity_constant() const
    {
        const double s01 = c[1][0] + c[0][1];
        const double s02 = c[2][0] + c[0][2];
        const double s12 = c[1][2] + c[2][1];
        const double a = -s01 - s12;
        const double d = -s02 - s12;
        const double b = s12;
        const double mean = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
        return mean - rad;
    }

    /// Worst violation of the coercivity inequality over random triples
    /// (positive means violated).
    double sampled_coercivity_violation(int samples, std::uint64_t seed) const
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        double worst = -INFINITY;
        for (int s = 0; s < samples; ++s) {
            std::array<std::array<double, 3>, 3> xi;
            for (auto& v : xi) {
                for (auto& x : v) {
                    x = nd(rng);
                }
            }
            double n10 = 0.0, n20 = 0.0;
            for (int k = 0; k < 3; ++k) {
                n10 += (xi[1][k] - xi[0][k]) * (xi[1][k] - xi[0][k]);
                n20 += (xi[2][k] - xi[0][k]) * (xi[2][k] - xi[0][k]);
            }
            worst = std::max(worst, c_hat * (n10 + n20) - dissipation_form(xi));
        }
        return worst;
    }

    friend bool operator==(const InteractionMatrix&, const InteractionMatrix&) = default;
};

}  // namespace tumorsim
