#pragma once

// Neumann-Laplacian eigenbasis on the unit interval / unit square.
//
//   e_0(x) = 1,  e_k(x) = sqrt(2) cos(k pi x),  -e_k'' = (k pi)^2 e_k
//
// Grid fields live on N midpoint nodes x_j = (j + 1/2) / N per axis with
// weight 1/N. For k, l < N the discrete inner product of e_k and e_l is exactly
// delta_kl, so forward() is an exact L2 projection on span(e_0..e_m).
//
// Layout: 2D grid index is iy * N + ix, 2D mode index is ky * (m + 1) + kx.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tumorsim {

struct BasisSpec {
    int dim = 1;
    int modes = 32;  // truncation index m, modes 0..m per axis
    int grid = 96;   // quadrature nodes per axis

    /// ceil(3 (m + 1) / 2), the 3/2-rule oversampling for quadratic products.
    static constexpr int min_grid(int modes) { return (3 * (modes + 1) + 1) / 2; }

    void validate() const
    {
        if (dim != 1 && dim != 2) {
            throw std::invalid_argument("basis.dim must be 1 or 2, got " + std::to_string(dim));
        }
        if (modes < 1) {
            throw std::invalid_argument("basis.m must be >= 1, got " + std::to_string(modes));
        }
        if (grid < min_grid(modes)) {
            throw std::invalid_argument("basis.n must be >= ceil(3(m+1)/2) = " + std::to_string(min_grid(modes))
                                        + ", got " + std::to_string(grid));
        }
    }

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

struct ModalField {
    std::vector<double> coeffs;
    friend bool operator==(const ModalField&, const ModalField&) = default;
};

struct GridField {
    std::vector<double> values;
    friend bool operator==(const GridField&, const GridField&) = default;
};

/// Values at the boundary quadrature nodes (1D: x = 0 then x = 1;
/// 2D: edges y = 0, y = 1, x = 0, x = 1, each with N midpoint nodes).
struct BoundaryField {
    std::vector<double> values;
};

class CosineBasis {
public:
    /// Requires grid >= modes + 1 only; the dealiasing rule is checked by BasisSpec::validate.
    explicit CosineBasis(BasisSpec spec) : spec_(spec)
    {
        if (spec.dim != 1 && spec.dim != 2) {
            throw std::invalid_argument("CosineBasis: dim must be 1 or 2");
        }
        if (spec.modes < 0 || spec.grid < spec.modes + 1) {
            throw std::invalid_argument("CosineBasis: need grid >= modes + 1 (got modes=" + std::to_string(spec.modes)
                                        + ", grid=" + std::to_string(spec.grid) + ")");
        }
        const int n = spec.grid;
        const int mp = spec.modes + 1;
        table_.resize(static_cast<std::size_t>(n) * mp);
        for (int j = 0; j < n; ++j) {
            const double x = node(j);
            for (int k = 0; k < mp; ++k) {
                table_[j * mp + k] = basis_value(k, x);
            }
        }
        eigen_.resize(mode_count());
        for (std::size_t idx = 0; idx < mode_count(); ++idx) {
            const auto [kx, ky] = mode_pair(idx);
            eigen_[idx] = axis_eigenvalue(kx) + (spec.dim == 2 ? axis_eigenvalue(ky) : 0.0);
        }
    }

    const BasisSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    int modes_per_axis() const { return spec_.modes + 1; }
    int nodes_per_axis() const { return spec_.grid; }

    std::size_t mode_count() const
    {
        const std::size_t mp = modes_per_axis();
        return spec_.dim == 1 ? mp : mp * mp;
    }
    std::size_t node_count() const
    {
        const std::size_t n = nodes_per_axis();
        return spec_.dim == 1 ? n : n * n;
    }
    std::size_t boundary_count() const
    {
        return spec_.dim == 1 ? 2 : 4 * static_cast<std::size_t>(spec_.grid);
    }

    double node(int j) const { return (j + 0.5) / spec_.grid; }
    /// Quadrature weight of one grid node (cell volume).
    double weight() const { return spec_.dim == 1 ? 1.0 / spec_.grid : 1.0 / (double(spec_.grid) * spec_.grid); }
    double boundary_weight() const { return spec_.dim == 1 ? 1.0 : 1.0 / spec_.grid; }

    static double basis_value(int k, double x)
    {
        return k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(k * std::numbers::pi * x);
    }
    static double axis_eigenvalue(int k)
    {
        const double kp = k * std::numbers::pi;
        return kp * kp;
    }

    /// (kx, ky) of a flat mode index; ky = 0 in 1D.
    std::pair<int, int> mode_pair(std::size_t idx) const
    {
        const int mp = modes_per_axis();
        if (spec_.dim == 1) {
            return {static_cast<int>(idx), 0};
        }
        return {static_cast<int>(idx % mp), static_cast<int>(idx / mp)};
    }

    double eigenvalue(std::size_t idx) const { return eigen_[idx]; }
    const std::vector<double>& eigenvalues() const { return eigen_; }

    /// Coordinates of grid node idx (y = 0 in 1D).
    std::pair<double, double> node_coords(std::size_t idx) const
    {
        const int n = spec_.grid;
        if (spec_.dim == 1) {
            return {node(static_cast<int>(idx)), 0.0};
        }
        return {node(static_cast<int>(idx % n)), node(static_cast<int>(idx / n))};
    }

    ModalField zero_modal() const { return {std::vector<double>(mode_count(), 0.0)}; }
    GridField zero_grid() const { return {std::vector<double>(node_count(), 0.0)}; }
    GridField constant_grid(double c) const { return {std::vector<double>(node_count(), c)}; }
    /// Modal representation of a constant c (|Omega| = 1, e_0 = 1).
    ModalField constant_modal(double c) const
    {
        ModalField a = zero_modal();
        a.coeffs[0] = c;
        return a;
    }

    /// Coefficients <g, e_k> by midpoint quadrature, truncated at m.
    ModalField forward(const GridField& g) const
    {
        check_size(g.values.size(), node_count(), "forward: grid field");
        ModalField out = zero_modal();
        const int n = spec_.grid;
        const int mp = modes_per_axis();
        if (spec_.dim == 1) {
            forward_1d(g.values.data(), 1, out.coeffs.data(), 1);
            return out;
        }
        // x-direction for each row, then y-direction for each kx.
        std::vector<double> tmp(static_cast<std::size_t>(n) * mp, 0.0);  // [iy][kx]
        for (int iy = 0; iy < n; ++iy) {
            forward_1d(g.values.data() + iy * n, 1, tmp.data() + iy * mp, 1);
        }
        for (int kx = 0; kx < mp; ++kx) {
            forward_1d(tmp.data() + kx, mp, out.coeffs.data() + kx, mp);
        }
        return out;
    }

    /// Pointwise synthesis sum_k a_k e_k(x_j).
    GridField inverse(const ModalField& a) const
    {
        check_size(a.coeffs.size(), mode_count(), "inverse: modal field");
        GridField out = zero_grid();
        const int n = spec_.grid;
        const int mp = modes_per_axis();
        if (spec_.dim == 1) {
            inverse_1d(a.coeffs.data(), 1, out.values.data(), 1);
            return out;
        }
        std::vector<double> tmp(static_cast<std::size_t>(n) * mp, 0.0);  // [iy][kx]
        for (int kx = 0; kx < mp; ++kx) {
            inverse_1d(a.coeffs.data() + kx, mp, tmp.data() + kx, mp);
        }
        for (int iy = 0; iy < n; ++iy) {
            inverse_1d(tmp.data() + iy * mp, 1, out.values.data() + iy * n, 1);
        }
        return out;
    }

    /// Coefficient k multiplied by -lambda_k.
    ModalField laplacian(const ModalField& a) const
    {
        check_size(a.coeffs.size(), mode_count(), "laplacian: modal field");
        ModalField out = a;
        for (std::size_t k = 0; k < out.coeffs.size(); ++k) {
            out.coeffs[k] *= -eigen_[k];
        }
        return out;
    }

    /// Exact evaluation of the truncated series at a point.
    double evaluate(const ModalField& a, double x, double y = 0.0) const
    {
        check_size(a.coeffs.size(), mode_count(), "evaluate: modal field");
        double sum = 0.0;
        for (std::size_t idx = 0; idx < mode_count(); ++idx) {
            const auto [kx, ky] = mode_pair(idx);
            double v = basis_value(kx, x);
            if (spec_.dim == 2) {
                v *= basis_value(ky, y);
            }
            sum += a.coeffs[idx] * v;
        }
        return sum;
    }

    BoundaryField boundary_trace(const ModalField& a) const
    {
        check_size(a.coeffs.size(), mode_count(), "boundary_trace: modal field");
        const int mp = modes_per_axis();
        BoundaryField out{std::vector<double>(boundary_count(), 0.0)};
        if (spec_.dim == 1) {
            for (int k = 0; k < mp; ++k) {
                out.values[0] += a.coeffs[k] * basis_value(k, 0.0);
                out.values[1] += a.coeffs[k] * basis_value(k, 1.0);
            }
            return out;
        }
        const int n = spec_.grid;
        std::vector<double> line(mp);
        for (int edge = 0; edge < 4; ++edge) {
            // edges 0,1: y fixed, contract ky; edges 2,3: x fixed, contract kx
            const double c = (edge % 2 == 0) ? 0.0 : 1.0;
            for (int free = 0; free < mp; ++free) {
                double s = 0.0;
                for (int fixed = 0; fixed < mp; ++fixed) {
                    const std::size_t idx = edge < 2 ? static_cast<std::size_t>(fixed) * mp + free
                                                     : static_cast<std::size_t>(free) * mp + fixed;
                    s += a.coeffs[idx] * basis_value(fixed, c);
                }
                line[free] = s;
            }
            inverse_1d(line.data(), 1, out.values.data() + edge * n, 1);
        }
        return out;
    }

    /// Per-mode boundary integrals  int_{dOmega} v e_k ds.
    ModalField boundary_load(const BoundaryField& v) const
    {
        check_size(v.values.size(), boundary_count(), "boundary_load: boundary field");
        ModalField out = zero_modal();
        const int mp = modes_per_axis();
        if (spec_.dim == 1) {
            for (int k = 0; k < mp; ++k) {
                out.coeffs[k] = v.values[0] * basis_value(k, 0.0) + v.values[1] * basis_value(k, 1.0);
            }
            return out;
        }
        const int n = spec_.grid;
        std::vector<double> line(mp);
        for (int edge = 0; edge < 4; ++edge) {
            const double c = (edge % 2 == 0) ? 0.0 : 1.0;
            forward_1d(v.values.data() + edge * n, 1, line.data(), 1);  // includes weight 1/N
            for (int free = 0; free < mp; ++free) {
                for (int fixed = 0; fixed < mp; ++fixed) {
                    const std::size_t idx = edge < 2 ? static_cast<std::size_t>(fixed) * mp + free
                                                     : static_cast<std::size_t>(free) * mp + fixed;
                    out.coeffs[idx] += line[free] * basis_value(fixed, c);
                }
            }
        }
        return out;
    }

    double integrate(const GridField& g) const
    {
        check_size(g.values.size(), node_count(), "integrate: grid field");
        double s = 0.0;
        for (double v : g.values) {
            s += v;
        }
        return s * weight();
    }
    /// Mean over the unit domain.
    double mean(const GridField& g) const { return integrate(g); }
    static double mean(const ModalField& a) { return a.coeffs.at(0); }

    /// Boundary integral of a boundary field.
    double boundary_integrate(const BoundaryField& v) const
    {
        double s = 0.0;
        for (double x : v.values) {
            s += x;
        }
        return s * boundary_weight();
    }

    static double l2_norm_sq(const ModalField& a)
    {
        double s = 0.0;
        for (double c : a.coeffs) {
            s += c * c;
        }
        return s;
    }
    /// |grad u|^2 integrated, sum_k lambda_k a_k^2.
    double gradient_norm_sq(const ModalField& a) const
    {
        check_size(a.coeffs.size(), mode_count(), "gradient_norm_sq: modal field");
        double s = 0.0;
        for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
            s += eigen_[k] * a.coeffs[k] * a.coeffs[k];
        }
        return s;
    }

private:
    static void check_size(std::size_t got, std::size_t want, const char* what)
    {
        if (got != want) {
            throw std::invalid_argument(std::string(what) + " has size " + std::to_string(got) + ", expected "
                                        + std::to_string(want));
        }
    }

    void forward_1d(const double* g, std::ptrdiff_t gstride, double* a, std::ptrdiff_t astride) const
    {
        const int n = spec_.grid;
        const int mp = modes_per_axis();
        const double w = 1.0 / n;
        for (int k = 0; k < mp; ++k) {
            a[k * astride] = 0.0;
        }
        for (int j = 0; j < n; ++j) {
            const double gj = g[j * gstride] * w;
            const double* row = &table_[static_cast<std::size_t>(j) * mp];
            for (int k = 0; k < mp; ++k) {
                a[k * astride] += gj * row[k];
            }
        }
    }

    void inverse_1d(const double* a, std::ptrdiff_t astride, double* g, std::ptrdiff_t gstride) const
    {
        const int n = spec_.grid;
        const int mp = modes_per_axis();
        for (int j = 0; j < n; ++j) {
            const double* row = &table_[static_cast<std::size_t>(j) * mp];
            double s = 0.0;
            for (int k = 0; k < mp; ++k) {
                s += a[k * astride] * row[k];
            }
            g[j * gstride] = s;
        }
    }

    BasisSpec spec_;
    std::vector<double> table_;  // e_k(x_j), row-major [j][k]
    std::vector<double> eigen_;
};

}  // namespace tumorsim
