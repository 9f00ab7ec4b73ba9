#pragma once

// Text formats: diagnostics CSV, per-field snapshot files, number formatting.
// Numbers are written with 17 significant digits through std::to_chars, so
// output is locale independent and reads back to the same double.

#include "tumorsim/diagnostics.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tumorsim {

inline std::string format_double(double v)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Shortest text that reads back to the same double.
inline std::string format_shortest(double v)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Strict parse of a whole string as a double; returns false on trailing junk.
inline bool parse_double(std::string_view s, double& out)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::string diag_header()
{
    std::string h;
    for (std::size_t i = 0; i < kDiagColumns.size(); ++i) {
        h += (i ? "," : "");
        h += kDiagColumns[i];
    }
    return h;
}

inline std::string diag_row(const DiagRecord& r)
{
    std::string line;
    const auto v = diag_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
        line += (i ? "," : "");
        line += format_double(v[i]);
    }
    return line;
}

/// Streams rows to a diagnostics CSV as they are produced.
class DiagCsvWriter {
public:
    explicit DiagCsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_) {
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        }
        out_ << diag_header() << '\n';
    }
    void write(const DiagRecord& r)
    {
        out_ << diag_row(r) << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

inline std::vector<DiagRecord> read_diag_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != diag_header()) {
        throw std::runtime_error(path.string() + ": unexpected diagnostics header");
    }
    std::vector<DiagRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != kDiagColumns.size()) {
            throw std::runtime_error(path.string() + ": wrong number of columns");
        }
        std::array<double, 16> v{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!parse_double(cells[i], v[i])) {
                throw std::runtime_error(path.string() + ": bad number '" + std::string(cells[i]) + "'");
            }
        }
        DiagRecord r;
        r.t = v[0];
        r.F = v[1];
        r.F0eps = v[2];
        r.dissipation = v[3];
        r.boundary_flux = v[4];
        r.power = v[5];
        r.balance_residual = v[6];
        r.mass_err = v[7];
        r.mean_phi0 = v[8];
        r.mean_phi1 = v[9];
        r.mean_phi2 = v[10];
        r.mean_w = v[11];
        r.dist_theta_L2 = v[12];
        r.omega2_measure = v[13];
        r.w_inf = v[14];
        r.rho_inf = v[15];
        out.push_back(r);
    }
    return out;
}

// ------------------------------------------------------------------ snapshots

/// One field on the grid. Modal fields also carry their coefficients in a
/// "# coeffs=" header so reading them back is exact.
struct SnapshotField {
    std::map<std::string, std::string> header;
    std::vector<std::array<double, 2>> coords;
    std::vector<double> values;
    std::vector<double> coeffs;
};

inline const std::array<const char*, 5> kSnapshotFields = {"phi0", "phi1", "phi2", "rho", "w"};

inline void write_snapshot_field(const std::filesystem::path& path, const CosineBasis& b, const std::string& name,
                                 double t, const GridField& values, const ModalField* coeffs)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    const auto& spec = b.spec();
    out << "# dim=" << spec.dim << '\n'
        << "# m=" << spec.modes << '\n'
        << "# N=" << spec.grid << '\n'
        << "# t=" << format_double(t) << '\n'
        << "# field=" << name << '\n';
    if (coeffs) {
        out << "# coeffs=";
        for (std::size_t k = 0; k < coeffs->coeffs.size(); ++k) {
            out << (k ? ";" : "") << format_double(coeffs->coeffs[k]);
        }
        out << '\n';
    }
    for (std::size_t j = 0; j < values.values.size(); ++j) {
        const auto [x, y] = b.node_coords(j);
        out << format_double(x) << ',';
        if (spec.dim == 2) {
            out << format_double(y) << ',';
        }
        out << format_double(values.values[j]) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

inline SnapshotField read_snapshot_field(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open snapshot " + path.string());
    }
    SnapshotField f;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const std::string_view body = trim(std::string_view(line).substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                continue;
            }
            f.header[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() < 2 || cells.size() > 3) {
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        }
        std::array<double, 3> v{};
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!parse_double(cells[i], v[i])) {
                throw std::runtime_error(path.string() + ": bad number '" + std::string(cells[i]) + "'");
            }
        }
        f.coords.push_back({v[0], cells.size() == 3 ? v[1] : 0.0});
        f.values.push_back(v[cells.size() - 1]);
    }
    if (auto it = f.header.find("coeffs"); it != f.header.end()) {
        for (auto cell : split(it->second, ';')) {
            double c = 0.0;
            if (!parse_double(cell, c)) {
                throw std::runtime_error(path.string() + ": bad coefficient '" + std::string(cell) + "'");
            }
            f.coeffs.push_back(c);
        }
    }
    return f;
}

inline std::filesystem::path snapshot_path(const std::filesystem::path& dir, long step, const std::string& field)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "snap_%08ld_%s.csv", step, field.c_str());
    return dir / buf;
}

inline void write_state_snapshot(const std::filesystem::path& dir, long step, const CosineBasis& b, const State& s)
{
    for (int i = 0; i < 3; ++i) {
        write_snapshot_field(snapshot_path(dir, step, kSnapshotFields[i]), b, kSnapshotFields[i], s.t,
                             b.inverse(s.phi[i]), &s.phi[i]);
    }
    write_snapshot_field(snapshot_path(dir, step, "rho"), b, "rho", s.t, b.inverse(s.rho), &s.rho);
    write_snapshot_field(snapshot_path(dir, step, "w"), b, "w", s.t, s.w, nullptr);
}

/// Grid values of a snapshot field on the given basis; rejects grid mismatches.
inline GridField snapshot_grid(const CosineBasis& b, const SnapshotField& f, const std::string& what)
{
    if (f.values.size() != b.node_count()) {
        throw std::runtime_error(what + ": snapshot has " + std::to_string(f.values.size()) + " nodes, expected "
                                 + std::to_string(b.node_count()));
    }
    return GridField{f.values};
}

/// Modal coefficients of a snapshot field: stored coefficients when present and
/// of the right size, otherwise the projection of the grid values.
inline ModalField snapshot_modal(const CosineBasis& b, const SnapshotField& f, const std::string& what)
{
    if (f.coeffs.size() == b.mode_count()) {
        return ModalField{f.coeffs};
    }
    return b.forward(snapshot_grid(b, f, what));
}

inline State read_state_snapshot(const std::filesystem::path& dir, long step, const CosineBasis& b)
{
    State s;
    for (int i = 0; i < 3; ++i) {
        const auto p = snapshot_path(dir, step, kSnapshotFields[i]);
        s.phi[i] = snapshot_modal(b, read_snapshot_field(p), p.string());
    }
    const auto pr = snapshot_path(dir, step, "rho");
    const SnapshotField rf = read_snapshot_field(pr);
    s.rho = snapshot_modal(b, rf, pr.string());
    const auto pw = snapshot_path(dir, step, "w");
    s.w = snapshot_grid(b, read_snapshot_field(pw), pw.string());
    double t = 0.0;
    if (auto it = rf.header.find("t"); it == rf.header.end() || !parse_double(it->second, t)) {
        throw std::runtime_error(pr.string() + ": missing time header");
    }
    s.t = t;
    return s;
}

}  // namespace tumorsim
