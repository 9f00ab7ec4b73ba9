#pragma once

// Flat key = value configuration with dotted section prefixes, '#' comments.
// Every key has a default; unknown keys and out-of-range values are errors
// that name the key.

#include "tumorsim/hypotheses.hpp"
#include "tumorsim/io.hpp"
#include "tumorsim/stepper.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tumorsim {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& msg) : std::runtime_error(key + ": " + msg), key(key) {}
    std::string key;
};

/// Named initial profile for one field.
struct ProfileSpec {
    enum class Kind { uniform, cos, bump, snapshot, complement };
    Kind kind = Kind::uniform;
    double mean = 0.0;
    double amp = 0.0;
    int mode = 1;
    double center = 0.5;
    double width = 0.1;
    std::string file;

    static ProfileSpec uniform(double mean)
    {
        ProfileSpec p;
        p.mean = mean;
        return p;
    }
    static ProfileSpec cosine(double mean, double amp, int mode)
    {
        ProfileSpec p;
        p.kind = Kind::cos;
        p.mean = mean;
        p.amp = amp;
        p.mode = mode;
        return p;
    }
    static ProfileSpec complement()
    {
        ProfileSpec p;
        p.kind = Kind::complement;
        return p;
    }

    friend bool operator==(const ProfileSpec&, const ProfileSpec&) = default;
};

struct InitSpec {
    std::array<ProfileSpec, 3> phi{ProfileSpec::complement(), ProfileSpec::cosine(0.35, 0.05, 1),
                                   ProfileSpec::cosine(0.15, 0.05, 2)};
    ProfileSpec w = ProfileSpec::uniform(0.0);
    ProfileSpec rho = ProfileSpec::uniform(0.5);
    double noise_amp = 0.0;  // seeded perturbation of phi1, phi2 (phi0 compensates)
    int noise_modes = 4;

    friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

struct RunConfig {
    BasisSpec basis{1, 32, 96};
    SchemeConfig scheme;
    ModelParams model;
    double delta = 0.05;
    InteractionMatrix c = InteractionMatrix::standard();
    ConstitutiveSet constitutive;
    InitSpec init;
    RhoStar rho_star = RhoStar::constant(1.0);
    std::string output_dir = "out";
    int snapshot_every = 0;  // in steps; 0 writes only the first and last sample
    double dt_eps2_cap = 0.0;  // when positive the step is limited to dt_eps2_cap * eps^2
    std::uint64_t seed = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <class E>
using EnumNames = std::vector<std::pair<E, const char*>>;

inline const EnumNames<ProfileSpec::Kind>& profile_names()
{
    static const EnumNames<ProfileSpec::Kind> n = {{ProfileSpec::Kind::uniform, "uniform"},
                                                   {ProfileSpec::Kind::cos, "cos"},
                                                   {ProfileSpec::Kind::bump, "bump"},
                                                   {ProfileSpec::Kind::snapshot, "snapshot"},
                                                   {ProfileSpec::Kind::complement, "complement"}};
    return n;
}

/// Accessors for one key: parse text into the config, print it back.
struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline double to_double(const std::string& key, const std::string& v)
{
    double d = 0.0;
    if (!parse_double(v, d) || !std::isfinite(d)) {
        throw ConfigError(key, "expected a finite number, got '" + v + "'");
    }
    return d;
}

inline long to_integer(const std::string& key, const std::string& v)
{
    const std::string_view s = trim(v);
    long out = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    return out;
}

template <class E>
E to_enum(const std::string& key, const std::string& v, const EnumNames<E>& names)
{
    for (const auto& [e, n] : names) {
        if (v == n) {
            return e;
        }
    }
    std::string allowed;
    for (const auto& [e, n] : names) {
        allowed += (allowed.empty() ? "" : "|") + std::string(n);
    }
    throw ConfigError(key, "expected one of " + allowed + ", got '" + v + "'");
}

template <class E>
std::string enum_name(E e, const EnumNames<E>& names)
{
    for (const auto& [k, n] : names) {
        if (k == e) {
            return n;
        }
    }
    return "?";
}

inline void require(bool ok, const std::string& key, const std::string& what)
{
    if (!ok) {
        throw ConfigError(key, what);
    }
}

template <class Get>
KeyHandler real_key(std::string key, Get ref, std::function<bool(double)> ok = {}, std::string range = {})
{
    return {[=](RunConfig& c, const std::string& v) {
                const double d = to_double(key, v);
                require(!ok || ok(d), key, "value " + v + " out of range (" + range + ")");
                ref(c) = d;
            },
            [=](const RunConfig& c) { return format_shortest(ref(const_cast<RunConfig&>(c))); }};
}

template <class Get>
KeyHandler int_key(std::string key, Get ref, long lo, long hi)
{
    return {[=](RunConfig& c, const std::string& v) {
                const long n = to_integer(key, v);
                require(n >= lo && n <= hi, key,
                        "value " + v + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(n);
            },
            [=](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <class E, class Get>
KeyHandler enum_key(std::string key, Get ref, EnumNames<E> names)
{
    return {[=](RunConfig& c, const std::string& v) { ref(c) = to_enum(key, v, names); },
            [=](const RunConfig& c) { return enum_name(ref(const_cast<RunConfig&>(c)), names); }};
}

inline std::string matrix_text(const InteractionMatrix& m)
{
    if (m.c == InteractionMatrix::standard().c) {
        return "standard";
    }
    std::string s;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            s += (s.empty() ? "" : ",") + format_shortest(m.c[i][j]);
        }
    }
    return s;
}

inline std::string rho_star_text(const RhoStar& r)
{
    if (r.is_constant()) {
        return format_shortest(r.knots.front().second);
    }
    std::string s;
    for (const auto& [t, v] : r.knots) {
        s += (s.empty() ? "" : ",") + format_shortest(t) + ":" + format_shortest(v);
    }
    return s;
}

inline const std::vector<std::pair<std::string, KeyHandler>>& key_table()
{
    static const std::vector<std::pair<std::string, KeyHandler>> table = [] {
        std::vector<std::pair<std::string, KeyHandler>> t;
        auto add = [&](const std::string& k, KeyHandler h) { t.emplace_back(k, std::move(h)); };
        auto pos = [](double v) { return v > 0; };
        auto nonneg = [](double v) { return v >= 0; };

        add("basis.dim", int_key("basis.dim", [](RunConfig& c) -> int& { return c.basis.dim; }, 1, 2));
        add("basis.m", int_key("basis.m", [](RunConfig& c) -> int& { return c.basis.modes; }, 1, 4096));
        add("basis.n", int_key("basis.n", [](RunConfig& c) -> int& { return c.basis.grid; }, 2, 1 << 16));

        add("scheme.dt", real_key("scheme.dt", [](RunConfig& c) -> double& { return c.scheme.dt; }, pos, "> 0"));
        add("scheme.t_end",
            real_key("scheme.t_end", [](RunConfig& c) -> double& { return c.scheme.t_end; }, nonneg, ">= 0"));
        add("scheme.kind", enum_key<SchemeKind>("scheme.kind", [](RunConfig& c) -> SchemeKind& { return c.scheme.kind; },
                                                {{SchemeKind::imex1, "imex1"}, {SchemeKind::rk4, "rk4"}}));
        add("scheme.output_every",
            int_key("scheme.output_every", [](RunConfig& c) -> int& { return c.scheme.output_every; }, 1, 1L << 30));

        add("scheme.dt_eps2_cap", real_key("scheme.dt_eps2_cap",
                                           [](RunConfig& c) -> double& { return c.dt_eps2_cap; }, nonneg, ">= 0"));

        add("model.nu", real_key("model.nu", [](RunConfig& c) -> double& { return c.model.nu; }, pos, "> 0"));
        add("model.D", real_key("model.D", [](RunConfig& c) -> double& { return c.model.D; }, pos, "> 0"));
        add("model.kappa",
            real_key("model.kappa", [](RunConfig& c) -> double& { return c.model.kappa; }, nonneg, ">= 0"));
        add("model.eps", real_key("model.eps", [](RunConfig& c) -> double& { return c.model.eps; }, pos, "> 0"));
        add("model.K", real_key("model.K", [](RunConfig& c) -> double& { return c.constitutive.K; }, pos, "> 0"));
        add("model.delta", real_key("model.delta", [](RunConfig& c) -> double& { return c.delta; }));
        add("model.c", KeyHandler{[](RunConfig& c, const std::string& v) {
                                      if (v == "standard") {
                                          c.c.c = InteractionMatrix::standard().c;
                                          return;
                                      }
                                      const auto cells = split(v, ',');
                                      require(cells.size() == 9, "model.c",
                                              "expected 'standard' or 9 comma-separated numbers");
                                      for (int i = 0; i < 9; ++i) {
                                          c.c.c[i / 3][i % 3] = to_double("model.c", std::string(cells[i]));
                                      }
                                  },
                                  [](const RunConfig& c) { return matrix_text(c.c); }});
        add("model.c_hat",
            real_key("model.c_hat", [](RunConfig& c) -> double& { return c.c.c_hat; }));

        add("f.kind", enum_key<PressureLaw::Kind>(
                          "f.kind", [](RunConfig& c) -> PressureLaw::Kind& { return c.constitutive.f.kind; },
                          {{PressureLaw::Kind::linear, "linear"}, {PressureLaw::Kind::softplus, "softplus"}}));
        add("f.a", real_key("f.a", [](RunConfig& c) -> double& { return c.constitutive.f.a; }, pos, "> 0"));
        add("f.z0", real_key("f.z0", [](RunConfig& c) -> double& { return c.constitutive.f.z0; }));
        add("f.f0", real_key("f.f0", [](RunConfig& c) -> double& { return c.constitutive.f.f0; }));
        add("f.f1", real_key("f.f1", [](RunConfig& c) -> double& { return c.constitutive.f.f1; }));

        add("gamma.kind",
            enum_key<GrowthRate::Kind>("gamma.kind", [](RunConfig& c) -> GrowthRate::Kind& { return c.constitutive.gamma.kind; },
                                       {{GrowthRate::Kind::tanh, "tanh"}, {GrowthRate::Kind::constant, "constant"}}));
        add("gamma.amp", real_key("gamma.amp", [](RunConfig& c) -> double& { return c.constitutive.gamma.amp; }));
        add("gamma.scale",
            real_key("gamma.scale", [](RunConfig& c) -> double& { return c.constitutive.gamma.scale; }, pos, "> 0"));
        add("gamma.value", real_key("gamma.value", [](RunConfig& c) -> double& { return c.constitutive.gamma.constant; }));

        add("E.kind", enum_key<Elasticity::Kind>(
                          "E.kind", [](RunConfig& c) -> Elasticity::Kind& { return c.constitutive.E.kind; },
                          {{Elasticity::Kind::clamp_linear, "clamp_linear"}, {Elasticity::Kind::constant, "constant"}}));
        add("E.base", real_key("E.base", [](RunConfig& c) -> double& { return c.constitutive.E.base; }));
        add("E.slope", real_key("E.slope", [](RunConfig& c) -> double& { return c.constitutive.E.slope; }));
        add("E.sigma",
            real_key("E.sigma", [](RunConfig& c) -> double& { return c.constitutive.E.sigma; }, nonneg, ">= 0"));
        add("E.value", real_key("E.value", [](RunConfig& c) -> double& { return c.constitutive.E.constant; }));

        add("A.kind", enum_key<Consumption::Kind>(
                          "A.kind", [](RunConfig& c) -> Consumption::Kind& { return c.constitutive.A.kind; },
                          {{Consumption::Kind::clamp_linear, "clamp_linear"}, {Consumption::Kind::constant, "constant"}}));
        add("A.base", real_key("A.base", [](RunConfig& c) -> double& { return c.constitutive.A.base; }));
        add("A.slope", real_key("A.slope", [](RunConfig& c) -> double& { return c.constitutive.A.slope; }));
        add("A.value", real_key("A.value", [](RunConfig& c) -> double& { return c.constitutive.A.constant; }));

        add("g.kind", enum_key<Perturbation::Kind>(
                          "g.kind", [](RunConfig& c) -> Perturbation::Kind& { return c.constitutive.g.kind; },
                          {{Perturbation::Kind::product, "product"}, {Perturbation::Kind::zero, "zero"}}));
        add("g.alpha", real_key("g.alpha", [](RunConfig& c) -> double& { return c.constitutive.g.alpha; }));
        add("g.r_inner",
            real_key("g.r_inner", [](RunConfig& c) -> double& { return c.constitutive.g.r_inner; }, pos, "> 0"));
        add("g.r_outer",
            real_key("g.r_outer", [](RunConfig& c) -> double& { return c.constitutive.g.r_outer; }, pos, "> 0"));

        const std::array<std::pair<const char*, std::function<ProfileSpec&(RunConfig&)>>, 5> fields = {{
            {"phi0", [](RunConfig& c) -> ProfileSpec& { return c.init.phi[0]; }},
            {"phi1", [](RunConfig& c) -> ProfileSpec& { return c.init.phi[1]; }},
            {"phi2", [](RunConfig& c) -> ProfileSpec& { return c.init.phi[2]; }},
            {"w", [](RunConfig& c) -> ProfileSpec& { return c.init.w; }},
            {"rho", [](RunConfig& c) -> ProfileSpec& { return c.init.rho; }},
        }};
        for (const auto& [name, prof] : fields) {
            const std::string pre = std::string("init.") + name + ".";
            auto pf = prof;
            add(pre + "profile", enum_key<ProfileSpec::Kind>(
                                     pre + "profile", [pf](RunConfig& c) -> ProfileSpec::Kind& { return pf(c).kind; },
                                     profile_names()));
            add(pre + "mean", real_key(pre + "mean", [pf](RunConfig& c) -> double& { return pf(c).mean; }));
            add(pre + "amp", real_key(pre + "amp", [pf](RunConfig& c) -> double& { return pf(c).amp; }));
            add(pre + "mode", int_key(pre + "mode", [pf](RunConfig& c) -> int& { return pf(c).mode; }, 0, 4096));
            add(pre + "center", real_key(pre + "center", [pf](RunConfig& c) -> double& { return pf(c).center; }));
            add(pre + "width",
                real_key(pre + "width", [pf](RunConfig& c) -> double& { return pf(c).width; }, pos, "> 0"));
            add(pre + "file", KeyHandler{[pf](RunConfig& c, const std::string& v) { pf(c).file = v; },
                                         [pf](const RunConfig& c) { return pf(const_cast<RunConfig&>(c)).file; }});
        }
        add("init.noise.amp",
            real_key("init.noise.amp", [](RunConfig& c) -> double& { return c.init.noise_amp; }, nonneg, ">= 0"));
        add("init.noise.modes",
            int_key("init.noise.modes", [](RunConfig& c) -> int& { return c.init.noise_modes; }, 0, 4096));

        add("rho_star", KeyHandler{[](RunConfig& c, const std::string& v) {
                                       if (v.find(':') == std::string::npos) {
                                           c.rho_star = RhoStar::constant(to_double("rho_star", v));
                                           return;
                                       }
                                       RhoStar r;
                                       r.knots.clear();
                                       for (auto cell : split(v, ',')) {
                                           const auto tv = split(cell, ':');
                                           require(tv.size() == 2, "rho_star", "table entries must be t:value");
                                           const double t = to_double("rho_star", std::string(tv[0]));
                                           const double val = to_double("rho_star", std::string(tv[1]));
                                           require(r.knots.empty() || t > r.knots.back().first, "rho_star",
                                                   "table times must be strictly increasing");
                                           r.knots.emplace_back(t, val);
                                       }
                                       c.rho_star = r;
                                   },
                                   [](const RunConfig& c) { return rho_star_text(c.rho_star); }});

        add("output.dir", KeyHandler{[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                                     [](const RunConfig& c) { return c.output_dir; }});
        add("output.snapshot_every",
            int_key("output.snapshot_every", [](RunConfig& c) -> int& { return c.snapshot_every; }, 0, 1L << 30));
        add("seed", KeyHandler{[](RunConfig& c, const std::string& v) {
                                   const long n = to_integer("seed", v);
                                   require(n >= 0, "seed", "must be nonnegative");
                                   c.seed = static_cast<std::uint64_t>(n);
                               },
                               [](const RunConfig& c) { return std::to_string(c.seed); }});
        return t;
    }();
    return table;
}

}  // namespace detail

/// Checks that involve more than one key.
inline void check_config(const RunConfig& c)
{
    try {
        c.basis.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("basis.n", e.what());
    }
    if (!(c.constitutive.g.r_outer > c.constitutive.g.r_inner)) {
        throw ConfigError("g.r_outer", "must exceed g.r_inner");
    }
    for (int i = 0; i < 3; ++i) {
        if (c.init.phi[i].kind == ProfileSpec::Kind::complement && i != 0) {
            throw ConfigError("init.phi" + std::to_string(i) + ".profile", "complement is only allowed for phi0");
        }
    }
    for (const auto* p : {&c.init.w, &c.init.rho}) {
        if (p->kind == ProfileSpec::Kind::complement) {
            throw ConfigError(p == &c.init.w ? "init.w.profile" : "init.rho.profile",
                              "complement is only allowed for phi0");
        }
    }
}

/// Applies "key = value" lines on top of the defaults.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>")
{
    RunConfig cfg;
    std::map<std::string, const detail::KeyHandler*> lookup;
    for (const auto& [k, h] : detail::key_table()) {
        lookup[k] = &h;
    }
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string_view body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno), "expected 'key = value'");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        const auto it = lookup.find(key);
        if (it == lookup.end()) {
            throw ConfigError(key, "unknown key");
        }
        it->second->set(cfg, value);
    }
    check_config(cfg);
    return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string(), "cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

/// Every key with its resolved value, in table order.
inline std::string emit_config(const RunConfig& c)
{
    std::string out;
    for (const auto& [k, h] : detail::key_table()) {
        out += k + " = " + h.get(c) + "\n";
    }
    return out;
}

/// Applies one override in config syntax (used by sweeps).
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value)
{
    for (const auto& [k, h] : detail::key_table()) {
        if (k == key) {
            h.set(c, value);
            return;
        }
    }
    throw ConfigError(key, "unknown key");
}

/// Scheme with the optional eps^2 step cap applied.
inline SchemeConfig effective_scheme(const RunConfig& c)
{
    SchemeConfig s = c.scheme;
    if (c.dt_eps2_cap > 0) {
        s.dt = std::min(s.dt, c.dt_eps2_cap * c.model.eps * c.model.eps);
    }
    return s;
}

inline Model build_model(const RunConfig& c)
{
    return Model(c.basis, c.constitutive, c.c, c.model, c.rho_star);
}

namespace detail {

inline GridField profile_grid(const CosineBasis& b, const ProfileSpec& p, const std::string& name,
                              const std::filesystem::path& base_dir)
{
    using std::numbers::pi;
    GridField g = b.zero_grid();
    if (p.kind == ProfileSpec::Kind::snapshot) {
        std::filesystem::path f = p.file;
        if (f.is_relative()) {
            f = base_dir / f;
        }
        return snapshot_grid(b, read_snapshot_field(f), "init." + name + ".file");
    }
    for (std::size_t j = 0; j < g.values.size(); ++j) {
        const auto [x, y] = b.node_coords(j);
        double v = p.mean;
        switch (p.kind) {
        case ProfileSpec::Kind::cos:
            v += p.amp * std::cos(p.mode * pi * x);
            break;
        case ProfileSpec::Kind::bump: {
            const double dx = x - p.center;
            const double dy = b.spec().dim == 2 ? y - p.center : 0.0;
            v += p.amp * std::exp(-(dx * dx + dy * dy) / (p.width * p.width));
            break;
        }
        default:
            break;
        }
        g.values[j] = v;
    }
    return g;
}

}  // namespace detail

/// Initial state from the profile specs. Phases are projected onto the modes;
/// a complement phi0 is formed modally so the phase sum is exactly one.
inline State build_initial_state(const RunConfig& c, const Model& m,
                                 const std::filesystem::path& base_dir = std::filesystem::current_path())
{
    const auto& b = m.basis;
    State s;
    s.t = 0.0;
    for (int i = 1; i < 3; ++i) {
        s.phi[i] = b.forward(detail::profile_grid(b, c.init.phi[i], "phi" + std::to_string(i), base_dir));
    }
    if (c.init.noise_amp > 0) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> nd;
        for (int i = 1; i < 3; ++i) {
            for (std::size_t k = 1; k < b.mode_count(); ++k) {
                const auto [kx, ky] = b.mode_pair(k);
                if (std::max(kx, ky) > c.init.noise_modes) {
                    continue;
                }
                const double scale = 1.0 + static_cast<double>(kx * kx + ky * ky);
                s.phi[i].coeffs[k] += c.init.noise_amp * nd(rng) / scale;
            }
        }
    }
    if (c.init.phi[0].kind == ProfileSpec::Kind::complement) {
        s.phi[0] = b.zero_modal();
        for (std::size_t k = 0; k < b.mode_count(); ++k) {
            s.phi[0].coeffs[k] = (k == 0 ? 1.0 : 0.0) - s.phi[1].coeffs[k] - s.phi[2].coeffs[k];
        }
    } else {
        s.phi[0] = b.forward(detail::profile_grid(b, c.init.phi[0], "phi0", base_dir));
    }
    s.rho = b.forward(detail::profile_grid(b, c.init.rho, "rho", base_dir));
    s.w = detail::profile_grid(b, c.init.w, "w", base_dir);
    return s;
}

}  // namespace tumorsim
