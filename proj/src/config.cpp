#include "wavepilot/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "wavepilot/errors.hpp"

namespace wavepilot {

namespace {

using json = nlohmann::json;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& key, const std::string& why) const {
        const int line = at.IsDefined() ? at.Mark().line + 1 : 0;
        if (line > 0) throw ConfigError(fmt::format("{}:{}: {}: {}", source_, line, key, why));
        throw ConfigError(fmt::format("{}: {}: {}", source_, key, why));
    }

    // Rejects keys outside `allowed` and records the line of each present key.
    void keys(const YAML::Node& map, const std::string& prefix, std::initializer_list<const char*> allowed) {
        if (!map.IsMap()) fail(map, prefix.empty() ? "document" : prefix, "expected a mapping");
        std::set<std::string> seen;
        for (const auto& kv : map) {
            const auto name = kv.first.as<std::string>();
            const std::string full = prefix.empty() ? name : prefix + "." + name;
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return name == a; }) ==
                allowed.end())
                fail(kv.first, full, "unknown key");
            if (!seen.insert(name).second) fail(kv.first, full, "duplicate key");
            lines_[full] = kv.first.Mark().line + 1;
        }
    }

    template <class T>
    T get(const YAML::Node& map, const std::string& prefix, const char* key, T fallback) const {
        const YAML::Node n = map[key];
        if (!n) return fallback;
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (!n.IsScalar()) fail(n, full, "expected a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, full, "cannot read '" + n.Scalar() + "' as " + type_name<T>());
        }
    }

    double real(const YAML::Node& map, const std::string& prefix, const char* key, double fallback) const {
        const double v = get<double>(map, prefix, key, fallback);
        if (!std::isfinite(v)) fail(map[key], prefix + "." + key, "must be finite");
        return v;
    }

    std::vector<double> reals(const YAML::Node& map, const std::string& prefix, const char* key) const {
        const YAML::Node n = map[key];
        std::vector<double> out;
        if (!n) return out;
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (!n.IsSequence()) fail(n, full, "expected a sequence of numbers");
        for (const auto& e : n) {
            try {
                out.push_back(e.as<double>());
            } catch (const YAML::Exception&) {
                fail(e, full, "expected a number");
            }
        }
        return out;
    }

    Vec2 vec(const YAML::Node& map, const std::string& prefix, const char* key, Vec2 fallback) const {
        if (!map[key]) return fallback;
        const auto v = reals(map, prefix, key);
        if (v.size() != 2) fail(map[key], prefix + "." + key, "expected [x, z]");
        return {v[0], v[1]};
    }

    // Prefixes a validation message with the line of the key it names.
    [[noreturn]] void rethrow(const ConfigError& e) const {
        const std::string msg = e.what();
        std::string best;
        for (const auto& [key, line] : lines_)
            if (msg.rfind(key, 0) == 0 && key.size() > best.size()) best = key;
        if (!best.empty()) throw ConfigError(fmt::format("{}:{}: {}", source_, lines_.at(best), msg));
        throw ConfigError(fmt::format("{}: {}", source_, msg));
    }

private:
    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        if constexpr (std::is_integral_v<T>) return "an integer";
        if constexpr (std::is_floating_point_v<T>) return "a number";
        return "a string";
    }

    std::string source_;
    std::map<std::string, int> lines_;
};

ProfileKind parse_profile(const Reader& r, const YAML::Node& n, const std::string& s) {
    if (s == "gaussian") return ProfileKind::Gaussian;
    if (s == "supergaussian") return ProfileKind::SuperGaussian;
    if (s == "table") return ProfileKind::Table;
    r.fail(n, "beam.profile", "expected gaussian, supergaussian or table");
}

std::string profile_name(ProfileKind k) {
    switch (k) {
        case ProfileKind::Gaussian: return "gaussian";
        case ProfileKind::SuperGaussian: return "supergaussian";
        case ProfileKind::Table: return "table";
    }
    return "";
}

json vec_json(const Vec2& v) { return json::array({v.x, v.z}); }

json medium_json(const Medium& m) {
    json j;
    j["kind"] = m.kind == MediumKind::Index ? "index" : "potential";
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, UniformField>) {
                j["shape"] = "uniform";
                j["value"] = f.value;
            } else if constexpr (std::is_same_v<T, QuadraticField>) {
                j["shape"] = "quadratic";
                j["base"] = f.base;
                j["kx"] = f.kx;
                j["kz"] = f.kz;
                j["center"] = vec_json(f.center);
            } else if constexpr (std::is_same_v<T, LinearField>) {
                j["shape"] = "linear";
                j["base"] = f.base;
                j["slope"] = vec_json(f.slope);
            } else if constexpr (std::is_same_v<T, GaussianField>) {
                j["shape"] = "gaussian";
                j["base"] = f.base;
                j["amplitude"] = f.amplitude;
                j["center"] = vec_json(f.center);
                j["width"] = f.width;
            } else {
                j["shape"] = "table";
                j["grid"] = {{"x_min", f.x_min}, {"x_max", f.x_max}, {"z_min", f.z_min},
                             {"z_max", f.z_max}, {"nx", f.nx},       {"nz", f.nz},
                             {"values", f.values}};
            }
        },
        m.shape);
    json d = json::object();
    if (std::isfinite(m.domain.x_min)) d["x_min"] = m.domain.x_min;
    if (std::isfinite(m.domain.x_max)) d["x_max"] = m.domain.x_max;
    if (std::isfinite(m.domain.z_min)) d["z_min"] = m.domain.z_min;
    if (std::isfinite(m.domain.z_max)) d["z_max"] = m.domain.z_max;
    if (!d.empty()) j["domain"] = d;
    return j;
}

json canonical_json(const Scenario& sc, const OutputOptions& out) {
    json j;
    j["system"] = std::string(to_string(sc.system));
    j["lambda0"] = sc.lambda0;
    j["units"] = {{"c", sc.units.c}};
    json beam = {{"profile", profile_name(sc.beam.kind)},
                 {"w0", sc.beam.w0},
                 {"span", sc.beam.span},
                 {"rays", sc.beam.ray_count}};
    if (sc.beam.kind == ProfileKind::SuperGaussian) beam["order"] = sc.beam.order;
    if (sc.beam.kind == ProfileKind::Table)
        beam["table"] = {{"x", sc.beam.table_x}, {"amplitude", sc.beam.table_amplitude}};
    j["beam"] = beam;
    j["medium"] = medium_json(sc.medium);
    j["integration"] = {{"dt", sc.integration.dt},
                        {"n_steps", sc.integration.n_steps},
                        {"snapshot_stride", sc.integration.snapshot_stride}};
    j["wave_potential"] = sc.wave_potential_enabled;
    const auto& reg = sc.regularization;
    j["regularization"] = {
        {"amplitude_floor", reg.amplitude_floor},
        {"edge_policy", reg.edge_policy == EdgePolicy::CopyInterior ? "copy_interior" : "one_sided"},
        {"stencil", reg.stencil_form == StencilForm::Logarithmic ? "logarithmic" : "direct"},
        {"discretization", reg.discretization == Discretization::Staggered ? "staggered" : "collocated"}};
    j["output"] = {{"analyses", out.analyses}, {"stations", out.stations}};
    return j;
}

Medium parse_medium(Reader& r, const YAML::Node& root, System system) {
    Medium m = system == System::EM ? Medium::vacuum_index() : Medium::free_space();
    const YAML::Node n = root["medium"];
    if (!n) return m;
    const std::string p = "medium";
    r.keys(n, p, {"kind", "shape", "value", "base", "kx", "kz", "center", "slope", "amplitude", "width", "grid",
                  "domain"});
    const auto kind = r.get<std::string>(n, p, "kind", system == System::EM ? "index" : "potential");
    if (kind == "index")
        m.kind = MediumKind::Index;
    else if (kind == "potential")
        m.kind = MediumKind::Potential;
    else
        r.fail(n["kind"], "medium.kind", "expected index or potential");
    const double neutral = m.kind == MediumKind::Index ? 1.0 : 0.0;

    const auto shape = r.get<std::string>(n, p, "shape", "uniform");
    auto only = [&](std::initializer_list<const char*> used) {
        for (const char* k : {"value", "base", "kx", "kz", "center", "slope", "amplitude", "width", "grid"})
            if (n[k] && std::find_if(used.begin(), used.end(), [&](const char* u) { return std::string(u) == k; }) ==
                            used.end())
                r.fail(n[k], std::string("medium.") + k, "not used by shape '" + shape + "'");
    };
    if (shape == "uniform") {
        only({"value"});
        m.shape = UniformField{r.real(n, p, "value", neutral)};
    } else if (shape == "quadratic") {
        only({"base", "kx", "kz", "center"});
        m.shape = QuadraticField{r.real(n, p, "base", neutral), r.real(n, p, "kx", 0.0), r.real(n, p, "kz", 0.0),
                                 r.vec(n, p, "center", {})};
    } else if (shape == "linear") {
        only({"base", "slope"});
        m.shape = LinearField{r.real(n, p, "base", neutral), r.vec(n, p, "slope", {})};
    } else if (shape == "gaussian") {
        only({"base", "amplitude", "center", "width"});
        m.shape = GaussianField{r.real(n, p, "base", neutral), r.real(n, p, "amplitude", 0.0),
                                r.vec(n, p, "center", {}), r.real(n, p, "width", 1.0)};
        if (!(std::get<GaussianField>(m.shape).width > 0.0)) r.fail(n["width"], "medium.width", "must be positive");
    } else if (shape == "table") {
        only({"grid"});
        const YAML::Node g = n["grid"];
        if (!g) r.fail(n, "medium.grid", "required for shape 'table'");
        const std::string gp = "medium.grid";
        r.keys(g, gp, {"x_min", "x_max", "z_min", "z_max", "nx", "nz", "values"});
        TableField t;
        t.x_min = r.real(g, gp, "x_min", 0.0);
        t.x_max = r.real(g, gp, "x_max", 1.0);
        t.z_min = r.real(g, gp, "z_min", 0.0);
        t.z_max = r.real(g, gp, "z_max", 1.0);
        t.nx = r.get<std::size_t>(g, gp, "nx", 2);
        t.nz = r.get<std::size_t>(g, gp, "nz", 2);
        t.values = r.reals(g, gp, "values");
        if (t.values.size() != t.nx * t.nz) r.fail(g["values"], "medium.grid.values", "expected nx * nz entries");
        m.shape = t;
    } else {
        r.fail(n["shape"], "medium.shape", "expected uniform, quadratic, linear, gaussian or table");
    }

    if (const YAML::Node d = n["domain"]) {
        const std::string dp = "medium.domain";
        r.keys(d, dp, {"x_min", "x_max", "z_min", "z_max"});
        m.domain.x_min = r.get<double>(d, dp, "x_min", m.domain.x_min);
        m.domain.x_max = r.get<double>(d, dp, "x_max", m.domain.x_max);
        m.domain.z_min = r.get<double>(d, dp, "z_min", m.domain.z_min);
        m.domain.z_max = r.get<double>(d, dp, "z_max", m.domain.z_max);
        if (!(m.domain.x_max > m.domain.x_min) || !(m.domain.z_max > m.domain.z_min))
            r.fail(d, dp, "empty domain box");
    }
    return m;
}

}  // namespace

std::string config_hash(const json& canonical) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

RunConfig parse_config(const YAML::Node& root, const std::string& source) {
    Reader r(source);
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    r.keys(root, "", {"system", "lambda0", "units", "beam", "medium", "integration", "wave_potential",
                      "regularization", "output", "sweep"});

    RunConfig cfg;
    Scenario& sc = cfg.scenario;
    const auto sys_name = r.get<std::string>(root, "", "system", "quantum");
    try {
        sc.system = parse_system(sys_name);
    } catch (const ConfigError&) {
        r.fail(root["system"], "system", "expected em, quantum, relativistic or massless");
    }
    double c = 1.0;
    if (const YAML::Node u = root["units"]) {
        r.keys(u, "units", {"c"});
        c = r.real(u, "units", "c", 1.0);
        if (!(c > 0.0)) r.fail(u["c"], "units.c", "must be positive");
        if (c != 1.0 && (sc.system == System::EM || sc.system == System::Quantum))
            r.fail(u["c"], "units.c", "only relativistic and massless runs take a speed of light");
    }
    sc.units = Units::for_system(sc.system, c);
    sc.lambda0 = r.real(root, "", "lambda0", sc.lambda0);

    if (const YAML::Node b = root["beam"]) {
        const std::string p = "beam";
        r.keys(b, p, {"profile", "w0", "order", "span", "rays", "table"});
        const auto prof = r.get<std::string>(b, p, "profile", "gaussian");
        sc.beam.kind = parse_profile(r, b["profile"], prof);
        sc.beam.w0 = r.real(b, p, "w0", sc.beam.w0);
        if (b["order"] && sc.beam.kind != ProfileKind::SuperGaussian)
            r.fail(b["order"], "beam.order", "only used by the supergaussian profile");
        sc.beam.order = r.real(b, p, "order", sc.beam.order);
        sc.beam.span = r.real(b, p, "span", sc.beam.span);
        const auto rays = r.get<long long>(b, p, "rays", static_cast<long long>(sc.beam.ray_count));
        if (rays < 0) r.fail(b["rays"], "beam.rays", "must be positive");
        sc.beam.ray_count = static_cast<std::size_t>(rays);
        if (const YAML::Node t = b["table"]) {
            if (sc.beam.kind != ProfileKind::Table) r.fail(t, "beam.table", "only used by the table profile");
            r.keys(t, "beam.table", {"x", "amplitude"});
            sc.beam.table_x = r.reals(t, "beam.table", "x");
            sc.beam.table_amplitude = r.reals(t, "beam.table", "amplitude");
        } else if (sc.beam.kind == ProfileKind::Table) {
            r.fail(b, "beam.table", "required for the table profile");
        }
    }

    sc.medium = parse_medium(r, root, sc.system);

    double z_final = 0.0;
    bool by_length = false;
    double dt_factor = 1.0;
    if (const YAML::Node in = root["integration"]) {
        const std::string p = "integration";
        r.keys(in, p, {"dt", "dt_factor", "n_steps", "z_final", "z_final_rayleigh", "snapshot_stride"});
        sc.integration.dt = r.real(in, p, "dt", 0.0);
        if (sc.integration.dt < 0.0) r.fail(in["dt"], "integration.dt", "must be positive (0 selects the default)");
        dt_factor = r.real(in, p, "dt_factor", 1.0);
        if (!(dt_factor > 0.0)) r.fail(in["dt_factor"], "integration.dt_factor", "must be positive");
        if (in["dt_factor"] && in["dt"]) r.fail(in["dt_factor"], "integration.dt_factor", "conflicts with integration.dt");
        const int lengths = (in["n_steps"] ? 1 : 0) + (in["z_final"] ? 1 : 0) + (in["z_final_rayleigh"] ? 1 : 0);
        if (lengths > 1) r.fail(in, p, "give only one of n_steps, z_final, z_final_rayleigh");
        const auto steps = r.get<long long>(in, p, "n_steps", 0);
        if (steps < 0) r.fail(in["n_steps"], "integration.n_steps", "must not be negative");
        sc.integration.n_steps = static_cast<std::size_t>(steps);
        if (in["z_final"]) {
            by_length = true;
            z_final = r.real(in, p, "z_final", 0.0);
            if (!(z_final > 0.0)) r.fail(in["z_final"], "integration.z_final", "must be positive");
        }
        if (in["z_final_rayleigh"]) {
            by_length = true;
            const double zr = r.real(in, p, "z_final_rayleigh", 0.0);
            if (!(zr > 0.0)) r.fail(in["z_final_rayleigh"], "integration.z_final_rayleigh", "must be positive");
            z_final = zr * kPi * sc.beam.w0 * sc.beam.w0 / sc.lambda0;
        }
        const auto stride = r.get<long long>(in, p, "snapshot_stride", 1);
        if (stride <= 0) r.fail(in["snapshot_stride"], "integration.snapshot_stride", "must be positive");
        sc.integration.snapshot_stride = static_cast<std::size_t>(stride);
    }

    sc.wave_potential_enabled = r.get<bool>(root, "", "wave_potential", true);

    if (const YAML::Node g = root["regularization"]) {
        const std::string p = "regularization";
        r.keys(g, p, {"amplitude_floor", "edge_policy", "stencil", "discretization"});
        auto& reg = sc.regularization;
        reg.amplitude_floor = r.real(g, p, "amplitude_floor", reg.amplitude_floor);
        const auto edge = r.get<std::string>(g, p, "edge_policy", "copy_interior");
        if (edge == "copy_interior")
            reg.edge_policy = EdgePolicy::CopyInterior;
        else if (edge == "one_sided")
            reg.edge_policy = EdgePolicy::OneSided;
        else
            r.fail(g["edge_policy"], "regularization.edge_policy", "expected copy_interior or one_sided");
        const auto form = r.get<std::string>(g, p, "stencil", "logarithmic");
        if (form == "logarithmic")
            reg.stencil_form = StencilForm::Logarithmic;
        else if (form == "direct")
            reg.stencil_form = StencilForm::Direct;
        else
            r.fail(g["stencil"], "regularization.stencil", "expected logarithmic or direct");
        const auto disc = r.get<std::string>(g, p, "discretization", "staggered");
        if (disc == "staggered")
            reg.discretization = Discretization::Staggered;
        else if (disc == "collocated")
            reg.discretization = Discretization::Collocated;
        else
            r.fail(g["discretization"], "regularization.discretization", "expected staggered or collocated");
    }

    if (const YAML::Node o = root["output"]) {
        r.keys(o, "output", {"dir", "analyses", "stations"});
        cfg.output.dir = r.get<std::string>(o, "output", "dir", cfg.output.dir);
        if (const YAML::Node a = o["analyses"]) {
            if (!a.IsSequence()) r.fail(a, "output.analyses", "expected a sequence");
            for (const auto& e : a) {
                const auto name = e.as<std::string>();
                if (name != "waist" && name != "uncertainty" && name != "profile" && name != "fringes")
                    r.fail(e, "output.analyses", "unknown analysis '" + name + "'");
                cfg.output.analyses.push_back(name);
            }
        }
        cfg.output.stations = r.reals(o, "output", "stations");
    }

    if (const YAML::Node s = root["sweep"]) {
        if (!s.IsMap()) r.fail(s, "sweep", "expected a mapping of dotted keys to value lists");
        for (const auto& kv : s) {
            SweepAxis axis;
            axis.key = kv.first.as<std::string>();
            if (!kv.second.IsSequence() || kv.second.size() == 0)
                r.fail(kv.second, "sweep." + axis.key, "expected a non-empty sequence");
            for (const auto& v : kv.second) axis.values.push_back(v);
            cfg.sweep.push_back(std::move(axis));
        }
    }

    try {
        sc.beam.validate();
        if (!(sc.lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
        if (by_length) {
            const double t = z_final / sc.launch_speed();
            const double base = (sc.integration.dt > 0.0 ? sc.integration.dt : sc.default_dt()) * dt_factor;
            sc.integration.n_steps = static_cast<std::size_t>(std::ceil(t / base));
            sc.integration.dt = t / static_cast<double>(sc.integration.n_steps);
        } else if (dt_factor != 1.0) {
            sc.integration.dt = sc.default_dt() * dt_factor;
        }
        sc.validate();
    } catch (const ConfigError& e) {
        r.rethrow(e);
    } catch (const Error& e) {
        r.rethrow(ConfigError(e.what()));
    }

    cfg.canonical = canonical_json(sc, cfg.output);
    cfg.hash = config_hash(cfg.canonical);
    return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
    }
    return parse_config(root, source);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void set_path(YAML::Node& root, const std::string& dotted, const YAML::Node& value) {
    std::vector<std::string> parts;
    std::stringstream ss(dotted);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) throw ConfigError("empty sweep key");
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = cur[parts[i]];
        cur.reset(next);
    }
    cur[parts.back()] = YAML::Clone(value);
}

std::vector<YAML::Node> expand_sweep(const YAML::Node& root) {
    YAML::Node base = YAML::Clone(root);
    std::vector<std::pair<std::string, std::vector<YAML::Node>>> axes;
    if (const YAML::Node s = root["sweep"]) {
        if (!s.IsMap()) throw ConfigError("sweep: expected a mapping of dotted keys to value lists");
        for (const auto& kv : s) {
            if (!kv.second.IsSequence() || kv.second.size() == 0)
                throw ConfigError("sweep." + kv.first.as<std::string>() + ": expected a non-empty sequence");
            std::vector<YAML::Node> vals;
            for (const auto& v : kv.second) vals.push_back(v);
            axes.emplace_back(kv.first.as<std::string>(), std::move(vals));
        }
        base.remove("sweep");
    }
    std::vector<YAML::Node> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        YAML::Node doc = YAML::Clone(base);
        for (std::size_t a = 0; a < axes.size(); ++a) set_path(doc, axes[a].first, axes[a].second[idx[a]]);
        out.push_back(doc);
        // odometer, last axis fastest
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].second.size()) break;
            idx[a] = 0;
            if (a == 0) return out;
        }
        if (axes.empty()) return out;
    }
}

}  // namespace wavepilot
