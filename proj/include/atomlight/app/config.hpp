#pragma once

#include "atomlight/dynamics.hpp"
#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/regime.hpp"

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace atomlight::app {

using json = nlohmann::json;

inline const std::vector<std::string>& known_analyses() {
    static const std::vector<std::string> names{"rho-coefficients", "stokes-map", "memory-protocol", "pointgas", "regime"};
    return names;
}

struct ModeSpec {
    std::string family = "hermite-gauss";
    int max_order = 1;  // all (m, n) with m + n <= max_order
    double w0 = 1.0;
    double k = 2.0 * pi;
};

struct GridSpec {
    int points = 32;                   // per transverse axis
    std::optional<double> half_width;  // default 6 w0
    int z_points = 3;
    double length = 0.1;  // ensemble length along z, centred on the waist
};

struct MediumSpec {
    double beta = 1.0;
    double c0 = 0.0;
    double c1 = 1.0;
    double c2 = 0.0;
    double rho = 1.0;
    Vec3 J = Vec3(0.0, 0.0, 0.5);
    std::optional<double> spin_squared;
};

struct PropagatorSpec {
    double a0 = 1.0;
    double a1 = 0.2;
    double k = 1.0;
    int quadrature_points = 128;
};

struct StokesSpec {
    double s1 = 1.0;
    double s2 = 0.0;
    double s3 = 0.0;
    double photons = 1e8;
    int classical_mode = 0;
};

struct MemorySpec {
    double kappa = 1.0;
    int modes = 1;
    double gain = -1.0;
    FeedbackTarget target = FeedbackTarget::AtomP;
    double input_mean = 0.0;
    double input_var = 0.5;
};

struct PointgasSpec {
    std::string profile = "gaussian";
    Vec3 size = Vec3::Ones();
    int atoms = 100;
    int batches = 16;
    int clouds_per_batch = 16;
    std::vector<Vec3> dk{Vec3::Zero(), Vec3(20.0, 0.0, 0.0)};
    int cells = 2;
};

struct RunConfig {
    Scenario scenario;
    ModeSpec modes;
    GridSpec grid;
    MediumSpec medium;
    PropagatorSpec propagator;
    StokesSpec stokes;
    MemorySpec memory;
    PointgasSpec pointgas;
    std::uint64_t seed = 0;
    std::vector<std::string> analyses;
    std::string output = "out";
    json raw;  // the parsed document, used for hashing and sweeps
};

namespace detail {

/// Reads keys out of one JSON object and rejects whatever is left over.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigInvalid(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigInvalid(name(key) + " must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigInvalid(name(key) + " must be finite");
        }
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (const json* v = get(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            double d = 0.0;
            number(key, d);
            out = d;
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigInvalid(name(key) + " must be an integer");
            out = v->get<int>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigInvalid(name(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    static Vec3 to_vec3(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 3) throw ConfigInvalid(where + " must be an array of 3 numbers");
        Vec3 r;
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number()) throw ConfigInvalid(where + " must be an array of 3 numbers");
            r(i) = v[i].get<double>();
        }
        return r;
    }

    void vec3(const std::string& key, Vec3& out) {
        if (const json* v = get(key)) out = to_vec3(*v, name(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigInvalid("unknown key '" + name(it.key()) + "'");
    }

    std::string where() const { return path_.empty() ? "config" : path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigInvalid(name + " must be > 0");
}

} // namespace detail

inline RunConfig parse_config(const json& doc) {
    using detail::positive;
    using detail::Section;
    RunConfig c;
    c.raw = doc;
    Section top(doc, "");

    if (const json* s = top.get("scenario")) {
        Section sec(*s, "scenario");
        sec.number("kappa", c.scenario.kappa);
        sec.number("N_P", c.scenario.N_P);
        sec.number("N_A", c.scenario.N_A);
        sec.number("OD", c.scenario.OD);
        sec.number("rho", c.scenario.rho);
        sec.number("d", c.scenario.d);
        sec.number("L", c.scenario.L);
        sec.number("lambda", c.scenario.lambda);
        sec.number("delta", c.scenario.delta);
        sec.number("gamma", c.scenario.gamma);
        sec.number("w", c.scenario.w);
        sec.integer("m", c.scenario.m);
        sec.integer("n", c.scenario.n);
        sec.finish();
        if (c.scenario.m < 0 || c.scenario.n < 0) throw ConfigInvalid("scenario.m and scenario.n must be >= 0");
    }

    if (const json* s = top.get("modes")) {
        Section sec(*s, "modes");
        sec.text("family", c.modes.family);
        sec.integer("max_order", c.modes.max_order);
        sec.number("w0", c.modes.w0);
        sec.number("k", c.modes.k);
        sec.finish();
    }
    if (c.modes.family != "hermite-gauss") throw ConfigInvalid("modes.family must be \"hermite-gauss\"");
    if (c.modes.max_order < 0) throw ConfigInvalid("modes.max_order must be >= 0");
    positive(c.modes.w0, "modes.w0");
    positive(c.modes.k, "modes.k");

    if (const json* s = top.get("grid")) {
        Section sec(*s, "grid");
        sec.integer("points", c.grid.points);
        sec.number("half_width", c.grid.half_width);
        sec.integer("z_points", c.grid.z_points);
        sec.number("length", c.grid.length);
        sec.finish();
    }
    if (c.grid.points < 2) throw ConfigInvalid("grid.points must be >= 2");
    if (c.grid.z_points < 1) throw ConfigInvalid("grid.z_points must be >= 1");
    if (c.grid.half_width) positive(*c.grid.half_width, "grid.half_width");
    positive(c.grid.length, "grid.length");

    if (const json* s = top.get("medium")) {
        Section sec(*s, "medium");
        sec.number("beta", c.medium.beta);
        sec.number("c0", c.medium.c0);
        sec.number("c1", c.medium.c1);
        sec.number("c2", c.medium.c2);
        sec.number("rho", c.medium.rho);
        sec.vec3("J", c.medium.J);
        sec.number("spin_squared", c.medium.spin_squared);
        sec.finish();
    }
    if (!(c.medium.rho >= 0.0)) throw ConfigInvalid("medium.rho must be >= 0");

    if (const json* s = top.get("propagator")) {
        Section sec(*s, "propagator");
        sec.number("a0", c.propagator.a0);
        sec.number("a1", c.propagator.a1);
        sec.number("k", c.propagator.k);
        sec.integer("quadrature_points", c.propagator.quadrature_points);
        sec.finish();
    }
    if (c.propagator.quadrature_points < 64) throw ConfigInvalid("propagator.quadrature_points must be >= 64");

    if (const json* s = top.get("stokes")) {
        Section sec(*s, "stokes");
        sec.number("s1", c.stokes.s1);
        sec.number("s2", c.stokes.s2);
        sec.number("s3", c.stokes.s3);
        sec.number("photons", c.stokes.photons);
        sec.integer("classical_mode", c.stokes.classical_mode);
        sec.finish();
    }
    if (!(c.stokes.photons >= 0.0)) throw ConfigInvalid("stokes.photons must be >= 0");

    if (const json* s = top.get("memory")) {
        Section sec(*s, "memory");
        sec.number("kappa", c.memory.kappa);
        sec.integer("modes", c.memory.modes);
        sec.number("gain", c.memory.gain);
        std::string target = c.memory.target == FeedbackTarget::AtomP ? "P_A" : "X_A";
        sec.text("target", target);
        if (target == "P_A") c.memory.target = FeedbackTarget::AtomP;
        else if (target == "X_A") c.memory.target = FeedbackTarget::AtomX;
        else throw ConfigInvalid("memory.target must be \"P_A\" or \"X_A\"");
        sec.number("input_mean", c.memory.input_mean);
        sec.number("input_var", c.memory.input_var);
        sec.finish();
    }
    if (c.memory.modes < 1) throw ConfigInvalid("memory.modes must be >= 1");
    positive(c.memory.input_var, "memory.input_var");

    if (const json* s = top.get("pointgas")) {
        Section sec(*s, "pointgas");
        sec.text("profile", c.pointgas.profile);
        sec.vec3("size", c.pointgas.size);
        sec.integer("atoms", c.pointgas.atoms);
        sec.integer("batches", c.pointgas.batches);
        sec.integer("clouds_per_batch", c.pointgas.clouds_per_batch);
        if (const json* v = sec.get("dk")) {
            if (!v->is_array()) throw ConfigInvalid("pointgas.dk must be an array of 3-vectors");
            c.pointgas.dk.clear();
            for (std::size_t i = 0; i < v->size(); ++i)
                c.pointgas.dk.push_back(Section::to_vec3((*v)[i], "pointgas.dk[" + std::to_string(i) + "]"));
        }
        sec.integer("cells", c.pointgas.cells);
        sec.finish();
    }
    if (c.pointgas.profile != "box" && c.pointgas.profile != "gaussian")
        throw ConfigInvalid("pointgas.profile must be \"box\" or \"gaussian\"");
    if (c.pointgas.atoms < 1) throw ConfigInvalid("pointgas.atoms must be >= 1");
    if (c.pointgas.batches < 1) throw ConfigInvalid("pointgas.batches must be >= 1");
    if (c.pointgas.clouds_per_batch < 1) throw ConfigInvalid("pointgas.clouds_per_batch must be >= 1");
    if (c.pointgas.cells < 1) throw ConfigInvalid("pointgas.cells must be >= 1");
    for (int d = 0; d < 3; ++d) positive(c.pointgas.size(d), "pointgas.size");

    if (const json* v = top.get("seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
            throw ConfigInvalid("seed must be a non-negative integer");
        c.seed = v->get<std::uint64_t>();
    }
    if (const json* v = top.get("analyses")) {
        if (!v->is_array()) throw ConfigInvalid("analyses must be an array of names");
        for (const auto& a : *v) {
            if (!a.is_string()) throw ConfigInvalid("analyses must be an array of names");
            const auto name = a.get<std::string>();
            const auto& known = known_analyses();
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw ConfigInvalid("analyses: unknown analysis '" + name + "'");
            c.analyses.push_back(name);
        }
    }
    top.text("output", c.output);
    top.finish();
    return c;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
}

/// FNV-1a 64 over the canonical (key-sorted, compact) serialization.
inline std::uint64_t config_hash(const json& doc) {
    const std::string s = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Every numeric field with its default value; sweeps may target these even when the config omits them.
inline json defaults_document() {
    const RunConfig c;
    json d;
    const auto& s = c.scenario;
    d["scenario"] = {{"kappa", s.kappa}, {"N_P", s.N_P}, {"N_A", s.N_A}, {"d", s.d}, {"L", s.L}, {"lambda", s.lambda},
                     {"delta", s.delta}, {"gamma", s.gamma}, {"w", s.w}, {"m", s.m}, {"n", s.n}};
    d["modes"] = {{"max_order", c.modes.max_order}, {"w0", c.modes.w0}, {"k", c.modes.k}};
    d["grid"] = {{"points", c.grid.points}, {"z_points", c.grid.z_points}, {"length", c.grid.length}};
    d["medium"] = {{"beta", c.medium.beta}, {"c0", c.medium.c0}, {"c1", c.medium.c1}, {"c2", c.medium.c2},
                   {"rho", c.medium.rho}};
    d["propagator"] = {{"a0", c.propagator.a0}, {"a1", c.propagator.a1}, {"k", c.propagator.k},
                       {"quadrature_points", c.propagator.quadrature_points}};
    d["stokes"] = {{"s1", c.stokes.s1}, {"s2", c.stokes.s2}, {"s3", c.stokes.s3}, {"photons", c.stokes.photons},
                   {"classical_mode", c.stokes.classical_mode}};
    d["memory"] = {{"kappa", c.memory.kappa}, {"modes", c.memory.modes}, {"gain", c.memory.gain},
                   {"input_mean", c.memory.input_mean}, {"input_var", c.memory.input_var}};
    d["pointgas"] = {{"atoms", c.pointgas.atoms}, {"batches", c.pointgas.batches},
                     {"clouds_per_batch", c.pointgas.clouds_per_batch}, {"cells", c.pointgas.cells}};
    return d;
}

/// Replace the scalar at a dotted path ("memory.kappa"). The target must be a number in the
/// config or a numeric field with a default; anything else is BadParameterPath.
inline json with_parameter(const json& doc, const std::string& path, double value) {
    if (path.empty()) throw BadParameterPath("empty parameter path");
    json out = doc;
    if (!out.is_object()) throw BadParameterPath("config is not an object");
    {
        const json defaults = defaults_document();
        const json* d = &defaults;
        json* node = &out;
        std::stringstream ss(path);
        std::string part;
        while (std::getline(ss, part, '.')) {
            if (part.empty() || !d->is_object() || !d->contains(part)) break;
            d = &(*d)[part];
            if (!node->is_object()) break;
            if (!node->contains(part)) (*node)[part] = d->is_object() ? json::object() : *d;
            node = &(*node)[part];
        }
    }
    json* node = &out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty() || !node->is_object() || !node->contains(part))
            throw BadParameterPath("'" + path + "' does not name a field of the config");
        node = &(*node)[part];
    }
    if (!node->is_number()) throw BadParameterPath("'" + path + "' is not a scalar number");
    if (node->is_number_integer()) {
        if (value != std::floor(value)) throw BadParameterPath("'" + path + "' takes integer values");
        *node = static_cast<long long>(value);
    } else {
        *node = value;
    }
    return out;
}

} // namespace atomlight::app
