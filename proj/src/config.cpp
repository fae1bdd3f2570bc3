#include "gravtop/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gravtop/error.hpp"

namespace gravtop {

using nlohmann::json;

namespace {

template <class T>
constexpr bool is_triple = std::is_same_v<T, std::array<int, 3>> || std::is_same_v<T, std::array<double, 3>>;

template <class T>
bool integral_ok(const json& v) {
    if constexpr (std::is_same_v<T, int>) {
        return v.is_number_integer();
    } else if constexpr (std::is_same_v<T, std::array<int, 3>>) {
        return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
    } else {
        return true;
    }
}

// Every object is read through a Reader so that unknown keys and wrongly
// typed values surface as ConfigError with the offending path.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if constexpr (is_triple<T>) {
            const json& v = j_.at(key);
            if (!v.is_array() || v.size() != 3)
                throw ConfigError(fmt::format("{}: expected an array of 3 numbers (got {})", at(key), v.dump()));
        }
        try {
            if (!integral_ok<T>(j_.at(key))) throw ConfigError(fmt::format("{}: expected an integer", at(key)));
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("{}: wrong type (got {})", at(key), j_.at(key).dump()));
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& child(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) throw ConfigError(fmt::format("{}: unknown key", at(it.key())));
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(fmt::format("{}: {}", path_.empty() ? "<root>" : path_, what));
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json box_to_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

Box box_from_json(const json& j, const std::string& path) {
    Reader r(j, path);
    Box b;
    r.get("lo", b.lo);
    r.get("hi", b.hi);
    r.finish();
    return b;
}

std::vector<Box> boxes_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", path));
    std::vector<Box> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(box_from_json(j[i], fmt::format("{}[{}]", path, i)));
    return out;
}

json spec_to_json(const ProblemSpec& p) {
    json mesh = {{"dim", p.mesh.dim},
                 {"nel", p.mesh.nel},
                 {"lengths", p.mesh.lengths},
                 {"thickness", p.mesh.thickness},
                 {"void_boxes", json::array()},
                 {"solid_boxes", json::array()}};
    for (const auto& b : p.mesh.void_boxes) mesh["void_boxes"].push_back(box_to_json(b));
    for (const auto& b : p.mesh.solid_boxes) mesh["solid_boxes"].push_back(box_to_json(b));

    json boundary = {{"supports", json::array()}, {"loads", json::array()}, {"symmetry", json::array()}};
    for (const auto& s : p.boundary.supports)
        boundary["supports"].push_back({{"region", box_to_json(s.where.region)}, {"fix", s.fix}});
    for (const auto& l : p.boundary.loads)
        boundary["loads"].push_back(
            {{"region", box_to_json(l.where.region)}, {"direction", l.direction}, {"magnitude", l.magnitude}});
    for (const auto& s : p.boundary.symmetry) boundary["symmetry"].push_back({{"axis", s.axis}, {"position", s.position}});

    return {{"name", p.name},
            {"mesh", mesh},
            {"boundary", boundary},
            {"kappa", p.kappa},
            {"load_rule", to_string(p.load_rule)},
            {"vf_star", p.vf_star},
            {"filter_mult", p.filter_mult},
            {"nu", p.nu},
            {"simp", {{"e_solid", p.simp.e_solid}, {"e_void", p.simp.e_void}, {"penalty", p.simp.penalty}}},
            {"mass",
             {{"gamma_solid", p.mass.gamma_solid},
              {"contrast", p.mass.contrast},
              {"eta_g", p.mass.eta_g},
              {"beta_g", p.mass.beta_g}}},
            {"move_limit", p.move_limit},
            {"g2_enabled", p.g2_enabled}};
}

ProblemSpec spec_from_json(const json& j, const std::string& path) {
    ProblemSpec p;
    Reader r(j, path);
    r.get("name", p.name);
    if (r.has("mesh")) {
        Reader m(r.child("mesh"), r.at("mesh"));
        m.get("dim", p.mesh.dim);
        m.get("nel", p.mesh.nel);
        m.get("lengths", p.mesh.lengths);
        m.get("thickness", p.mesh.thickness);
        if (m.has("void_boxes")) p.mesh.void_boxes = boxes_from_json(m.child("void_boxes"), m.at("void_boxes"));
        if (m.has("solid_boxes")) p.mesh.solid_boxes = boxes_from_json(m.child("solid_boxes"), m.at("solid_boxes"));
        m.finish();
        if (p.mesh.dim != 2 && p.mesh.dim != 3) m.fail("dim must be 2 or 3");
    }
    if (r.has("boundary")) {
        Reader b(r.child("boundary"), r.at("boundary"));
        if (b.has("supports")) {
            const json& arr = b.child("supports");
            if (!arr.is_array()) b.fail("supports must be an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader s(arr[i], fmt::format("{}[{}]", b.at("supports"), i));
                FixedSupport fs;
                if (s.has("region")) fs.where.region = box_from_json(s.child("region"), s.at("region"));
                s.get("fix", fs.fix);
                s.finish();
                p.boundary.supports.push_back(fs);
            }
        }
        if (b.has("loads")) {
            const json& arr = b.child("loads");
            if (!arr.is_array()) b.fail("loads must be an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader s(arr[i], fmt::format("{}[{}]", b.at("loads"), i));
                PointLoad pl;
                if (s.has("region")) pl.where.region = box_from_json(s.child("region"), s.at("region"));
                s.get("direction", pl.direction);
                s.get("magnitude", pl.magnitude);
                s.finish();
                p.boundary.loads.push_back(pl);
            }
        }
        if (b.has("symmetry")) {
            const json& arr = b.child("symmetry");
            if (!arr.is_array()) b.fail("symmetry must be an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader s(arr[i], fmt::format("{}[{}]", b.at("symmetry"), i));
                SymmetryFace f;
                s.get("axis", f.axis);
                s.get("position", f.position);
                s.finish();
                if (f.axis < 0 || f.axis > 2) s.fail("axis must be 0, 1 or 2");
                p.boundary.symmetry.push_back(f);
            }
        }
        b.finish();
    }
    r.get("kappa", p.kappa);
    std::string rule = to_string(p.load_rule);
    r.get("load_rule", rule);
    p.load_rule = load_rule_from_string(rule);
    r.get("vf_star", p.vf_star);
    r.get("filter_mult", p.filter_mult);
    r.get("nu", p.nu);
    if (r.has("simp")) {
        Reader s(r.child("simp"), r.at("simp"));
        s.get("e_solid", p.simp.e_solid);
        s.get("e_void", p.simp.e_void);
        s.get("penalty", p.simp.penalty);
        s.finish();
    }
    if (r.has("mass")) {
        Reader s(r.child("mass"), r.at("mass"));
        s.get("gamma_solid", p.mass.gamma_solid);
        s.get("contrast", p.mass.contrast);
        s.get("eta_g", p.mass.eta_g);
        s.get("beta_g", p.mass.beta_g);
        s.finish();
    }
    r.get("move_limit", p.move_limit);
    r.get("g2_enabled", p.g2_enabled);
    r.finish();
    return p;
}

const char* solver_name(SolverKind k) {
    switch (k) {
    case SolverKind::Auto: return "auto";
    case SolverKind::Direct: return "direct";
    case SolverKind::Cg: return "cg";
    }
    return "auto";
}

SolverKind solver_from_name(const std::string& s) {
    if (s == "auto") return SolverKind::Auto;
    if (s == "direct") return SolverKind::Direct;
    if (s == "cg") return SolverKind::Cg;
    throw ConfigError(fmt::format("solver.kind: unknown solver '{}' (auto, direct, cg)", s));
}

const std::set<std::string>& settings_sections() {
    static const std::set<std::string> s{"run", "solver", "continuation", "mma", "projection", "output"};
    return s;
}

json config_to_json(const RunConfig& c) {
    const RunOptions& o = c.options;
    return {{"problem", spec_to_json(c.problem)},
            {"run",
             {{"n_iter", o.n_iter},
              {"objective_scale", o.objective_scale},
              {"parallel", o.parallel},
              {"stop_on_change", o.stop_on_change},
              {"change_tolerance", o.change_tolerance}}},
            {"solver",
             {{"kind", solver_name(o.solver.kind)},
              {"cg_tolerance", o.solver.cg_tolerance},
              {"cg_max_iter_factor", o.solver.cg_max_iter_factor}}},
            {"continuation",
             {{"beta_initial", o.continuation.beta_initial},
              {"beta_max", o.continuation.beta_max},
              {"period", o.continuation.period}}},
            {"mma",
             {{"asyinit", o.mma.asyinit},
              {"asyincr", o.mma.asyincr},
              {"asydecr", o.mma.asydecr},
              {"albefa", o.mma.albefa},
              {"raa0", o.mma.raa0},
              {"c", o.mma.c},
              {"d", o.mma.d},
              {"dual_max_iter", o.mma.dual_max_iter},
              {"dual_tolerance", o.mma.dual_tolerance}}},
            {"projection", {{"eta", kProjectionEta}}},
            {"output", {{"dir", c.output_dir}, {"every", c.every}, {"threshold", c.threshold}}}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.options.parallel = true;
    Reader r(j, "");
    if (!r.has("problem")) r.fail("missing key 'problem'");
    const json& problem = r.child("problem");
    json spec_json;
    if (problem.is_string()) {
        spec_json = spec_to_json(builtin(problem.get<std::string>()));
    } else if (problem.is_object()) {
        spec_json = spec_to_json(spec_from_json(problem, "problem"));
    } else {
        r.fail("'problem' must be a builtin name or an object");
    }
    if (r.has("overrides")) {
        const json& ov = r.child("overrides");
        if (!ov.is_object()) r.fail("'overrides' must be an object");
        spec_json.merge_patch(ov);
    }
    c.problem = spec_from_json(spec_json, "problem");

    RunOptions& o = c.options;
    if (r.has("run")) {
        Reader s(r.child("run"), "run");
        s.get("n_iter", o.n_iter);
        s.get("objective_scale", o.objective_scale);
        s.get("parallel", o.parallel);
        s.get("stop_on_change", o.stop_on_change);
        s.get("change_tolerance", o.change_tolerance);
        s.finish();
        if (o.n_iter < 1) s.fail("n_iter must be >= 1");
        if (!(o.objective_scale > 0.0)) s.fail("objective_scale must be > 0");
    }
    if (r.has("solver")) {
        Reader s(r.child("solver"), "solver");
        std::string kind = solver_name(o.solver.kind);
        s.get("kind", kind);
        o.solver.kind = solver_from_name(kind);
        s.get("cg_tolerance", o.solver.cg_tolerance);
        s.get("cg_max_iter_factor", o.solver.cg_max_iter_factor);
        s.finish();
        if (!(o.solver.cg_tolerance > 0.0)) s.fail("cg_tolerance must be > 0");
        if (!(o.solver.cg_max_iter_factor > 0.0)) s.fail("cg_max_iter_factor must be > 0");
    }
    if (r.has("continuation")) {
        Reader s(r.child("continuation"), "continuation");
        s.get("beta_initial", o.continuation.beta_initial);
        s.get("beta_max", o.continuation.beta_max);
        s.get("period", o.continuation.period);
        s.finish();
        if (!(o.continuation.beta_initial > 0.0) || o.continuation.beta_max < o.continuation.beta_initial)
            s.fail("need 0 < beta_initial <= beta_max");
        if (o.continuation.period < 1) s.fail("period must be >= 1");
    }
    if (r.has("mma")) {
        Reader s(r.child("mma"), "mma");
        s.get("asyinit", o.mma.asyinit);
        s.get("asyincr", o.mma.asyincr);
        s.get("asydecr", o.mma.asydecr);
        s.get("albefa", o.mma.albefa);
        s.get("raa0", o.mma.raa0);
        s.get("c", o.mma.c);
        s.get("d", o.mma.d);
        s.get("dual_max_iter", o.mma.dual_max_iter);
        s.get("dual_tolerance", o.mma.dual_tolerance);
        s.finish();
    }
    if (r.has("projection")) {
        Reader s(r.child("projection"), "projection");
        double eta = kProjectionEta;
        s.get("eta", eta);
        s.finish();
        if (eta != kProjectionEta) s.fail("only eta = 0.5 is supported");
    }
    if (r.has("output")) {
        Reader s(r.child("output"), "output");
        s.get("dir", c.output_dir);
        s.get("every", c.every);
        s.get("threshold", c.threshold);
        s.finish();
        if (c.every < 0) s.fail("every must be >= 0");
        if (!(c.threshold > 0.0 && c.threshold < 1.0)) s.fail("threshold must be in (0, 1)");
    }
    r.finish();
    c.options.mma.move = c.problem.move_limit;
    validate(c.problem);
    return c;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
    }
}

} // namespace

RunConfig parse_config(const std::string& json_text) { return config_from_json(parse_json(json_text)); }

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& config) { return config_to_json(config).dump(2) + "\n"; }

RunConfig default_config(const std::string& problem_name) {
    return config_from_json(json{{"problem", problem_name}});
}

RunConfig apply_overrides(const RunConfig& config, const std::vector<std::string>& assignments) {
    json doc = config_to_json(config);
    for (const std::string& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("--set '{}': expected key=value", a));
        const std::string key = a.substr(0, eq);
        const std::string raw = a.substr(eq + 1);

        std::string pointer;
        std::stringstream ks(key);
        std::string part;
        bool first = true;
        while (std::getline(ks, part, '.')) {
            if (part.empty()) throw ConfigError(fmt::format("--set '{}': empty path segment", a));
            if (first && !settings_sections().contains(part)) pointer += "/problem";
            pointer += "/" + part;
            first = false;
        }
        const json::json_pointer ptr(pointer);
        if (!doc.contains(ptr)) throw ConfigError(fmt::format("--set '{}': unknown key '{}'", a, key));
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        doc[ptr] = value;
    }
    return config_from_json(doc);
}

std::string problem_to_json(const ProblemSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

ProblemSpec problem_from_json(const std::string& json_text) {
    ProblemSpec p = spec_from_json(parse_json(json_text), "problem");
    validate(p);
    return p;
}

} // namespace gravtop
