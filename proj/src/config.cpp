#include "augtrunc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "augtrunc/error.hpp"
#include "json.hpp"

namespace augtrunc {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) bad("unknown key '" + key + "' in " + where);
    }
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) bad(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(what + " must be finite");
    return v;
}

std::size_t count(const json& j, const std::string& what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) bad(what + " must be a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& what) {
    if (!j.is_array()) bad(what + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(number(x, what));
    return v;
}

const json& required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) bad(where + " needs '" + key + "'");
    return obj.at(key);
}

// 2.5 | [1, 2, 3] | {"kind": "geometric", "scale": 1, "ratio": 2} | ...
Sequence parse_sequence(const json& j, const std::string& what) {
    if (j.is_number()) return Sequence::constant(number(j, what));
    if (j.is_array()) return Sequence::list(numbers(j, what));
    if (!j.is_object()) bad(what + " must be a number, an array or an object");
    const json& kind = required(j, "kind", what);
    if (!kind.is_string()) bad(what + ".kind must be a string");
    const auto k = kind.get<std::string>();
    if (k == "constant") {
        only_keys(j, what, {"kind", "value"});
        return Sequence::constant(number(required(j, "value", what), what + ".value"));
    }
    if (k == "geometric") {
        only_keys(j, what, {"kind", "scale", "ratio"});
        return Sequence::geometric(number(required(j, "scale", what), what + ".scale"),
                                   number(required(j, "ratio", what), what + ".ratio"));
    }
    if (k == "linear") {
        only_keys(j, what, {"kind", "intercept", "slope"});
        return Sequence::linear(number(required(j, "intercept", what), what + ".intercept"),
                                number(required(j, "slope", what), what + ".slope"));
    }
    if (k == "list") {
        only_keys(j, what, {"kind", "values"});
        return Sequence::list(numbers(required(j, "values", what), what + ".values"));
    }
    bad("unknown sequence kind '" + k + "' in " + what);
}

ChainKind parse_kind(const json& j) {
    if (j == "discrete") return ChainKind::Discrete;
    if (j == "continuous") return ChainKind::Continuous;
    bad("model.params.kind must be \"discrete\" or \"continuous\"");
}

FamilyParams family_from_json(const json& model) {
    only_keys(model, "model", {"family", "params"});
    const json& name_j = required(model, "family", "model");
    if (!name_j.is_string()) bad("model.family must be a string");
    const auto name = name_j.get<std::string>();
    const json params = model.value("params", json::object());
    const std::string where = "model.params";

    if (name == "section2") {
        only_keys(params, where, {"g_choice"});
        family::Section2Example f;
        if (params.contains("g_choice")) {
            const json& c = params.at("g_choice");
            if (!c.is_number_integer() || (c.get<int>() != 1 && c.get<int>() != 2))
                bad("model.params.g_choice must be 1 or 2");
            f.g_choice = c.get<int>();
        }
        return f;
    }
    if (name == "example52") {
        only_keys(params, where, {"b"});
        family::Example52 f;
        if (params.contains("b")) f.b = number(params.at("b"), "model.params.b");
        return f;
    }
    if (name == "example53") {
        only_keys(params, where, {});
        return family::Example53{};
    }
    if (name == "remark42") {
        only_keys(params, where, {"lambda", "p"});
        family::Remark42 f;
        if (params.contains("lambda")) f.lambda = parse_sequence(params.at("lambda"), "model.params.lambda");
        if (params.contains("p")) f.p = parse_sequence(params.at("p"), "model.params.p");
        return f;
    }
    if (name == "single_birth") {
        only_keys(params, where, {"birth", "down"});
        family::SingleBirthCustom f;
        f.birth = parse_sequence(required(params, "birth", where), "model.params.birth");
        if (params.contains("down")) {
            const json& d = params.at("down");
            if (d == "to_zero") f.down = family::DownRule::ToZero;
            else if (d == "to_previous") f.down = family::DownRule::ToPrevious;
            else if (d == "uniform") f.down = family::DownRule::Uniform;
            else bad("model.params.down must be \"to_zero\", \"to_previous\" or \"uniform\"");
        }
        return f;
    }
    if (name == "single_death") {
        only_keys(params, where, {"death", "up", "jump_ratio"});
        family::SingleDeathCustom f;
        f.death = parse_sequence(required(params, "death", where), "model.params.death");
        f.up = parse_sequence(required(params, "up", where), "model.params.up");
        if (params.contains("jump_ratio")) f.jump_ratio = number(params.at("jump_ratio"), "model.params.jump_ratio");
        return f;
    }
    if (name == "birth_death") {
        only_keys(params, where, {"birth", "death"});
        family::BirthDeath f;
        f.birth = parse_sequence(required(params, "birth", where), "model.params.birth");
        f.death = parse_sequence(required(params, "death", where), "model.params.death");
        return f;
    }
    if (name == "finite") {
        only_keys(params, where, {"kind", "matrix"});
        family::FiniteExplicit f;
        f.kind = parse_kind(required(params, "kind", where));
        const json& m = required(params, "matrix", where);
        if (!m.is_array()) bad("model.params.matrix must be an array of rows");
        for (const auto& row : m) f.matrix.push_back(numbers(row, "model.params.matrix row"));
        return f;
    }
    bad("unknown family '" + name + "'");
}

AugmentationScheme parse_scheme(const json& j) {
    if (j.is_string()) {
        if (j == "last_column") return scheme::LastColumn{};
        if (j == "censored") return scheme::Censored{};
        if (j == "linear") return scheme::LinearColumn{};
        bad("unknown scheme '" + j.get<std::string>() + "'");
    }
    only_keys(j, "scheme", {"scheme", "outer", "anchor"});
    const json& kind = required(j, "scheme", "scheme");
    if (kind == "last_column") {
        only_keys(j, "scheme", {"scheme"});
        return scheme::LastColumn{};
    }
    if (kind == "linear") {
        only_keys(j, "scheme", {"scheme", "anchor"});
        scheme::LinearColumn s;
        if (j.contains("anchor")) s.anchor = count(j.at("anchor"), "scheme.anchor");
        return s;
    }
    if (kind == "censored") {
        only_keys(j, "scheme", {"scheme", "outer"});
        scheme::Censored s;
        if (j.contains("outer")) {
            const json& o = j.at("outer");
            if (o == "exact") s.exact = true;
            else if (o != "auto") s.outer = count(o, "scheme.outer");
        }
        return s;
    }
    bad("scheme.scheme must be \"censored\", \"linear\" or \"last_column\"");
}

ForcingFunction parse_forcing(const json& j, const FamilyParams& model) {
    if (j.is_string()) {
        if (j == "default") return default_forcing(model);
        if (j == "identity") return ForcingFunction::identity();
        bad("g must be \"default\", \"identity\" or an object");
    }
    const json& type = required(j, "type", "g");
    if (type == "identity") {
        only_keys(j, "g", {"type"});
        return ForcingFunction::identity();
    }
    if (type == "constant") {
        only_keys(j, "g", {"type", "value"});
        return ForcingFunction::constant(number(required(j, "value", "g"), "g.value"));
    }
    if (type == "indicator") {
        only_keys(j, "g", {"type", "state"});
        return ForcingFunction::indicator(count(required(j, "state", "g"), "g.state"));
    }
    if (type == "power") {
        only_keys(j, "g", {"type", "exponent"});
        return ForcingFunction::power(number(required(j, "exponent", "g"), "g.exponent"));
    }
    if (type == "values") {
        only_keys(j, "g", {"type", "values", "fill"});
        const double fill = j.contains("fill") ? number(j.at("fill"), "g.fill") : 0.0;
        return ForcingFunction::values(numbers(required(j, "values", "g"), "g.values"), fill);
    }
    bad("unknown g type");
}

}  // namespace

FamilyParams parse_family(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    return family_from_json(j);
}

SweepConfig parse_sweep_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    only_keys(j, "config",
              {"model", "scheme", "g", "anchor", "probes", "grid", "output", "tolerances", "expect_converged"});

    SweepConfig c;
    c.model = family_from_json(required(j, "model", "config"));
    // Family constraints are reported as config errors here.
    try {
        (void)make_builtin(c.model);
    } catch (const Error& e) {
        bad(e.what());
    }
    if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme"));
    c.g = parse_forcing(j.value("g", json("default")), c.model);
    if (j.contains("anchor")) c.anchor = count(j.at("anchor"), "anchor");
    if (j.contains("probes")) {
        const json& p = j.at("probes");
        if (!p.is_array()) bad("probes must be an array");
        for (const auto& x : p) c.probes.push_back(count(x, "probes entry"));
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        only_keys(g, "grid", {"n_min", "n_max", "step"});
        c.grid.n_min = count(required(g, "n_min", "grid"), "grid.n_min");
        c.grid.n_max = count(required(g, "n_max", "grid"), "grid.n_max");
        c.grid.step = g.contains("step") ? count(g.at("step"), "grid.step") : 1;
    } else if (const auto* f = std::get_if<family::FiniteExplicit>(&c.model)) {
        c.grid.n_min = c.grid.n_max = f->matrix.size() - 1;
    } else {
        bad("grid is required for infinite families");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        only_keys(o, "output", {"csv", "json", "timing"});
        if (o.contains("csv")) {
            if (!o.at("csv").is_string()) bad("output.csv must be a path");
            c.output.csv = o.at("csv").get<std::string>();
        }
        if (o.contains("json")) {
            if (!o.at("json").is_string()) bad("output.json must be a path");
            c.output.json = o.at("json").get<std::string>();
        }
        if (o.contains("timing")) {
            if (!o.at("timing").is_boolean()) bad("output.timing must be a boolean");
            c.output.timing = o.at("timing").get<bool>();
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        only_keys(t, "tolerances", {"window", "rtol"});
        if (t.contains("window")) c.tolerances.window = count(t.at("window"), "tolerances.window");
        if (t.contains("rtol")) c.tolerances.rtol = number(t.at("rtol"), "tolerances.rtol");
    }
    if (j.contains("expect_converged")) {
        if (!j.at("expect_converged").is_boolean()) bad("expect_converged must be a boolean");
        c.expect_converged = j.at("expect_converged").get<bool>();
    }
    c.validate();
    return c;
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sweep_config(ss.str());
}

}  // namespace augtrunc
