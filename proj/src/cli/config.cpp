#include "deconv/cli/config.hpp"

#include "deconv/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace deconv::cli {

using measures::DistributionSpec;
using measures::ReferenceKind;
using measures::ReferenceMeasureSpec;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) {
        throw DomainError(where + " must be an object");
    }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw DomainError("unknown key '" + key + "' in " + where);
        }
    }
}

double number(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw DomainError(where + " is missing '" + key + "'");
    }
    if (!j.at(key).is_number()) {
        throw DomainError(where + "." + key + " must be a number");
    }
    return j.at(key).get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

std::int64_t integer(const Json& j, const std::string& key, const std::string& where) {
    if (!j.at(key).is_number_integer()) {
        throw DomainError(where + "." + key + " must be an integer");
    }
    return j.at(key).get<std::int64_t>();
}

std::uint64_t seed_value(const Json& j, const std::string& key, const std::string& where) {
    if (!j.at(key).is_number_unsigned() && !(j.at(key).is_number_integer() && j.at(key).get<std::int64_t>() >= 0)) {
        throw DomainError(where + "." + key + " must be a nonnegative integer");
    }
    return j.at(key).get<std::uint64_t>();
}

std::size_t count_value(const Json& j, const std::string& key, const std::string& where) {
    const auto v = integer(j, key, where);
    if (v < 1) {
        throw DomainError(where + "." + key + " must be positive");
    }
    return static_cast<std::size_t>(v);
}

std::string text(const Json& j, const std::string& key, const std::string& where) {
    if (!j.at(key).is_string()) {
        throw DomainError(where + "." + key + " must be a string");
    }
    return j.at(key).get<std::string>();
}

ReferenceMeasureSpec reference_from_json(const Json& j) {
    const std::string where = "null.reference";
    check_keys(j, {"kind", "p"}, where);
    const std::string kind = text(j, "kind", where);
    if (kind == "exponential1") {
        return ReferenceMeasureSpec::exponential1();
    }
    if (kind == "uniform01") {
        return ReferenceMeasureSpec::uniform01();
    }
    if (kind == "geometric") {
        return ReferenceMeasureSpec::geometric(number(j, "p", where));
    }
    throw DomainError("unknown reference kind '" + kind + "' (exponential1, uniform01, geometric)");
}

Json reference_to_json(const ReferenceMeasureSpec& ref) {
    switch (ref.kind) {
        case ReferenceKind::Exponential1:
            return {{"kind", "exponential1"}};
        case ReferenceKind::Uniform01:
            return {{"kind", "uniform01"}};
        case ReferenceKind::Geometric:
            return {{"kind", "geometric"}, {"p", ref.p}};
    }
    return {};
}

nullmodel::Method method_from_string(const std::string& s) {
    if (s == "closed_form") return nullmodel::Method::ClosedForm;
    if (s == "quadrature") return nullmodel::Method::Quadrature;
    if (s == "monte_carlo") return nullmodel::Method::MonteCarlo;
    throw DomainError("unknown coefficient method '" + s + "' (closed_form, quadrature, monte_carlo)");
}

void apply_preset(NullConfig& out, const std::string& preset) {
    if (preset == "Mod1") {
        out.y = DistributionSpec::exponential(1.0);
        out.z = DistributionSpec::chi_squared(1.0);
        out.reference = ReferenceMeasureSpec::exponential1();
    } else if (preset == "Mod2") {
        out.y = DistributionSpec::poisson(1.0);
        out.z = DistributionSpec::geometric(1.0);
        out.reference = ReferenceMeasureSpec::geometric(0.5);
    } else {
        throw DomainError("unknown null preset '" + preset + "' (Mod1, Mod2)");
    }
    out.preset = preset;
}

NullConfig null_from_json(const Json& j) {
    const std::string where = "null";
    check_keys(j,
               {"preset", "y", "z", "dependence", "reference", "max_degree", "method", "u_split", "tolerance",
                "mc_draws", "mc_seed"},
               where);
    NullConfig out;
    if (j.contains("preset")) {
        apply_preset(out, text(j, "preset", where));
        for (const char* key : {"y", "z", "reference"}) {
            if (j.contains(key)) {
                throw DomainError(std::string("null.") + key + " conflicts with null.preset");
            }
        }
    }
    if (j.contains("y")) out.y = distribution_from_json(j.at("y"), "null.y");
    if (j.contains("z")) out.z = distribution_from_json(j.at("z"), "null.z");
    if (j.contains("reference")) out.reference = reference_from_json(j.at("reference"));
    if (j.contains("dependence")) {
        const auto& d = j.at("dependence");
        check_keys(d, {"kind", "coupling"}, "null.dependence");
        const std::string kind = text(d, "kind", "null.dependence");
        if (kind == "noise_coupled") {
            out.coupled = true;
            out.coupling = number(d, "coupling", "null.dependence");
        } else if (kind != "independent") {
            throw DomainError("unknown dependence kind '" + kind + "' (independent, noise_coupled)");
        }
    }
    if (j.contains("max_degree")) out.max_degree = static_cast<int>(integer(j, "max_degree", where));
    if (j.contains("method")) out.options.method = method_from_string(text(j, "method", where));
    out.options.u_split = number_or(j, "u_split", out.options.u_split, where);
    out.options.tolerance = number_or(j, "tolerance", out.options.tolerance, where);
    if (j.contains("mc_draws")) out.options.mc_draws = count_value(j, "mc_draws", where);
    if (j.contains("mc_seed")) out.options.mc_seed = seed_value(j, "mc_seed", where);
    if (!out.options.method) {
        out.options.method = out.coupled ? nullmodel::Method::MonteCarlo : nullmodel::Method::ClosedForm;
    }
    return out;
}

teststat::TestConfig test_from_json(const Json& j) {
    const std::string where = "test";
    check_keys(j, {"alpha", "kmax", "calibration", "calibration_reps", "seed", "condition_cap"}, where);
    teststat::TestConfig t;
    t.alpha = number_or(j, "alpha", t.alpha, where);
    if (j.contains("kmax")) {
        const auto& k = j.at("kmax");
        if (k.is_string() && k.get<std::string>() == "auto") {
            t.fixed_kmax.reset();
        } else if (k.is_number_integer()) {
            t.fixed_kmax = k.get<int>();
        } else {
            throw DomainError("test.kmax must be \"auto\" or an integer");
        }
    }
    if (j.contains("calibration")) {
        const std::string c = text(j, "calibration", where);
        if (c == "mc") {
            t.calibration = teststat::Calibration::MonteCarlo;
        } else if (c == "asymptotic") {
            t.calibration = teststat::Calibration::AsymptoticChi2_1;
        } else {
            throw DomainError("test.calibration must be \"mc\" or \"asymptotic\"");
        }
    }
    if (j.contains("calibration_reps")) t.calibration_reps = count_value(j, "calibration_reps", where);
    if (j.contains("seed")) t.seed = seed_value(j, "seed", where);
    t.condition_cap = number_or(j, "condition_cap", t.condition_cap, where);
    t.validate();
    return t;
}

CustomScenarioConfig custom_from_json(const Json& j) {
    const std::string where = "sim.custom[]";
    check_keys(j, {"name", "data", "truth_is_null"}, where);
    CustomScenarioConfig c;
    c.name = text(j, "name", where);
    if (j.contains("truth_is_null")) {
        if (!j.at("truth_is_null").is_boolean()) {
            throw DomainError(where + ".truth_is_null must be a boolean");
        }
        c.truth_is_null = j.at("truth_is_null").get<bool>();
    }
    if (!j.contains("data") || (j.at("data").is_string() && j.at("data").get<std::string>() == "null")) {
        c.truth_is_null = c.truth_is_null || !j.contains("truth_is_null");
        return c;
    }
    const auto& d = j.at("data");
    check_keys(d, {"x", "y", "z"}, where + ".data");
    if (d.contains("x")) {
        if (d.contains("y") || d.contains("z")) {
            throw DomainError(where + ".data takes either x or the pair y, z");
        }
        c.x = distribution_from_json(d.at("x"), where + ".data.x");
    } else {
        if (!d.contains("y") || !d.contains("z")) {
            throw DomainError(where + ".data needs x, or both y and z");
        }
        c.y = distribution_from_json(d.at("y"), where + ".data.y");
        c.z = distribution_from_json(d.at("z"), where + ".data.z");
    }
    return c;
}

SimConfig sim_from_json(const Json& j) {
    const std::string where = "sim";
    check_keys(j, {"scenarios", "n", "reps", "seed", "custom"}, where);
    SimConfig s;
    if (j.contains("scenarios")) {
        if (!j.at("scenarios").is_array()) {
            throw DomainError("sim.scenarios must be an array of names");
        }
        for (const auto& v : j.at("scenarios")) {
            if (!v.is_string()) {
                throw DomainError("sim.scenarios must be an array of names");
            }
            s.scenarios.push_back(v.get<std::string>());
        }
    }
    if (j.contains("n")) {
        if (!j.at("n").is_array()) {
            throw DomainError("sim.n must be an array of sample sizes");
        }
        s.n.clear();
        for (const auto& v : j.at("n")) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 2) {
                throw DomainError("sim.n entries must be integers >= 2");
            }
            s.n.push_back(v.get<int>());
        }
    }
    if (j.contains("reps")) s.reps = count_value(j, "reps", where);
    if (j.contains("seed")) s.seed = seed_value(j, "seed", where);
    if (j.contains("custom")) {
        if (!j.at("custom").is_array()) {
            throw DomainError("sim.custom must be an array");
        }
        for (const auto& c : j.at("custom")) {
            s.custom.push_back(custom_from_json(c));
        }
    }
    return s;
}

}  // namespace

DistributionSpec distribution_from_json(const Json& j, const std::string& where) {
    require_object(j, where);
    if (!j.contains("family")) {
        throw DomainError(where + " is missing 'family'");
    }
    const std::string family = text(j, "family", where);
    if (family == "exponential") {
        check_keys(j, {"family", "mean"}, where);
        return DistributionSpec::exponential(number(j, "mean", where));
    }
    if (family == "gamma") {
        check_keys(j, {"family", "shape", "scale"}, where);
        return DistributionSpec::gamma(number(j, "shape", where), number(j, "scale", where));
    }
    if (family == "chi_squared") {
        check_keys(j, {"family", "df"}, where);
        return DistributionSpec::chi_squared(number(j, "df", where));
    }
    if (family == "poisson") {
        check_keys(j, {"family", "mean"}, where);
        return DistributionSpec::poisson(number(j, "mean", where));
    }
    if (family == "geometric") {
        check_keys(j, {"family", "mean"}, where);
        return DistributionSpec::geometric(number(j, "mean", where));
    }
    if (family == "uniform") {
        check_keys(j, {"family", "low", "high"}, where);
        return DistributionSpec::uniform(number_or(j, "low", 0.0, where), number_or(j, "high", 1.0, where));
    }
    if (family == "point_mass") {
        check_keys(j, {"family", "value"}, where);
        return DistributionSpec::point_mass(number(j, "value", where));
    }
    if (family == "mixture") {
        check_keys(j, {"family", "weight", "first", "second"}, where);
        if (!j.contains("first") || !j.contains("second")) {
            throw DomainError(where + " mixture needs 'first' and 'second'");
        }
        return DistributionSpec::mixture(number(j, "weight", where),
                                         distribution_from_json(j.at("first"), where + ".first"),
                                         distribution_from_json(j.at("second"), where + ".second"));
    }
    throw DomainError("unknown distribution family '" + family + "' in " + where);
}

Json distribution_to_json(const DistributionSpec& dist) {
    using namespace measures;
    return std::visit(Overloaded{
                          [](const Exponential& d) { return Json{{"family", "exponential"}, {"mean", d.mean}}; },
                          [](const Gamma& d) {
                              return Json{{"family", "gamma"}, {"shape", d.shape}, {"scale", d.scale}};
                          },
                          [](const ChiSquared& d) { return Json{{"family", "chi_squared"}, {"df", d.df}}; },
                          [](const Poisson& d) { return Json{{"family", "poisson"}, {"mean", d.mean}}; },
                          [](const Geometric& d) { return Json{{"family", "geometric"}, {"mean", d.mean}}; },
                          [](const Uniform& d) { return Json{{"family", "uniform"}, {"low", d.low}, {"high", d.high}}; },
                          [](const PointMass& d) { return Json{{"family", "point_mass"}, {"value", d.value}}; },
                          [](const Mixture& d) {
                              return Json{{"family", "mixture"},
                                          {"weight", d.weight},
                                          {"first", distribution_to_json(*d.first)},
                                          {"second", distribution_to_json(*d.second)}};
                          },
                      },
                      dist.kind());
}

RunConfig parse_config(const Json& doc) {
    check_keys(doc, {"null", "test", "sim"}, "configuration");
    RunConfig c;
    if (doc.contains("null")) {
        c.null = null_from_json(doc.at("null"));
    } else {
        c.null = null_from_json(Json{{"preset", "Mod1"}});
    }
    if (doc.contains("test")) c.test = test_from_json(doc.at("test"));
    if (doc.contains("sim")) c.sim = sim_from_json(doc.at("sim"));
    c.test.coefficients = c.null.options;
    return c;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) {
        return parse_config(Json::object());
    }
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open configuration file " + path);
    }
    Json doc;
    try {
        in >> doc;
    } catch (const Json::exception& e) {
        throw DomainError("configuration file " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

Json null_to_json(const NullConfig& null) {
    Json j;
    if (null.preset) {
        j["preset"] = *null.preset;
    }
    j["y"] = distribution_to_json(null.y);
    j["z"] = distribution_to_json(null.z);
    j["dependence"] = null.coupled ? Json{{"kind", "noise_coupled"}, {"coupling", null.coupling}}
                                   : Json{{"kind", "independent"}};
    j["reference"] = reference_to_json(null.reference);
    j["max_degree"] = null.max_degree;
    j["method"] = nullmodel::to_string(null.options.method.value_or(nullmodel::Method::ClosedForm));
    j["u_split"] = null.options.u_split;
    j["tolerance"] = null.options.tolerance;
    j["mc_draws"] = null.options.mc_draws;
    j["mc_seed"] = null.options.mc_seed;
    return j;
}

Json config_to_json(const RunConfig& config) {
    Json test;
    test["alpha"] = config.test.alpha;
    test["kmax"] = config.test.fixed_kmax ? Json(*config.test.fixed_kmax) : Json("auto");
    test["calibration"] = teststat::to_string(config.test.calibration);
    test["calibration_reps"] = config.test.calibration_reps;
    test["seed"] = config.test.seed;
    test["condition_cap"] = config.test.condition_cap;

    Json sim;
    sim["scenarios"] = config.sim.scenarios;
    sim["n"] = config.sim.n;
    sim["reps"] = config.sim.reps;
    sim["seed"] = config.sim.seed;
    Json custom = Json::array();
    for (const auto& c : config.sim.custom) {
        Json e{{"name", c.name}, {"truth_is_null", c.truth_is_null}};
        if (c.x) {
            e["data"] = Json{{"x", distribution_to_json(*c.x)}};
        } else if (c.y) {
            e["data"] = Json{{"y", distribution_to_json(*c.y)}, {"z", distribution_to_json(*c.z)}};
        } else {
            e["data"] = "null";
        }
        custom.push_back(e);
    }
    sim["custom"] = custom;
    return Json{{"null", null_to_json(config.null)}, {"test", test}, {"sim", sim}};
}

nullmodel::NullSpec build_null(const NullConfig& null) {
    nullmodel::Dependence dep = nullmodel::Independent{};
    if (null.coupled) {
        dep = nullmodel::noise_coupled(null.y, null.z, null.coupling);
    }
    return nullmodel::make_null(null.y, null.z, null.reference, null.max_degree, dep);
}

std::string null_hash(const NullConfig& null) {
    Json j = null_to_json(null);
    j.erase("preset");
    const std::string canonical = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace deconv::cli
