#include "rmg1/spec_io.hpp"

#include "rmg1/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace rmg1::io {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const char* where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(std::string(where) + ": missing field '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "Infinity") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(what + " must be a number");
}

double number_or(const json& obj, const char* key, double fallback, const char* where) {
    return obj.contains(key) ? number(obj.at(key), std::string(where) + "." + key) : fallback;
}

std::vector<double> numbers(const json& v, const std::string& what) {
    if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, what));
    return out;
}

std::string family_of(const json& obj, const char* where) {
    const auto& f = field(obj, "family", where);
    if (!f.is_string()) throw ConfigError(std::string(where) + ".family must be a string");
    return f.get<std::string>();
}

ServiceDistribution service_from(const json& s) {
    const auto family = family_of(s, "service");
    if (family == "exponential") return ServiceDistribution::exponential(number(field(s, "mean", "service"), "service.mean"));
    if (family == "uniform")
        return ServiceDistribution::uniform(number(field(s, "a", "service"), "service.a"),
                                            number(field(s, "b", "service"), "service.b"));
    if (family == "table")
        return ServiceDistribution::tabulated(numbers(field(s, "breakpoints", "service"), "service.breakpoints"),
                                              numbers(field(s, "values", "service"), "service.values"));
    throw ConfigError("service.family must be exponential, uniform or table, got '" + family + "'");
}

ReshapeFunction reshape_from(const json& r) {
    const auto family = family_of(r, "reshape");
    if (family == "constant") return ReshapeFunction::constant(number_or(r, "value", 1.0, "reshape"));
    if (family == "linear")
        return ReshapeFunction::linear(number(field(r, "a", "reshape"), "reshape.a"),
                                       number(field(r, "b", "reshape"), "reshape.b"),
                                       number(field(r, "end", "reshape"), "reshape.end"),
                                       number_or(r, "beyond", 0.0, "reshape"));
    if (family == "window") {
        const double t = number(field(r, "t", "reshape"), "reshape.t");
        return r.contains("height") ? ReshapeFunction::window(t, number(r.at("height"), "reshape.height"))
                                    : ReshapeFunction::window(t);
    }
    if (family == "table")
        return ReshapeFunction::tabulated(numbers(field(r, "breakpoints", "reshape"), "reshape.breakpoints"),
                                          numbers(field(r, "values", "reshape"), "reshape.values"));
    throw ConfigError("reshape.family must be constant, linear, window or table, got '" + family + "'");
}

}  // namespace

QueueModel model_from_json(const json& spec) {
    if (!spec.is_object()) throw ConfigError("model spec must be a JSON object");
    try {
        const double lambda0 = number(field(spec, "lambda0", "spec"), "lambda0");
        auto reshape = reshape_from(field(spec, "reshape", "spec"));
        auto service = service_from(field(spec, "service", "spec"));
        return QueueModel(lambda0, std::move(reshape), std::move(service));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

QueueModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

json with_parameter(json spec, std::string_view param, double value) {
    if (param == "lambda0") {
        spec["lambda0"] = value;
        return spec;
    }
    std::string name(param);
    if (name.rfind("reshape.", 0) == 0) name = name.substr(8);
    if (!spec.contains("reshape") || !spec["reshape"].is_object())
        throw ConfigError("spec has no reshape object to sweep");
    const std::string family = spec["reshape"].value("family", "");
    const std::vector<std::string> allowed = family == "constant" ? std::vector<std::string>{"value"}
                                             : family == "linear" ? std::vector<std::string>{"a", "b", "end", "beyond"}
                                             : family == "window" ? std::vector<std::string>{"t", "height"}
                                                                  : std::vector<std::string>{};
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
        throw ConfigError("cannot sweep '" + std::string(param) + "' for reshape family '" + family + "'");
    spec["reshape"][name] = value;
    return spec;
}

}  // namespace rmg1::io
