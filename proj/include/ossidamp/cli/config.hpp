// config.hpp: Run configuration: YAML loading, --section.key=value overrides, schema checks, hashing

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "ossidamp/quadrature.hpp"
#include "ossidamp/susceptibility.hpp"
#include "ossidamp/thermo.hpp"

namespace ossidamp::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; `path` is the dotted key that failed.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// ------------------------------- YAML -> JSON ---------------------------------

namespace detail {

inline json scalar_to_json(const YAML::Node& node) {
    const std::string s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted
    if (s == "true" || s == "True" || s == "TRUE") return true;
    if (s == "false" || s == "False" || s == "FALSE") return false;
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    long long i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc{} && p == s.data() + s.size()) return i;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size() && std::isfinite(d)) return d;
    return s;
}

}  // namespace detail

inline json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Scalar: return detail::scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
    }
    return nullptr;
}

/// Parses YAML (and therefore JSON) text into a JSON document.
inline json parse_config_text(const std::string& text) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// True for arguments of the form --section.key=value.
inline bool is_override(const std::string& arg) {
    if (arg.rfind("--", 0) != 0) return false;
    const auto eq = arg.find('=');
    const auto dot = arg.find('.');
    return eq != std::string::npos && dot != std::string::npos && dot < eq && dot > 2;
}

/// Applies --a.b.c=value; the value is read as a YAML scalar or flow collection.
inline void apply_override(json& doc, const std::string& arg) {
    const auto eq = arg.find('=');
    const std::string path = arg.substr(2, eq - 2);
    const std::string value = arg.substr(eq + 1);
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(path, "malformed override");
        if (!node->is_object()) {
            if (node->is_null()) *node = json::object();
            else throw ConfigError(path, "override descends into a non-section");
        }
        if (dot == std::string::npos) {
            (*node)[key] = parse_config_text(value);
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

// ------------------------------- typed config ---------------------------------

struct ModelConfig {
    std::string type{"lorentz"};  // lorentz | drude | pseudo_ohmic | tabulated | none
    double chi0{0.3};
    double omega_L{5.0};
    double Gamma_L{1.0};
    double gamma{0.1};
    double Lambda{100.0};
    std::string path;
    std::string extrapolation{"none"};
};

struct OscillatorConfig {
    double omega0{1.0};
    double gamma{0.1};
    double c{1.0};
};

struct EnsembleConfig {
    std::string regime{"quantum"};
    std::vector<double> T{1.0};
    double hbar{1.0};
    double kB{1.0};
};

struct QuadratureConfig {
    double rel_tol{1e-10};
    double abs_tol{1e-14};
    std::size_t max_subdivisions{4000};
    int tail_probe_decades{3};
    std::optional<double> cutoff;
};

struct OracleConfig {
    std::vector<std::size_t> n_modes{250, 500, 1000, 2000};
    std::vector<double> omega_max{100.0};
};

struct AutocorrConfig {
    double dt_max{20.0};
    std::size_t n_points{401};
};

struct ValidateConfig {
    bool expect_invalid{false};
    double kk_omega_max{100.0};
    std::size_t kk_points{201};
    double kk_tolerance{1e-3};
    double field_width{1.0};
};

struct SweepConfig {
    std::string parameter{"model.chi0"};
    std::vector<double> values{0.1, 0.3, 0.5};
};

struct RunConfig {
    int schema_version{kSchemaVersion};
    ModelConfig model;
    OscillatorConfig oscillator;
    EnsembleConfig ensemble;
    QuadratureConfig quadrature;
    OracleConfig oracle;
    AutocorrConfig autocorr;
    ValidateConfig validate;
    SweepConfig sweep;
    std::string output_dir{"out"};
    std::size_t threads{1};

    json to_json() const;
    static RunConfig from_json(const json& doc);

    /// FNV-1a (64 bit) of the canonical JSON form, as 16 hex digits.
    std::string hash() const;

    chi::SusceptibilityModel susceptibility() const;
    thermo::Ensemble ensemble_at(double T) const;
    thermo::Ensemble ensemble_at(double T, thermo::Regime regime) const;
    quad::QuadratureSpec quadrature_spec() const;
};

namespace detail {

class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_, "expected a section (mapping)");
    }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const {
        seen_.push_back(key);
        return node_.contains(key) && !node_.at(key).is_null();
    }

    const json& raw(const std::string& key) const {
        seen_.push_back(key);
        return node_.at(key);
    }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(child_path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(child_path(key), "must be finite");
        return d;
    }

    double positive(const std::string& key, double fallback) const {
        const double d = number(key, fallback);
        if (!(d > 0.0)) throw ConfigError(child_path(key), "must be > 0");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum = 1) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum))
            throw ConfigError(child_path(key), "expected an integer >= " + std::to_string(minimum));
        return v.get<std::size_t>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(child_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(child_path(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        std::vector<double> out;
        if (v.is_number()) out.push_back(v.get<double>());
        else if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw ConfigError(child_path(key) + "[" + std::to_string(i) + "]", "expected a number");
                out.push_back(v[i].get<double>());
            }
        } else {
            throw ConfigError(child_path(key), "expected a number or a list of numbers");
        }
        if (out.empty()) throw ConfigError(child_path(key), "must not be empty");
        return out;
    }

    /// Keys present in the section but never read are schema errors.
    void reject_unknown() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError(child_path(it.key()), "unknown key");
        }
    }

private:
    const json& node_;
    std::string path_;
    mutable std::vector<std::string> seen_;
};

inline void require_increasing(const std::vector<double>& v, const std::string& path) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw ConfigError(path, "must be strictly increasing");
}

inline std::vector<double> expand_grid(const json& g, const std::string& path) {
    Reader r(g, path);
    const double start = r.positive("start", 1.0);
    const double stop = r.positive("stop", 1.0);
    const std::size_t points = r.count("points", 1);
    const std::string spacing = r.string("spacing", "log");
    r.reject_unknown();
    if (spacing != "log" && spacing != "linear") throw ConfigError(path + ".spacing", "expected 'log' or 'linear'");
    if (points > 1 && !(stop > start)) throw ConfigError(path + ".stop", "must exceed start");
    std::vector<double> out;
    for (std::size_t i = 0; i < points; ++i) {
        const double u = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(spacing == "log" ? start * std::pow(stop / start, u) : start + (stop - start) * u);
    }
    return out;
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    const json empty = json::object();
    detail::Reader top(doc.is_null() ? empty : doc, "");
    if (top.has("schema_version")) {
        const auto& v = top.raw("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
            throw ConfigError("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    auto section = [&](const char* key) -> const json& { return top.has(key) ? top.raw(key) : empty; };

    {
        detail::Reader r(section("model"), "model");
        auto& m = cfg.model;
        m.type = r.string("type", m.type);
        if (m.type != "lorentz" && m.type != "drude" && m.type != "pseudo_ohmic" && m.type != "tabulated" && m.type != "none")
            throw ConfigError("model.type", "expected one of lorentz, drude, pseudo_ohmic, tabulated, none");
        m.chi0 = r.number("chi0", m.chi0);
        m.omega_L = r.positive("omega_L", m.omega_L);
        m.Gamma_L = r.number("Gamma_L", m.Gamma_L);
        if (m.Gamma_L < 0.0) throw ConfigError("model.Gamma_L", "must be >= 0");
        m.gamma = r.number("gamma", m.gamma);
        if (m.gamma < 0.0) throw ConfigError("model.gamma", "must be >= 0");
        m.Lambda = r.positive("Lambda", m.Lambda);
        m.path = r.string("path", m.path);
        m.extrapolation = r.string("extrapolation", m.extrapolation);
        if (m.extrapolation != "none" && m.extrapolation != "zero")
            throw ConfigError("model.extrapolation", "expected 'none' or 'zero'");
        if (m.type == "tabulated" && m.path.empty()) throw ConfigError("model.path", "required for tabulated models");
        r.reject_unknown();
    }
    {
        detail::Reader r(section("oscillator"), "oscillator");
        auto& o = cfg.oscillator;
        o.omega0 = r.positive("omega0", o.omega0);
        o.gamma = r.positive("gamma", o.gamma);
        o.c = r.positive("c", o.c);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("ensemble"), "ensemble");
        auto& e = cfg.ensemble;
        e.regime = r.string("regime", e.regime);
        if (e.regime != "quantum" && e.regime != "classical")
            throw ConfigError("ensemble.regime", "expected 'quantum' or 'classical'");
        const bool has_T = r.has("T"), has_grid = r.has("T_grid");
        if (has_T && has_grid) throw ConfigError("ensemble.T_grid", "give either T or T_grid, not both");
        if (has_grid) e.T = detail::expand_grid(r.raw("T_grid"), "ensemble.T_grid");
        else e.T = r.numbers("T", e.T);
        for (std::size_t i = 0; i < e.T.size(); ++i)
            if (!(e.T[i] > 0.0) || !std::isfinite(e.T[i]))
                throw ConfigError("ensemble.T[" + std::to_string(i) + "]", "temperatures must be > 0");
        detail::require_increasing(e.T, "ensemble.T");
        e.hbar = r.positive("hbar", e.hbar);
        e.kB = r.positive("kB", e.kB);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("quadrature"), "quadrature");
        auto& q = cfg.quadrature;
        q.rel_tol = r.positive("rel_tol", q.rel_tol);
        q.abs_tol = r.number("abs_tol", q.abs_tol);
        if (!(q.abs_tol >= 0.0)) throw ConfigError("quadrature.abs_tol", "must be >= 0");
        q.max_subdivisions = r.count("max_subdivisions", q.max_subdivisions);
        q.tail_probe_decades = static_cast<int>(r.count("tail_probe_decades", static_cast<std::size_t>(q.tail_probe_decades)));
        if (r.has("cutoff")) q.cutoff = r.positive("cutoff", 1.0);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("oracle"), "oracle");
        auto& o = cfg.oracle;
        if (r.has("n_modes")) {
            const auto& v = r.raw("n_modes");
            o.n_modes.clear();
            if (v.is_number_integer() && v.get<long long>() >= 1) o.n_modes.push_back(v.get<std::size_t>());
            else if (v.is_array() && !v.empty()) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (!v[i].is_number_integer() || v[i].get<long long>() < 1)
                        throw ConfigError("oracle.n_modes[" + std::to_string(i) + "]", "expected an integer >= 1");
                    o.n_modes.push_back(v[i].get<std::size_t>());
                }
            } else {
                throw ConfigError("oracle.n_modes", "expected an integer or a list of integers");
            }
        }
        o.omega_max = r.numbers("omega_max", o.omega_max);
        for (std::size_t i = 0; i < o.omega_max.size(); ++i)
            if (!(o.omega_max[i] > 0.0)) throw ConfigError("oracle.omega_max[" + std::to_string(i) + "]", "must be > 0");
        r.reject_unknown();
    }
    {
        detail::Reader r(section("autocorr"), "autocorr");
        cfg.autocorr.dt_max = r.positive("dt_max", cfg.autocorr.dt_max);
        cfg.autocorr.n_points = r.count("n_points", cfg.autocorr.n_points, 2);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("validate"), "validate");
        auto& v = cfg.validate;
        v.expect_invalid = r.boolean("expect_invalid", v.expect_invalid);
        v.kk_omega_max = r.positive("kk_omega_max", v.kk_omega_max);
        v.kk_points = r.count("kk_points", v.kk_points, 2);
        v.kk_tolerance = r.positive("kk_tolerance", v.kk_tolerance);
        v.field_width = r.positive("field_width", v.field_width);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("sweep"), "sweep");
        cfg.sweep.parameter = r.string("parameter", cfg.sweep.parameter);
        if (cfg.sweep.parameter.find('.') == std::string::npos)
            throw ConfigError("sweep.parameter", "expected a dotted key such as model.chi0");
        cfg.sweep.values = r.numbers("values", cfg.sweep.values);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("output"), "output");
        cfg.output_dir = r.string("dir", cfg.output_dir);
        r.reject_unknown();
    }
    {
        detail::Reader r(section("run"), "run");
        cfg.threads = r.count("threads", cfg.threads);
        r.reject_unknown();
    }
    top.reject_unknown();
    return cfg;
}

inline json RunConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["model"] = {{"type", model.type},       {"chi0", model.chi0},     {"omega_L", model.omega_L},
                  {"Gamma_L", model.Gamma_L}, {"gamma", model.gamma},   {"Lambda", model.Lambda},
                  {"path", model.path},       {"extrapolation", model.extrapolation}};
    j["oscillator"] = {{"omega0", oscillator.omega0}, {"gamma", oscillator.gamma}, {"c", oscillator.c}};
    j["ensemble"] = {{"regime", ensemble.regime}, {"T", ensemble.T}, {"hbar", ensemble.hbar}, {"kB", ensemble.kB}};
    j["quadrature"] = {{"rel_tol", quadrature.rel_tol},
                       {"abs_tol", quadrature.abs_tol},
                       {"max_subdivisions", quadrature.max_subdivisions},
                       {"tail_probe_decades", quadrature.tail_probe_decades},
                       {"cutoff", quadrature.cutoff ? json(*quadrature.cutoff) : json(nullptr)}};
    j["oracle"] = {{"n_modes", oracle.n_modes}, {"omega_max", oracle.omega_max}};
    j["autocorr"] = {{"dt_max", autocorr.dt_max}, {"n_points", autocorr.n_points}};
    j["validate"] = {{"expect_invalid", validate.expect_invalid}, {"kk_omega_max", validate.kk_omega_max},
                     {"kk_points", validate.kk_points},           {"kk_tolerance", validate.kk_tolerance},
                     {"field_width", validate.field_width}};
    j["sweep"] = {{"parameter", sweep.parameter}, {"values", sweep.values}};
    j["output"] = {{"dir", output_dir}};
    j["run"] = {{"threads", threads}};
    return j;
}

inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string RunConfig::hash() const {
    // Output location and worker count do not change results.
    json j = to_json();
    j.erase("output");
    j.erase("run");
    return fmt::format("{:016x}", fnv1a(j.dump()));
}

inline chi::SusceptibilityModel RunConfig::susceptibility() const {
    if (model.type == "lorentz") return chi::LorentzBath{model.chi0, model.omega_L, model.Gamma_L};
    if (model.type == "none") return chi::LorentzBath{0.0, model.omega_L, model.Gamma_L};
    if (model.type == "drude") return chi::DrudeOhmic{model.gamma, model.Lambda, oscillator.omega0};
    if (model.type == "pseudo_ohmic") return chi::PseudoOhmic{model.gamma, oscillator.omega0};
    try {
        return chi::Tabulated::from_file(model.path, model.extrapolation == "zero" ? chi::Extrapolation::zero
                                                                                   : chi::Extrapolation::none);
    } catch (const std::exception& e) {
        throw ConfigError("model.path", e.what());
    }
}

inline thermo::Ensemble RunConfig::ensemble_at(double T) const {
    return ensemble_at(T, ensemble.regime == "classical" ? thermo::Regime::classical : thermo::Regime::quantum);
}

inline thermo::Ensemble RunConfig::ensemble_at(double T, thermo::Regime regime) const {
    return thermo::Ensemble{T, ensemble.hbar, ensemble.kB, regime};
}

inline quad::QuadratureSpec RunConfig::quadrature_spec() const {
    quad::QuadratureSpec s;
    s.rel_tol = quadrature.rel_tol;
    s.abs_tol = quadrature.abs_tol;
    s.max_subdivisions = quadrature.max_subdivisions;
    s.tail_probe_decades = quadrature.tail_probe_decades;
    s.cutoff = quadrature.cutoff;
    return s;
}

/// Loads a config file, applies overrides in order, and validates the result.
inline RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = path.empty() ? json::object() : load_config_file(path);
    if (doc.is_null()) doc = json::object();
    if (!doc.is_object()) throw ConfigError("", "config root must be a mapping");
    for (const auto& o : overrides) apply_override(doc, o);
    return RunConfig::from_json(doc);
}

}  // namespace ossidamp::cli
