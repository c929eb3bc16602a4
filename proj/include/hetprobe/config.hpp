#pragma once

// Scenario configuration: a JSON key/value tree with a fixed schema. Keys
// carry their unit in the name (`_mhz`, `_um`, `_mt`, ...); si() converts.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hetprobe/errors.hpp"

namespace hetprobe {

using Json = nlohmann::ordered_json;

enum class Scenario { NoiseCurve, Spectrum, Oscillation, LossScan, FomScan, Fit };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names()
{
    static const std::vector<std::pair<Scenario, std::string>> names{
        {Scenario::NoiseCurve, "noise-curve"}, {Scenario::Spectrum, "spectrum"}, {Scenario::Oscillation, "oscillation"},
        {Scenario::LossScan, "loss-scan"},     {Scenario::FomScan, "fom-scan"},  {Scenario::Fit, "fit"}};
    return names;
}

inline std::string to_string(Scenario s)
{
    for (const auto& [k, v] : scenario_names())
        if (k == s) return v;
    return "unknown";
}

inline Scenario parse_scenario(std::string_view name)
{
    for (const auto& [k, v] : scenario_names())
        if (v == name) return k;
    std::string known;
    for (const auto& [k, v] : scenario_names()) known += (known.empty() ? "" : ", ") + v;
    throw InputError("unknown scenario '" + std::string(name) + "' (expected one of: " + known + ")");
}

/// Validation failure carrying one message per offending key.
class ConfigError : public InputError {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : InputError(join(problems)), problems_(std::move(problems))
    {
    }
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p)
    {
        std::string s = "invalid configuration:";
        for (const auto& m : p) s += "\n  " + m;
        return s;
    }
    std::vector<std::string> problems_;
};

enum class ValueKind { Number, Integer, Boolean, Text };

struct ConfigKey {
    std::string path;
    ValueKind kind = ValueKind::Number;
    Json fallback;                 // null means "unset" (only with nullable)
    double scale = 1.0;            // user unit -> SI
    bool nullable = false;
    double lower = -std::numeric_limits<double>::infinity();
    bool lower_open = false;
    double upper = std::numeric_limits<double>::infinity();
    std::vector<std::string> choices;  // Text only; empty means free text
    std::string help;
};

namespace detail {

inline ConfigKey num(std::string path, double def, double scale, std::string help, double lo = -INFINITY,
                     bool open = false, double hi = INFINITY)
{
    ConfigKey k;
    k.path = std::move(path);
    k.fallback = def;
    k.scale = scale;
    k.lower = lo;
    k.lower_open = open;
    k.upper = hi;
    k.help = std::move(help);
    return k;
}

inline ConfigKey positive(std::string path, double def, double scale, std::string help)
{
    return num(std::move(path), def, scale, std::move(help), 0.0, true);
}

inline ConfigKey integer(std::string path, long long def, long long lo, std::string help)
{
    ConfigKey k;
    k.path = std::move(path);
    k.kind = ValueKind::Integer;
    k.fallback = def;
    k.lower = static_cast<double>(lo);
    k.help = std::move(help);
    return k;
}

inline ConfigKey choice(std::string path, std::string def, std::vector<std::string> options, std::string help)
{
    ConfigKey k;
    k.path = std::move(path);
    k.kind = ValueKind::Text;
    k.fallback = std::move(def);
    k.choices = std::move(options);
    k.help = std::move(help);
    return k;
}

inline ConfigKey flag(std::string path, bool def, std::string help)
{
    ConfigKey k;
    k.path = std::move(path);
    k.kind = ValueKind::Boolean;
    k.fallback = def;
    k.help = std::move(help);
    return k;
}

inline ConfigKey optional_positive(std::string path, double scale, std::string help, bool allow_zero = false)
{
    ConfigKey k = num(std::move(path), 0.0, scale, std::move(help), 0.0, !allow_zero);
    k.fallback = nullptr;
    k.nullable = true;
    return k;
}

} // namespace detail

/// Every accepted key with its default. Defaults reproduce the reference
/// experiment.
inline const std::vector<ConfigKey>& config_schema()
{
    using namespace detail;
    static const std::vector<ConfigKey> schema = [] {
        std::vector<ConfigKey> s;
        ConfigKey seed = integer("seed", 1, 0, "RNG seed");
        s.push_back(seed);
        s.push_back(integer("threads", 0, 0, "worker threads, 0 = hardware concurrency"));
        ConfigKey out;
        out.path = "output_dir";
        out.kind = ValueKind::Text;
        out.fallback = "";
        out.help = "output directory; empty = $HETPROBE_OUTPUT_DIR or ./hetprobe-out";
        s.push_back(out);

        s.push_back(num("line.resonance_mhz", 0.0, 1e6, "zero-field F=2 -> F'=3 resonance on the frequency axis"));
        s.push_back(num("beat.splitting_mhz", 60.0, 1e6, "separation of the two optical components (beat frequency)"));
        s.push_back(choice("probe.polarization", "perpendicular", {"perpendicular", "parallel"}, "linear polarisation relative to the field"));
        s.push_back(positive("probe.waist_um", 100.0, 1e-6, "1/e^2 intensity radius"));

        s.push_back(choice("detector.mode", "statistical", {"statistical", "time-domain"}, "pulse simulation model"));
        s.push_back(choice("detector.arrivals", "poisson", {"poisson", "deterministic"}, "time-domain photon arrivals"));
        s.push_back(num("detector.quantum_efficiency", 0.77, 1.0, "detector quantum efficiency", 0.0, true, 1.0));
        s.push_back(num("detector.excess_noise", 3.3, 1.0, "avalanche excess noise factor", 1.0));
        s.push_back(optional_positive("detector.electronic_noise", 1.0, "electronic noise C_e; null = calibrated", true));
        s.push_back(positive("detector.crossing_photons", 5800.0, 1.0, "photons where electronic noise equals avalanche shot noise"));
        s.push_back(positive("detector.window_us", 10.0, 1e-6, "integration window"));
        s.push_back(positive("detector.filter_cutoff_khz", 650.0, 1e3, "time-domain low-pass corner"));
        s.push_back(num("detector.samples_per_cycle", 16.0, 1.0, "time-domain samples per beat cycle", 8.0));
        s.push_back(num("detector.phase_noise_floor_rad", 0.0, 1.0, "path-length phase noise per pulse", 0.0));
        s.push_back(flag("detector.noiseless", false, "disable all detector noise"));

        s.push_back(positive("cloud.atom_number", 2.4e6, 1.0, "trapped atoms"));
        s.push_back(positive("cloud.temperature_uk", 60.0, 1e-6, "cloud temperature"));
        s.push_back(positive("trap.radial_hz", 75.0, 1.0, "radial trap frequency"));
        s.push_back(positive("trap.axial_hz", 21.0, 1.0, "axial trap frequency"));
        s.push_back(num("trap.field_min_mt", 0.6, 1e-3, "field at the trap minimum", 0.0));

        s.push_back(positive("noise_curve.n_min", 1e3, 1.0, "smallest detected photon number"));
        s.push_back(positive("noise_curve.n_max", 1e6, 1.0, "largest detected photon number"));
        s.push_back(integer("noise_curve.points", 8, 2, "log-spaced photon numbers"));
        s.push_back(integer("noise_curve.pulses", 50, 2, "pulses per point"));

        s.push_back(num("spectrum.column_density", 2.2e12, 1.0, "atoms per m^2", 0.0));
        s.push_back(num("spectrum.offset_mhz", 0.0, 1e6, "true frequency offset of the resonance"));
        s.push_back(num("spectrum.scan_start_mhz", -80.0, 1e6, "first centre frequency"));
        s.push_back(num("spectrum.scan_stop_mhz", 80.0, 1e6, "last centre frequency"));
        s.push_back(integer("spectrum.points", 33, 3, "scan points"));
        s.push_back(integer("spectrum.shots", 16, 2, "shots with and without atoms per point"));
        s.push_back(positive("spectrum.photons", 3e5, 1.0, "detected photons per shot"));
        s.push_back(num("spectrum.field_mt", 0.6, 1e-3, "magnetic field", 0.0));
        s.push_back(flag("spectrum.weighted", false, "weight the fit by the per-point phase errors"));

        s.push_back(integer("oscillation.points", 120, 8, "phase measurements"));
        s.push_back(positive("oscillation.spacing_ms", 1.0, 1e-3, "time between pulses"));
        s.push_back(num("oscillation.amplitude_um", 250.0, 1e-6, "centre-of-mass oscillation amplitude", 0.0));
        s.push_back(positive("oscillation.frequency_hz", 21.0, 1.0, "oscillation frequency"));
        s.push_back(optional_positive("oscillation.damping_ms", 1e-3, "oscillation damping time; null = undamped"));
        s.back().fallback = 150.0;
        s.push_back(num("oscillation.phase_rad", 0.0, 1.0, "oscillation phase at t = 0"));
        s.push_back(num("oscillation.detuning_mhz", 13.0, 1e6, "centre frequency above the sigma-minus resonance"));
        s.push_back(num("oscillation.field_mt", 0.6, 1e-3, "magnetic field at the probe", 0.0));
        s.push_back(positive("oscillation.photons", 4e5, 1.0, "incident photons per pulse"));
        s.push_back(positive("oscillation.pulse_us", 50.0, 1e-6, "pulse length"));
        s.push_back(optional_positive("oscillation.probe_offset_um", 1e-6, "probe distance from the trap centre; null = one axial radius", true));
        s.push_back(num("oscillation.probe_fraction", 0.012, 1.0, "fraction of atoms in the probe", 0.0, false, 1.0));

        s.push_back(num("loss_scan.scan_start_mhz", -80.0, 1e6, "first centre frequency"));
        s.push_back(num("loss_scan.scan_stop_mhz", 80.0, 1e6, "last centre frequency"));
        s.push_back(integer("loss_scan.points", 321, 3, "scan points"));
        s.push_back(num("loss_scan.field_mt", 0.6, 1e-3, "magnetic field", 0.0));
        s.push_back(positive("loss_scan.photons_perpendicular", 6e5, 1.0, "incident photons per pulse, perpendicular"));
        s.push_back(positive("loss_scan.photons_parallel", 9e5, 1.0, "incident photons per pulse, parallel"));
        s.push_back(positive("loss_scan.pulse_us", 30.0, 1e-6, "pulse length"));
        s.push_back(num("loss_scan.pulses", 200.0, 1.0, "pulses per measurement", 0.0));
        s.push_back(num("loss_scan.probe_fraction", 0.012, 1.0, "fraction of atoms in the probe", 0.0, false, 1.0));
        s.push_back(choice("loss_scan.scheme", "stretched", {"stretched", "full"}, "ground sublevels that are excited"));

        s.push_back(num("fom_scan.scan_start_mhz", -80.0, 1e6, "first centre frequency"));
        s.push_back(num("fom_scan.scan_stop_mhz", 80.0, 1e6, "last centre frequency"));
        s.push_back(integer("fom_scan.points", 641, 3, "scan points"));
        s.push_back(num("fom_scan.low_field_ut", 10.0, 1e-6, "field of the low-field curve", 0.0));
        s.push_back(num("fom_scan.high_field_ut", 650.0, 1e-6, "field of the high-field curve", 0.0));
        s.push_back(positive("fom_scan.condensate_waist_um", 2.0, 1e-6, "waist of the condensate curve"));
        s.push_back(positive("fom_scan.condensate_loss_factor", 16.0, 1.0, "heating-loss multiplier for a condensate"));
        s.push_back(flag("fom_scan.include_loss_coefficient", false, "multiply the loss by 0.88"));

        ConfigKey input;
        input.path = "fit.input";
        input.kind = ValueKind::Text;
        input.fallback = "";
        input.help = "CSV file to fit";
        s.push_back(input);
        s.push_back(choice("fit.model", "noise", {"noise", "spectrum", "damped-sine"}, "model to fit"));
        for (const char* col : {"fit.x_column", "fit.y_column", "fit.sigma_column"}) {
            ConfigKey c;
            c.path = col;
            c.kind = ValueKind::Text;
            c.fallback = "";
            c.help = "column name; empty = model default";
            s.push_back(c);
        }
        return s;
    }();
    return schema;
}

inline const ConfigKey* find_key(std::string_view path)
{
    for (const auto& k : config_schema())
        if (k.path == path) return &k;
    return nullptr;
}

namespace detail {

inline std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline bool is_section(std::string_view prefix)
{
    const std::string p = std::string(prefix) + ".";
    for (const auto& k : config_schema())
        if (k.path.rfind(p, 0) == 0) return true;
    return false;
}

inline Json* locate(Json& tree, std::string_view path, bool create)
{
    Json* node = &tree;
    for (const auto& part : split_path(path)) {
        if (!node->is_object()) return nullptr;
        if (!node->contains(part)) {
            if (!create) return nullptr;
            (*node)[part] = Json::object();
        }
        node = &(*node)[part];
    }
    return node;
}

inline const Json* find(const Json& tree, std::string_view path)
{
    const Json* node = &tree;
    for (const auto& part : split_path(path)) {
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &(*node)[part];
    }
    return node;
}

inline void check_value(const ConfigKey& key, const Json& v, std::vector<std::string>& problems)
{
    const std::string& p = key.path;
    if (v.is_null()) {
        if (!key.nullable) problems.push_back(p + ": must not be null");
        return;
    }
    switch (key.kind) {
    case ValueKind::Boolean:
        if (!v.is_boolean()) problems.push_back(p + ": expected true or false");
        return;
    case ValueKind::Text:
        if (!v.is_string()) {
            problems.push_back(p + ": expected a string");
        } else if (!key.choices.empty()) {
            bool ok = false;
            std::string list;
            for (const auto& c : key.choices) {
                ok = ok || c == v.get<std::string>();
                list += (list.empty() ? "" : ", ") + c;
            }
            if (!ok) problems.push_back(p + ": '" + v.get<std::string>() + "' is not one of " + list);
        }
        return;
    case ValueKind::Integer:
    case ValueKind::Number: {
        if (!v.is_number()) {
            problems.push_back(p + ": expected a number");
            return;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            problems.push_back(p + ": must be finite");
            return;
        }
        if (key.kind == ValueKind::Integer && !v.is_number_integer() && x != std::floor(x)) {
            problems.push_back(p + ": expected an integer");
            return;
        }
        std::ostringstream bound;
        if (key.lower_open ? !(x > key.lower) : !(x >= key.lower)) {
            bound << p << ": must be " << (key.lower_open ? "> " : ">= ") << key.lower << " (got " << x << ")";
            problems.push_back(bound.str());
        } else if (!(x <= key.upper)) {
            bound << p << ": must be <= " << key.upper << " (got " << x << ")";
            problems.push_back(bound.str());
        }
        return;
    }
    }
}

inline void collect_unknown(const Json& node, const std::string& prefix, std::vector<std::string>& problems)
{
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (find_key(path)) {
            continue;
        } else if (is_section(path)) {
            if (it.value().is_object())
                collect_unknown(it.value(), path, problems);
            else
                problems.push_back(path + ": expected a section (object)");
        } else {
            problems.push_back(path + ": unknown key");
        }
    }
}

} // namespace detail

/// A validated configuration. `tree` holds every key in user units.
struct ScenarioConfig {
    Scenario scenario = Scenario::NoiseCurve;
    Json tree;

    const Json& raw(std::string_view path) const
    {
        const Json* node = &tree;
        for (const auto& part : detail::split_path(path)) node = &node->at(part);
        return *node;
    }
    bool is_set(std::string_view path) const { return !raw(path).is_null(); }
    double value(std::string_view path) const { return raw(path).get<double>(); }
    /// Value converted to SI units.
    double si(std::string_view path) const
    {
        const ConfigKey* k = find_key(path);
        if (!k) throw InputError("unknown configuration key " + std::string(path));
        // Divide by the exact reciprocal for sub-unit scales: 10 us -> 1e-5 exactly.
        return k->scale < 1.0 ? value(path) / std::round(1.0 / k->scale) : value(path) * k->scale;
    }
    long long integer(std::string_view path) const
    {
        const Json& v = raw(path);
        return v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
    }
    std::string text(std::string_view path) const { return raw(path).get<std::string>(); }
    bool flag(std::string_view path) const { return raw(path).get<bool>(); }

    std::uint64_t seed() const
    {
        const Json& v = raw("seed");
        return v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<double>());
    }
    unsigned threads() const { return static_cast<unsigned>(integer("threads")); }
};

inline Json default_config_tree()
{
    Json tree = Json::object();
    for (const auto& k : config_schema()) *detail::locate(tree, k.path, true) = k.fallback;
    return tree;
}

/// Parses configuration text. Empty or blank text is an empty tree.
/// `//` and `/* */` comments are accepted.
inline Json parse_config_text(std::string_view text)
{
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return Json::object();
    try {
        Json j = Json::parse(text, nullptr, true, true);
        if (!j.is_object()) throw ConfigError({"configuration root must be an object"});
        return j;
    } catch (const Json::parse_error& e) {
        throw ConfigError({std::string("configuration is not valid JSON: ") + e.what()});
    }
}

/// Applies `section.key=value`; the value is read as JSON when it parses,
/// otherwise as a string.
inline void apply_override(Json& raw, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError({"--set expects key=value, got '" + std::string(assignment) + "'"});
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json* node = detail::locate(raw, key, true);
    if (!node) throw ConfigError({key + ": cannot set a key below a non-section value"});
    *node = value;
}

/// Merges `raw` over the defaults and checks every key; throws ConfigError
/// listing all problems at once.
inline ScenarioConfig validate_config(Scenario scenario, const Json& raw)
{
    std::vector<std::string> problems;
    if (!raw.is_object()) throw ConfigError({"configuration root must be an object"});
    detail::collect_unknown(raw, "", problems);

    ScenarioConfig cfg;
    cfg.scenario = scenario;
    cfg.tree = default_config_tree();
    for (const auto& k : config_schema()) {
        const Json* given = detail::find(raw, k.path);
        if (!given) continue;
        detail::check_value(k, *given, problems);
        *detail::locate(cfg.tree, k.path, true) = *given;
    }

    if (problems.empty()) {
        auto pair_check = [&](const char* lo, const char* hi) {
            if (!(cfg.value(hi) > cfg.value(lo)))
                problems.push_back(std::string(hi) + ": must exceed " + lo);
        };
        pair_check("noise_curve.n_min", "noise_curve.n_max");
        pair_check("spectrum.scan_start_mhz", "spectrum.scan_stop_mhz");
        pair_check("loss_scan.scan_start_mhz", "loss_scan.scan_stop_mhz");
        pair_check("fom_scan.scan_start_mhz", "fom_scan.scan_stop_mhz");
        if (cfg.value("beat.splitting_mhz") == 0.0) problems.push_back("beat.splitting_mhz: must be non-zero");
        if (scenario == Scenario::Fit && cfg.text("fit.input").empty())
            problems.push_back("fit.input: required for the fit scenario");
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

inline ScenarioConfig validate_config(Scenario scenario, std::string_view text)
{
    return validate_config(scenario, parse_config_text(text));
}

} // namespace hetprobe
