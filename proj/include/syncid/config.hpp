#pragma once

// Experiment configuration: line-oriented `key = value` text with `#`
// comments. Omitted keys take the published figure parameters of the chosen
// experiment. Every value is validated as it is applied so that errors can
// name the offending key and line.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "syncid/chua.hpp"
#include "syncid/delay.hpp"
#include "syncid/discrete.hpp"

namespace syncid {

enum class ExperimentKind { tentmap, chua, mackeyglass };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::tentmap: return "tentmap";
        case ExperimentKind::chua: return "chua";
        case ExperimentKind::mackeyglass: return "mackeyglass";
    }
    return "?";
}

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, int line, const std::string& message)
        : std::runtime_error(describe(key, line, message)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    /// 0 for values given on the command line.
    int line() const noexcept { return line_; }

private:
    static std::string describe(const std::string& key, int line, const std::string& message) {
        std::string where = line > 0 ? "line " + std::to_string(line) : std::string("override");
        if (!key.empty()) where += ", key '" + key + "'";
        return where + ": " + message;
    }

    std::string key_;
    int line_;
};

struct Assignment {
    std::string key;
    std::string value;
    int line = 0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::tentmap;
    std::uint64_t seed = 1;
    std::uint64_t stride = 10;
    Real tol_param = 0.02;
    std::string output;

    DiscreteExperiment tentmap;
    ContinuousExperiment chua;
    DelayExperiment mackeyglass;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ValueReader {
    const Assignment& a;

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(a.key, a.line, msg); }

    Real real() const {
        Real v = 0.0;
        const char* first = a.value.data();
        const char* last = first + a.value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v))
            fail("cannot parse '" + a.value + "' as a finite number");
        return v;
    }

    Real positive() const {
        const Real v = real();
        if (!(v > 0.0)) fail("must be > 0");
        return v;
    }

    Real non_negative() const {
        const Real v = real();
        if (!(v >= 0.0)) fail("must be >= 0");
        return v;
    }

    std::uint64_t count(bool allow_zero = false) const {
        const Real v = real();
        if (v != std::floor(v) || v < 0.0 || v > 9.0e18) fail("must be a non-negative integer");
        if (!allow_zero && v == 0.0) fail("must be >= 1");
        return static_cast<std::uint64_t>(v);
    }

    std::uint64_t seed() const {
        std::uint64_t v = 0;
        const char* first = a.value.data();
        const char* last = first + a.value.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) fail("cannot parse '" + a.value + "' as a 64-bit seed");
        return v;
    }

    bool flag() const {
        if (a.value == "on" || a.value == "true" || a.value == "1") return true;
        if (a.value == "off" || a.value == "false" || a.value == "0") return false;
        fail("expected on/off");
    }
};

using Setter = std::function<void(ExperimentConfig&, const ValueReader&)>;

struct KeySpec {
    Setter apply;
    bool numeric = true;
};

using KeyTable = std::map<std::string, KeySpec, std::less<>>;

inline KeyTable common_keys() {
    KeyTable t;
    t["seed"] = {[](ExperimentConfig& c, const ValueReader& r) { c.seed = r.seed(); }};
    t["stride"] = {[](ExperimentConfig& c, const ValueReader& r) { c.stride = r.count(); }};
    t["tol_param"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tol_param = r.positive(); }};
    t["output"] = {[](ExperimentConfig& c, const ValueReader& r) { c.output = r.a.value; }, false};
    return t;
}

inline KeyTable tentmap_keys() {
    KeyTable t = common_keys();
    t["mu"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.map = TentMap(r.real(), c.tentmap.map.sigma()); }};
    t["sigma"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.map = TentMap(c.tentmap.map.mu(), r.real()); }};
    t["eps_couple"] = {[](ExperimentConfig& c, const ValueReader& r) {
        const Real v = r.real();
        if (!(v > 0.0 && v < 1.0)) r.fail("must lie in (0, 1)");
        c.tentmap.gains.eps_couple = v;
    }};
    t["eta"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.gains.eta = r.non_negative(); }};
    t["kernel_width"] = {[](ExperimentConfig& c, const ValueReader& r) {
        c.tentmap.gains.kernel = DeltaKernel(r.positive(), c.tentmap.gains.kernel.normalized());
    }};
    t["delta_normalized"] = {[](ExperimentConfig& c, const ValueReader& r) {
        c.tentmap.gains.kernel = DeltaKernel(c.tentmap.gains.kernel.width(), r.flag());
    }, false};
    t["sigma0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.sigma0 = r.real(); }};
    t["steps"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.steps = r.count(); }};
    t["sigma_min"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.bounds.sigma.lo = r.real(); }};
    t["sigma_max"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.bounds.sigma.hi = r.real(); }};
    t["p_limit"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.bounds.p_limit = r.positive(); }};
    t["x0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.x0 = r.real(); }};
    t["y0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.tentmap.y0 = r.real(); }};
    return t;
}

inline KeyTable chua_keys() {
    KeyTable t = common_keys();
    t["alpha"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.params.alpha = r.real(); }};
    t["beta_chua"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.params.beta_chua = r.real(); }};
    t["m0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.params.m0 = r.real(); }};
    t["m1"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.params.m1 = r.real(); }};
    t["sigma"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.params.sigma = r.positive(); }};
    t["gamma"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.gains.gamma = r.real(); }};
    t["zeta"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.gains.zeta = r.non_negative(); }};
    t["dt"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.gains.dt = r.positive(); }};
    t["t_end"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.t_end = r.positive(); }};
    t["sigma0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.sigma0 = r.positive(); }};
    t["burn_in"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.burn_in = r.positive(); }};
    t["sigma_min"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.bounds.sigma.lo = r.positive(); }};
    t["sigma_max"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.bounds.sigma.hi = r.positive(); }};
    t["q1_limit"] = {[](ExperimentConfig& c, const ValueReader& r) { c.chua.bounds.q1_limit = r.positive(); }};
    return t;
}

inline KeyTable mackeyglass_keys() {
    KeyTable t = common_keys();
    t["a"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.system.a = r.real(); }};
    t["b"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.system.b = r.real(); }};
    t["tau"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.schedule.base = r.positive(); }};
    t["gamma"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.gamma = r.real(); }};
    t["beta_gain"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.beta_gain = r.non_negative(); }};
    t["dt"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.dt = r.positive(); }};
    t["t_end"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.t_end = r.positive(); }};
    t["tau0"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.tau0 = r.positive(); }};
    t["phase2"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.schedule.varying = r.flag(); }, false};
    t["phase2_start"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.schedule.switch_time = r.non_negative(); }};
    t["tau_amplitude"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.schedule.amplitude = r.real(); }};
    t["tau_frequency"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.gains.schedule.frequency = r.real(); }};
    t["burn_in"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.burn_in = r.non_negative(); }};
    t["history_span"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.history_span = r.positive(); }};
    t["tau_min"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.tau_bounds.lo = r.positive(); }};
    t["tau_max"] = {[](ExperimentConfig& c, const ValueReader& r) { c.mackeyglass.tau_bounds.hi = r.positive(); }};
    t["delayed_rate"] = {[](ExperimentConfig& c, const ValueReader& r) {
        if (r.a.value == "intrinsic")
            c.mackeyglass.gains.delayed_rate = DelayedRate::intrinsic;
        else if (r.a.value == "coupled")
            c.mackeyglass.gains.delayed_rate = DelayedRate::coupled;
        else
            r.fail("expected intrinsic or coupled");
    }, false};
    return t;
}

inline const KeyTable& keys_for(ExperimentKind k) {
    static const KeyTable tent = tentmap_keys();
    static const KeyTable chua = chua_keys();
    static const KeyTable mg = mackeyglass_keys();
    switch (k) {
        case ExperimentKind::tentmap: return tent;
        case ExperimentKind::chua: return chua;
        case ExperimentKind::mackeyglass: return mg;
    }
    return tent;
}

inline ExperimentConfig defaults_for(ExperimentKind k) {
    ExperimentConfig c;
    c.experiment = k;
    switch (k) {
        case ExperimentKind::tentmap:
            c.stride = 10;
            c.tol_param = 0.02;
            break;
        case ExperimentKind::chua:
            c.stride = 20;
            c.tol_param = 0.05;
            break;
        case ExperimentKind::mackeyglass:
            c.stride = 20;
            c.tol_param = 0.5;
            break;
    }
    c.output = std::string(to_string(k)) + "_trace.csv";
    return c;
}

inline ExperimentKind parse_kind(const Assignment& a) {
    if (a.value == "tentmap") return ExperimentKind::tentmap;
    if (a.value == "chua") return ExperimentKind::chua;
    if (a.value == "mackeyglass") return ExperimentKind::mackeyglass;
    throw ConfigError(a.key, a.line, "unknown experiment '" + a.value + "' (tentmap, chua, mackeyglass)");
}

inline void check_interval(const Interval& iv, const std::string& lo_key, int line) {
    if (!(iv.lo < iv.hi)) throw ConfigError(lo_key, line, "lower bound must be below upper bound");
}

inline void validate(const ExperimentConfig& c, const std::vector<Assignment>& entries) {
    auto line_of = [&](std::string_view key) {
        int line = 0;
        for (const auto& a : entries)
            if (a.key == key) line = a.line;
        return line;
    };
    switch (c.experiment) {
        case ExperimentKind::tentmap: {
            const auto& e = c.tentmap;
            check_interval(e.bounds.sigma, "sigma_min", line_of("sigma_min"));
            if (!e.bounds.sigma.contains(e.sigma0))
                throw ConfigError("sigma0", line_of("sigma0"), "initial estimate outside [sigma_min, sigma_max]");
            break;
        }
        case ExperimentKind::chua: {
            const auto& e = c.chua;
            check_interval(e.bounds.sigma, "sigma_min", line_of("sigma_min"));
            if (!e.bounds.sigma.contains(e.sigma0))
                throw ConfigError("sigma0", line_of("sigma0"), "initial estimate outside [sigma_min, sigma_max]");
            if (e.t_end < e.gains.dt) throw ConfigError("t_end", line_of("t_end"), "must cover at least one step");
            break;
        }
        case ExperimentKind::mackeyglass: {
            const auto& e = c.mackeyglass;
            check_interval(e.tau_bounds, "tau_min", line_of("tau_min"));
            if (e.tau_bounds.lo < e.gains.dt)
                throw ConfigError("tau_min", line_of("tau_min"), "must be at least dt");
            if (e.tau_bounds.hi > e.history_span)
                throw ConfigError("tau_max", line_of("tau_max"), "must not exceed history_span");
            if (e.gains.schedule.max_value() > e.history_span)
                throw ConfigError("tau", line_of("tau"), "true delay exceeds history_span");
            if (e.gains.schedule.min_value() < e.gains.dt)
                throw ConfigError("tau", line_of("tau"), "true delay must be at least dt");
            if (!e.tau_bounds.contains(e.tau0))
                throw ConfigError("tau0", line_of("tau0"), "initial estimate outside [tau_min, tau_max]");
            if (e.t_end < e.gains.dt) throw ConfigError("t_end", line_of("t_end"), "must cover at least one step");
            break;
        }
    }
}

}  // namespace detail

/// Splits config text into assignments. Blank lines and `#` comments are
/// skipped; anything else must have the form `key = value`.
inline std::vector<Assignment> split_assignments(std::string_view text) {
    std::vector<Assignment> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("", line_no, "expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", line_no, "missing key");
        if (value.empty()) throw ConfigError(std::string(key), line_no, "missing value");
        out.push_back({std::string(key), std::string(value), line_no});
    }
    return out;
}

/// Parses `key=value` from the command line.
inline Assignment parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", 0, "override '" + std::string(text) + "' is not key=value");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(std::string(key), 0, "override needs key and value");
    return {std::string(key), std::string(value), 0};
}

/// Builds a validated config from assignments applied in order. The last
/// `experiment` entry selects the defaults; it is required.
inline ExperimentConfig build_config(const std::vector<Assignment>& entries) {
    const Assignment* kind_entry = nullptr;
    for (const auto& a : entries)
        if (a.key == "experiment") kind_entry = &a;
    if (!kind_entry) throw ConfigError("experiment", 0, "required key missing");
    const ExperimentKind kind = detail::parse_kind(*kind_entry);

    ExperimentConfig c = detail::defaults_for(kind);
    const auto& table = detail::keys_for(kind);
    bool t_end_given = false;
    for (const auto& a : entries) {
        if (a.key == "experiment") continue;
        const auto it = table.find(a.key);
        if (it == table.end())
            throw ConfigError(a.key, a.line, "unknown key for experiment " + std::string(to_string(kind)));
        try {
            it->second.apply(c, detail::ValueReader{a});
        } catch (const std::invalid_argument& e) {
            throw ConfigError(a.key, a.line, e.what());
        }
        t_end_given = t_end_given || a.key == "t_end";
    }
    if (kind == ExperimentKind::mackeyglass && c.mackeyglass.gains.schedule.varying && !t_end_given)
        c.mackeyglass.t_end = 2.0 * c.mackeyglass.gains.schedule.switch_time;
    detail::validate(c, entries);
    return c;
}

inline ExperimentConfig parse_config(std::string_view text, std::span<const Assignment> overrides = {}) {
    auto entries = split_assignments(text);
    entries.insert(entries.end(), overrides.begin(), overrides.end());
    return build_config(entries);
}

/// True when `key` names a numeric field of the given experiment.
inline bool is_numeric_key(ExperimentKind kind, std::string_view key) {
    const auto& table = detail::keys_for(kind);
    const auto it = table.find(key);
    return it != table.end() && it->second.numeric;
}

}  // namespace syncid
