#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "tnsim/dynamics.hpp"
#include "tnsim/rng.hpp"
#include "tnsim/theta.hpp"

namespace tnsim {

using json = nlohmann::json;

/// Configuration is rejected with the full list of offending fields.
struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;

    explicit ConfigError(std::vector<std::string> list)
        : std::runtime_error(join(list)), issues(std::move(list)) {}

  private:
    static std::string join(const std::vector<std::string>& list) {
        std::string s = "invalid configuration:";
        for (const auto& e : list) s += "\n  - " + e;
        return s;
    }
};

struct InitialDataSpec {
    enum class Preset { single_mode, two_mode, random_spectrum, explicit_modes };

    Preset preset = Preset::two_mode;
    LatticeIndex mode{1, 0};                              // single_mode
    double decay = 2.0;                                   // random_spectrum exponent s
    std::uint64_t seed = 0;                               // random_spectrum seed
    std::vector<std::tuple<int, int, double>> modes;      // explicit list (k1, k2, a)

    // compare only the payload the active preset reads
    friend bool operator==(const InitialDataSpec& a, const InitialDataSpec& b) {
        if (a.preset != b.preset) return false;
        switch (a.preset) {
            case Preset::single_mode: return a.mode == b.mode;
            case Preset::two_mode: return true;
            case Preset::random_spectrum: return a.decay == b.decay && a.seed == b.seed;
            case Preset::explicit_modes: return a.modes == b.modes;
        }
        return false;
    }
};

struct PassiveScalarSpec {
    std::vector<std::tuple<int, int, double>> modes;  // initial rho
    std::vector<double> p_norms = {2.0};              // L^p exponents to record

    bool operator==(const PassiveScalarSpec&) const = default;
};

struct SimConfig {
    double nu = 0.01;
    int N = 8;
    int N_ref = 64;
    SchemeKind scheme = SchemeKind::ito_dissipative;
    ThetaFamily theta_family = ThetaFamily::indicator;
    double theta_alpha = 0.0;
    int theta_cutoff = 0;  // 0: follow the active Galerkin cutoff
    double T = 1.0;
    double dt = 0.0;  // 0: resolved by default rule
    int checkpoints = 32;
    double delta = 0.5;
    double p = 1.0;
    std::uint64_t seed = 0;
    int samples = 1;
    std::vector<int> N_list;  // ensemble sweep
    InitialDataSpec initial;
    std::optional<PassiveScalarSpec> passive_scalar;
    std::vector<LatticeIndex> track_modes;
    double noise_scale = 1.0;
    bool ns_rk2 = true;

    bool operator==(const SimConfig&) const = default;
};

/// Default time step: min(1e-3, 0.1 / (nu 4 pi^2 N^2)), resolving the fastest
/// retained mode; any configured dt wins.
inline double resolved_dt(const SimConfig& cfg, int cutoff) {
    if (cfg.dt > 0.0) return cfg.dt;
    const double fastest = 0.1 / (cfg.nu * 4.0 * pi * pi * static_cast<double>(cutoff) * cutoff);
    return std::min(1e-3, fastest);
}

inline ThetaSequence theta_for(const SimConfig& cfg, int cutoff) {
    const int n = cfg.theta_cutoff > 0 ? cfg.theta_cutoff : cutoff;
    return cfg.theta_family == ThetaFamily::indicator ? ThetaSequence::indicator(n)
                                                      : ThetaSequence::power(cfg.theta_alpha, n);
}

/// Deterministic amplitude in [-1, 1] for the random_spectrum preset.
inline double spectrum_amplitude(std::uint64_t seed, LatticeIndex k) {
    using detail::mix64;
    std::uint64_t h = mix64(seed ^ 0x243F6A8885A308D3ULL);
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(k.k1)) + 0x13198A2E03707344ULL));
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(k.k2)) + 0xA4093822299F31D0ULL));
    return 2.0 * detail::to_unit_open(h) - 1.0;
}

/// Build xi_0 at the requested cutoff; modes outside the ball are projected
/// away, matching the Galerkin initial condition Pi_N xi_0.
inline FourierField build_initial_field(const InitialDataSpec& spec, int cutoff) {
    FourierField f(cutoff);
    const long long c2 = static_cast<long long>(cutoff) * cutoff;
    auto set_if_resolved = [&](LatticeIndex k, double a) {
        if (!is_zero(k) && norm_sq(k) <= c2 && f.contains(k)) f.set(k, a);
    };
    switch (spec.preset) {
        case InitialDataSpec::Preset::single_mode:
            set_if_resolved(spec.mode, 1.0);
            break;
        case InitialDataSpec::Preset::two_mode:
            set_if_resolved({1, 0}, 1.0);
            set_if_resolved({1, 1}, 1.0);
            break;
        case InitialDataSpec::Preset::random_spectrum:
            for (const LatticeIndex k : modes_up_to(cutoff))
                f.set(k, std::pow(static_cast<double>(norm_sq(k)), -0.5 * spec.decay) *
                             spectrum_amplitude(spec.seed, k));
            break;
        case InitialDataSpec::Preset::explicit_modes:
            for (const auto& [k1, k2, a] : spec.modes) set_if_resolved({k1, k2}, a);
            break;
    }
    return f;
}

inline FourierField build_scalar_field(const PassiveScalarSpec& spec, int cutoff) {
    FourierField f(cutoff);
    const long long c2 = static_cast<long long>(cutoff) * cutoff;
    for (const auto& [k1, k2, a] : spec.modes) {
        const LatticeIndex k{k1, k2};
        if (!is_zero(k) && norm_sq(k) <= c2) f.set(k, a);
    }
    return f;
}

namespace detail {

inline std::string preset_name(InitialDataSpec::Preset p) {
    switch (p) {
        case InitialDataSpec::Preset::single_mode: return "single_mode";
        case InitialDataSpec::Preset::two_mode: return "two_mode";
        case InitialDataSpec::Preset::random_spectrum: return "random_spectrum";
        case InitialDataSpec::Preset::explicit_modes: return "explicit";
    }
    return "?";
}

}  // namespace detail

inline json to_json(const InitialDataSpec& spec) {
    json j;
    if (spec.preset == InitialDataSpec::Preset::explicit_modes) {
        json modes = json::array();
        for (const auto& [k1, k2, a] : spec.modes) modes.push_back({k1, k2, a});
        j["modes"] = modes;
        return j;
    }
    j["preset"] = detail::preset_name(spec.preset);
    if (spec.preset == InitialDataSpec::Preset::single_mode) j["k"] = {spec.mode.k1, spec.mode.k2};
    if (spec.preset == InitialDataSpec::Preset::random_spectrum) {
        j["decay"] = spec.decay;
        j["seed"] = spec.seed;
    }
    return j;
}

inline json to_json(const SimConfig& cfg) {
    json j;
    j["nu"] = cfg.nu;
    j["N"] = cfg.N;
    j["N_ref"] = cfg.N_ref;
    j["scheme"] = to_string(cfg.scheme);
    j["theta"] = {{"family", to_string(cfg.theta_family)}, {"alpha", cfg.theta_alpha}};
    if (cfg.theta_cutoff > 0) j["theta"]["N"] = cfg.theta_cutoff;
    j["T"] = cfg.T;
    if (cfg.dt > 0.0) j["dt"] = cfg.dt;
    j["checkpoints"] = cfg.checkpoints;
    j["delta"] = cfg.delta;
    j["p"] = cfg.p;
    j["seed"] = cfg.seed;
    j["samples"] = cfg.samples;
    if (!cfg.N_list.empty()) j["N_list"] = cfg.N_list;
    j["initial"] = to_json(cfg.initial);
    if (cfg.passive_scalar) {
        json modes = json::array();
        for (const auto& [k1, k2, a] : cfg.passive_scalar->modes) modes.push_back({k1, k2, a});
        j["passive_scalar"] = {{"modes", modes}, {"p_norms", cfg.passive_scalar->p_norms}};
    }
    if (!cfg.track_modes.empty()) {
        json tm = json::array();
        for (const LatticeIndex k : cfg.track_modes) tm.push_back({k.k1, k.k2});
        j["track_modes"] = tm;
    }
    j["noise_scale"] = cfg.noise_scale;
    j["ns_time_scheme"] = cfg.ns_rk2 ? "rk2" : "euler";
    return j;
}

namespace detail {

struct ConfigReader {
    const json& j;
    std::vector<std::string> issues;
    std::vector<std::string> known;

    explicit ConfigReader(const json& src) : j(src) {}

    template <class T>
    void read(const char* key, T& out) {
        known.push_back(key);
        if (!j.contains(key)) return;
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            issues.push_back(std::string(key) + ": wrong type");
        }
    }

    void check_unknown_keys() {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                issues.push_back("unknown key '" + it.key() + "'");
        }
    }
};

inline std::vector<std::tuple<int, int, double>> parse_mode_list(const json& arr,
                                                                 std::vector<std::string>& issues,
                                                                 const char* where) {
    std::vector<std::tuple<int, int, double>> out;
    if (!arr.is_array()) {
        issues.push_back(std::string(where) + ": expected an array of [k1, k2, a] triples");
        return out;
    }
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 3) {
            issues.push_back(std::string(where) + ": each entry must be [k1, k2, a]");
            continue;
        }
        out.emplace_back(e[0].get<int>(), e[1].get<int>(), e[2].get<double>());
    }
    return out;
}

}  // namespace detail

inline SimConfig config_from_json(const json& j) {
    std::vector<std::string> issues;
    SimConfig cfg;
    detail::ConfigReader r(j);

    r.read("nu", cfg.nu);
    r.read("N", cfg.N);
    r.read("N_ref", cfg.N_ref);

    std::string scheme = to_string(cfg.scheme);
    r.read("scheme", scheme);
    if (scheme == "ito_dissipative") cfg.scheme = SchemeKind::ito_dissipative;
    else if (scheme == "stratonovich_conservative") cfg.scheme = SchemeKind::stratonovich_conservative;
    else if (scheme == "deterministic_ns") cfg.scheme = SchemeKind::deterministic_ns;
    else issues.push_back("scheme: unknown value '" + scheme + "'");

    r.known.push_back("theta");
    if (j.contains("theta")) {
        const json& t = j.at("theta");
        std::string fam = t.value("family", "indicator");
        if (fam == "indicator") cfg.theta_family = ThetaFamily::indicator;
        else if (fam == "power") cfg.theta_family = ThetaFamily::power;
        else issues.push_back("theta.family: unknown value '" + fam + "'");
        cfg.theta_alpha = t.value("alpha", 0.0);
        cfg.theta_cutoff = t.value("N", 0);
    }

    r.read("T", cfg.T);
    r.read("dt", cfg.dt);
    r.read("checkpoints", cfg.checkpoints);
    r.read("delta", cfg.delta);
    r.read("p", cfg.p);
    r.read("seed", cfg.seed);
    r.read("samples", cfg.samples);
    r.read("N_list", cfg.N_list);

    r.known.push_back("initial");
    if (j.contains("initial")) {
        const json& init = j.at("initial");
        if (init.contains("modes")) {
            cfg.initial.preset = InitialDataSpec::Preset::explicit_modes;
            cfg.initial.modes = detail::parse_mode_list(init.at("modes"), issues, "initial.modes");
        } else {
            const std::string preset = init.value("preset", "two_mode");
            if (preset == "single_mode") {
                cfg.initial.preset = InitialDataSpec::Preset::single_mode;
                if (init.contains("k") && init.at("k").is_array() && init.at("k").size() == 2)
                    cfg.initial.mode = {init.at("k")[0].get<int>(), init.at("k")[1].get<int>()};
                else
                    issues.push_back("initial.k: single_mode needs k = [k1, k2]");
            } else if (preset == "two_mode") {
                cfg.initial.preset = InitialDataSpec::Preset::two_mode;
            } else if (preset == "random_spectrum") {
                cfg.initial.preset = InitialDataSpec::Preset::random_spectrum;
                cfg.initial.decay = init.value("decay", 2.0);
                cfg.initial.seed = init.value("seed", std::uint64_t{0});
            } else {
                issues.push_back("initial.preset: unknown value '" + preset + "'");
            }
        }
    }

    r.known.push_back("passive_scalar");
    if (j.contains("passive_scalar") && !j.at("passive_scalar").is_null()) {
        const json& ps = j.at("passive_scalar");
        PassiveScalarSpec spec;
        if (ps.contains("modes"))
            spec.modes = detail::parse_mode_list(ps.at("modes"), issues, "passive_scalar.modes");
        else
            issues.push_back("passive_scalar.modes: required");
        if (ps.contains("p_norms")) spec.p_norms = ps.at("p_norms").get<std::vector<double>>();
        cfg.passive_scalar = std::move(spec);
    }

    r.known.push_back("track_modes");
    if (j.contains("track_modes")) {
        for (const auto& e : j.at("track_modes")) {
            if (e.is_array() && e.size() == 2)
                cfg.track_modes.push_back({e[0].get<int>(), e[1].get<int>()});
            else
                issues.push_back("track_modes: entries must be [k1, k2]");
        }
    }

    r.read("noise_scale", cfg.noise_scale);

    std::string ns_scheme = cfg.ns_rk2 ? "rk2" : "euler";
    r.known.push_back("ns_time_scheme");
    if (j.contains("ns_time_scheme")) ns_scheme = j.at("ns_time_scheme").get<std::string>();
    if (ns_scheme == "rk2") cfg.ns_rk2 = true;
    else if (ns_scheme == "euler") cfg.ns_rk2 = false;
    else issues.push_back("ns_time_scheme: must be 'rk2' or 'euler'");

    r.check_unknown_keys();
    for (auto& e : r.issues) issues.push_back(std::move(e));

    // semantic validation
    if (!(cfg.nu > 0.0)) issues.push_back("nu: must be positive");
    if (cfg.N < 1) issues.push_back("N: must be >= 1");
    if (cfg.N_ref < cfg.N) issues.push_back("N_ref: must be >= N");
    if (!(cfg.T > 0.0)) issues.push_back("T: must be positive");
    if (cfg.dt < 0.0 || cfg.dt > cfg.T) issues.push_back("dt: must lie in (0, T] when given");
    if (cfg.checkpoints < 2) issues.push_back("checkpoints: must be >= 2");
    if (!(cfg.delta > 0.0)) issues.push_back("delta: must be positive");
    if (!(cfg.p >= 1.0)) issues.push_back("p: must be >= 1");
    if (cfg.samples < 1) issues.push_back("samples: must be >= 1");
    if (cfg.noise_scale < 0.0) issues.push_back("noise_scale: must be >= 0");
    if (cfg.theta_cutoff < 0) issues.push_back("theta.N: must be positive when given");
    for (std::size_t i = 1; i < cfg.N_list.size(); ++i)
        if (cfg.N_list[i] <= cfg.N_list[i - 1]) {
            issues.push_back("N_list: must be strictly increasing");
            break;
        }
    if (!cfg.N_list.empty() && cfg.N_list.front() < 1) issues.push_back("N_list: cutoffs must be >= 1");
    if (!cfg.N_list.empty() && cfg.N_list.back() > cfg.N_ref)
        issues.push_back("N_list: cutoffs must not exceed N_ref");
    for (const auto& [k1, k2, a] : cfg.initial.modes) {
        (void)a;
        if (k1 == 0 && k2 == 0) issues.push_back("initial.modes: k = (0,0) is not a field mode");
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

inline SimConfig config_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }
    return config_from_json(j);
}

/// The in-repo standard ensemble: the headline scaling-limit experiment.
inline SimConfig standard_ensemble_config() {
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 32;
    cfg.N_ref = 64;
    cfg.scheme = SchemeKind::ito_dissipative;
    cfg.theta_family = ThetaFamily::indicator;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.checkpoints = 32;
    cfg.delta = 0.5;
    cfg.p = 1.0;
    cfg.seed = 7240;
    cfg.samples = 64;
    cfg.N_list = {4, 8, 16, 32};
    cfg.initial.preset = InitialDataSpec::Preset::two_mode;
    return cfg;
}

}  // namespace tnsim
