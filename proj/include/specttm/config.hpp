// Copyright 2026 The SpecTTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECTTM_CONFIG_HPP
#define SPECTTM_CONFIG_HPP

#include "specttm/matrix_pencil.hpp"
#include "specttm/protocol.hpp"
#include "specttm/pta.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace specttm {

enum class PipelineKind { fig2_spectra, fig3_rhp, fig4_correlation, fig5_pta, custom };

inline const char* pipeline_name(PipelineKind p) {
    switch (p) {
        case PipelineKind::fig2_spectra: return "fig2_spectra";
        case PipelineKind::fig3_rhp: return "fig3_rhp";
        case PipelineKind::fig4_correlation: return "fig4_correlation";
        case PipelineKind::fig5_pta: return "fig5_pta";
        case PipelineKind::custom: return "custom";
    }
    return "?";
}

struct AnalysisConfig {
    int horizon = 40;          // prediction steps
    int grid_density = 12;     // basis search points per angle
    bool refine = true;
    SearchObjective objective = SearchObjective::rhp;
    double omega_max = 10.0;   // spectrum samples on [0, omega_max]
    int omega_points = 201;
};

struct RunConfig {
    PipelineKind pipeline = PipelineKind::custom;
    std::string preset;  // empty when none was applied
    NoiseModelSpec model;
    int trajectories = 10000;
    int substeps = 10;
    ExperimentConfig protocol;
    double spam_strength = 0.0;
    PencilConfig pencil;
    AnalysisConfig analysis;
    std::string output_dir = "specttm_out";
    std::uint64_t master_seed = 0;

    /// Canonical key=value lines; every physical parameter appears here.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Errors carry the line (0 when not from a file) and the offending key.
struct ConfigError {
    int line = 0;
    std::string key;
    std::string message;

    std::string str() const {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ": ";
        if (!key.empty()) os << key << ": ";
        os << message;
        return os.str();
    }
};

/// Thrown by parse/validate with the full aggregated list.
class ConfigValidationError : public std::invalid_argument {
public:
    explicit ConfigValidationError(std::vector<ConfigError> errors)
        : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}
    const std::vector<ConfigError>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<ConfigError>& errors) {
        std::string out;
        for (const auto& e : errors) {
            if (!out.empty()) out += "\n";
            out += e.str();
        }
        return out;
    }
    std::vector<ConfigError> errors_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end && std::isfinite(out);
}

template <class Int>
bool parse_int(const std::string& s, Int& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

inline bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "yes") return out = true, true;
    if (s == "false" || s == "0" || s == "no") return out = false, true;
    return false;
}

inline const char* axis_pair_name(int a, int b) {
    static const char* names[3][3] = {{"xx", "xy", "xz"}, {"xy", "yy", "yz"}, {"xz", "yz", "zz"}};
    return names[a][b];
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    using detail::format_double;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("pipeline", pipeline_name(pipeline));
    kv.emplace_back("preset", preset.empty() ? "none" : preset);
    kv.emplace_back("master_seed", std::to_string(master_seed));
    kv.emplace_back("model.kind", model_kind_name(model.kind));
    kv.emplace_back("model.omega_s", format_double(model.omega_s));
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const auto& c = model.coupling(a, b);
            const std::string p = std::string("model.") + detail::axis_pair_name(a, b);
            kv.emplace_back(p + ".amplitude", format_double(c.amplitude));
            kv.emplace_back(p + ".decay", format_double(c.decay_rate));
            kv.emplace_back(p + ".cutoff", format_double(c.cutoff));
        }
    kv.emplace_back("model.damping_rate", format_double(model.damping_rate));
    kv.emplace_back("model.trajectories", std::to_string(trajectories));
    kv.emplace_back("model.substeps", std::to_string(substeps));
    kv.emplace_back("protocol.M", std::to_string(protocol.M));
    kv.emplace_back("protocol.K", std::to_string(protocol.K));
    kv.emplace_back("protocol.dt", format_double(protocol.dt));
    kv.emplace_back("protocol.shots", protocol.shots ? std::to_string(*protocol.shots) : "exact");
    kv.emplace_back("protocol.twirl", twirl_mode_name(protocol.twirl));
    kv.emplace_back("protocol.twirl_samples", std::to_string(protocol.twirl_samples));
    const auto& th = protocol.twirl_basis.angles;
    kv.emplace_back("protocol.twirl_basis",
                    format_double(th[0]) + "," + format_double(th[1]) + "," + format_double(th[2]));
    kv.emplace_back("protocol.interleave", interleave_name(protocol.interleave));
    kv.emplace_back("protocol.spam_strength", format_double(spam_strength));
    kv.emplace_back("pencil.L", std::to_string(pencil.L));
    kv.emplace_back("pencil.rank_rule", pencil.rank_rule == RankRule::fixed ? "fixed" : "threshold");
    kv.emplace_back("pencil.rel", format_double(pencil.rel));
    kv.emplace_back("analysis.horizon", std::to_string(analysis.horizon));
    kv.emplace_back("analysis.grid_density", std::to_string(analysis.grid_density));
    kv.emplace_back("analysis.refine", analysis.refine ? "true" : "false");
    kv.emplace_back("analysis.objective", objective_name(analysis.objective));
    kv.emplace_back("analysis.omega_max", format_double(analysis.omega_max));
    kv.emplace_back("analysis.omega_points", std::to_string(analysis.omega_points));
    return kv;
}

inline std::string canonical_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg.echo()) out += k + "=" + v + "\n";
    return out;
}

/// FNV-1a over the canonical text; the output directory is not part of the identity.
inline std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_text(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// Named parameter sets for the reference computations.
inline bool apply_preset(RunConfig& cfg, const std::string& name) {
    RunConfig p;
    p.preset = name;
    p.output_dir = cfg.output_dir;
    p.master_seed = cfg.master_seed;
    auto& zz = p.model.coupling(2, 2);
    if (name == "fig2") {
        p.pipeline = PipelineKind::fig2_spectra;
        zz = {4.0, 1.0, 2.0};
        p.protocol.M = 8;
        p.protocol.dt = 0.2;
        p.spam_strength = 0.05;
        p.analysis.horizon = 40;
    } else if (name == "fig3") {
        p.pipeline = PipelineKind::fig3_rhp;
        zz = {4.0, 1.0, 5.0};
        p.model.omega_s = 0.1;
        p.protocol.M = 20;
        p.protocol.dt = 0.2;
        p.protocol.interleave = Interleave::none;
        p.spam_strength = 0.05;
        p.analysis.horizon = 20;
    } else if (name == "fig4") {
        p.pipeline = PipelineKind::fig4_correlation;
        zz = {0.04, 1.0, 2.0};
        p.model.omega_s = 0.02;
        p.protocol.M = 100;
        p.protocol.dt = 0.1;
        p.protocol.interleave = Interleave::none;
        p.spam_strength = 0.0;
        p.analysis.horizon = 100;
        p.analysis.omega_max = 6.0;
        p.analysis.omega_points = 601;
    } else if (name == "fig5") {
        p.pipeline = PipelineKind::fig5_pta;
        p.model.kind = ModelKind::correlated_xy;
        p.model.coupling(0, 0) = {5.0, 1.0, 5.0};
        p.model.coupling(1, 1) = {5.0, 1.0, 5.0};
        p.model.coupling(0, 1) = {3.0, 1.0, 5.0};
        p.trajectories = 10000;
        p.substeps = 10;
        p.protocol.M = 8;
        p.protocol.dt = 0.2;
        p.protocol.twirl = TwirlMode::exact;
        p.spam_strength = 0.05;
        p.analysis.horizon = 8;
    } else {
        return false;
    }
    cfg = p;
    return true;
}

namespace detail {

struct KeyHandler {
    std::function<bool(RunConfig&, const std::string&)> set;
    const char* expect;
};

inline std::vector<std::pair<std::string, KeyHandler>> key_table() {
    std::vector<std::pair<std::string, KeyHandler>> t;
    auto real = [](std::function<double&(RunConfig&)> get) {
        return KeyHandler{[get](RunConfig& c, const std::string& v) { return parse_double(v, get(c)); },
                          "a real number"};
    };
    auto integer = [](std::function<int&(RunConfig&)> get) {
        return KeyHandler{[get](RunConfig& c, const std::string& v) { return parse_int(v, get(c)); }, "an integer"};
    };
    t.emplace_back("pipeline", KeyHandler{[](RunConfig& c, const std::string& v) {
                                              for (auto p : {PipelineKind::fig2_spectra, PipelineKind::fig3_rhp,
                                                             PipelineKind::fig4_correlation, PipelineKind::fig5_pta,
                                                             PipelineKind::custom})
                                                  if (v == pipeline_name(p)) return c.pipeline = p, true;
                                              return false;
                                          },
                                          "one of fig2_spectra, fig3_rhp, fig4_correlation, fig5_pta, custom"});
    t.emplace_back("output_dir", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                c.output_dir = v;
                                                return !v.empty();
                                            },
                                            "a path"});
    t.emplace_back("master_seed", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                 return parse_int(v, c.master_seed);
                                             },
                                             "a non-negative integer"});
    t.emplace_back("model.kind", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                for (auto k : {ModelKind::pure_dephasing, ModelKind::amplitude_damping,
                                                               ModelKind::correlated_xy})
                                                    if (v == model_kind_name(k)) return c.model.kind = k, true;
                                                return false;
                                            },
                                            "one of pure_dephasing, amplitude_damping, correlated_xy"});
    t.emplace_back("model.omega_s", real([](RunConfig& c) -> double& { return c.model.omega_s; }));
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const std::string p = std::string("model.") + axis_pair_name(a, b);
            t.emplace_back(p + ".amplitude",
                           real([a, b](RunConfig& c) -> double& { return c.model.coupling(a, b).amplitude; }));
            t.emplace_back(p + ".decay",
                           real([a, b](RunConfig& c) -> double& { return c.model.coupling(a, b).decay_rate; }));
            t.emplace_back(p + ".cutoff",
                           real([a, b](RunConfig& c) -> double& { return c.model.coupling(a, b).cutoff; }));
        }
    t.emplace_back("model.damping_rate", real([](RunConfig& c) -> double& { return c.model.damping_rate; }));
    t.emplace_back("model.trajectories", integer([](RunConfig& c) -> int& { return c.trajectories; }));
    t.emplace_back("model.substeps", integer([](RunConfig& c) -> int& { return c.substeps; }));
    t.emplace_back("protocol.M", integer([](RunConfig& c) -> int& { return c.protocol.M; }));
    t.emplace_back("protocol.K", integer([](RunConfig& c) -> int& { return c.protocol.K; }));
    t.emplace_back("protocol.dt", real([](RunConfig& c) -> double& { return c.protocol.dt; }));
    t.emplace_back("protocol.shots", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                    if (v == "exact") return c.protocol.shots.reset(), true;
                                                    long long s = 0;
                                                    if (!parse_int(v, s)) return false;
                                                    c.protocol.shots = s;
                                                    return true;
                                                },
                                                "\"exact\" or an integer"});
    t.emplace_back("protocol.twirl", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                    for (auto m : {TwirlMode::off, TwirlMode::exact, TwirlMode::sampled})
                                                        if (v == twirl_mode_name(m)) return c.protocol.twirl = m, true;
                                                    return false;
                                                },
                                                "one of off, exact, sampled"});
    t.emplace_back("protocol.twirl_samples", integer([](RunConfig& c) -> int& { return c.protocol.twirl_samples; }));
    t.emplace_back("protocol.twirl_basis", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                          std::array<double, 3> a{};
                                                          std::stringstream ss(v);
                                                          std::string part;
                                                          int i = 0;
                                                          while (std::getline(ss, part, ',')) {
                                                              if (i >= 3 || !parse_double(trim(part), a[i])) return false;
                                                              ++i;
                                                          }
                                                          if (i != 3) return false;
                                                          c.protocol.twirl_basis = TwirlBasis(a[0], a[1], a[2]);
                                                          return true;
                                                      },
                                                      "three comma-separated angles"});
    t.emplace_back("protocol.interleave", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                         if (v == "projective") return c.protocol.interleave = Interleave::projective, true;
                                                         if (v == "none") return c.protocol.interleave = Interleave::none, true;
                                                         return false;
                                                     },
                                                     "projective or none"});
    t.emplace_back("protocol.spam_strength", real([](RunConfig& c) -> double& { return c.spam_strength; }));
    t.emplace_back("pencil.L", integer([](RunConfig& c) -> int& { return c.pencil.L; }));
    t.emplace_back("pencil.rank_rule", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                      if (v == "fixed") return c.pencil.rank_rule = RankRule::fixed, true;
                                                      if (v == "threshold") return c.pencil.rank_rule = RankRule::threshold, true;
                                                      return false;
                                                  },
                                                  "fixed or threshold"});
    t.emplace_back("pencil.rel", real([](RunConfig& c) -> double& { return c.pencil.rel; }));
    t.emplace_back("analysis.horizon", integer([](RunConfig& c) -> int& { return c.analysis.horizon; }));
    t.emplace_back("analysis.grid_density", integer([](RunConfig& c) -> int& { return c.analysis.grid_density; }));
    t.emplace_back("analysis.refine", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                     return parse_bool(v, c.analysis.refine);
                                                 },
                                                 "true or false"});
    t.emplace_back("analysis.objective", KeyHandler{[](RunConfig& c, const std::string& v) {
                                                        if (v == "rhp") return c.analysis.objective = SearchObjective::rhp, true;
                                                        if (v == "diagonal_weight")
                                                            return c.analysis.objective = SearchObjective::diagonal_weight, true;
                                                        return false;
                                                    },
                                                    "rhp or diagonal_weight"});
    t.emplace_back("analysis.omega_max", real([](RunConfig& c) -> double& { return c.analysis.omega_max; }));
    t.emplace_back("analysis.omega_points", integer([](RunConfig& c) -> int& { return c.analysis.omega_points; }));
    return t;
}

}  // namespace detail

/// Structural and physical checks on an assembled config.
inline std::vector<ConfigError> validate(const RunConfig& cfg) {
    std::vector<ConfigError> errs;
    auto add = [&](const std::string& key, const std::string& msg) { errs.push_back({0, key, msg}); };
    for (const auto& m : cfg.protocol.validate(3)) {
        std::string key = "protocol";
        if (m.rfind("K ", 0) == 0) key = "protocol.K";
        else if (m.rfind("M ", 0) == 0) key = "protocol.M";
        else if (m.rfind("dt", 0) == 0) key = "protocol.dt";
        else if (m.rfind("shots", 0) == 0) key = "protocol.shots";
        else if (m.rfind("twirl_samples", 0) == 0) key = "protocol.twirl_samples";
        add(key, m);
    }
    if (const auto why = cfg.model.psd_violation(); !why.empty()) add("model", why);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const auto& c = cfg.model.coupling(a, b);
            const std::string p = std::string("model.") + detail::axis_pair_name(a, b);
            if (c.amplitude != 0.0 && !(c.decay_rate > 0.0)) add(p + ".decay", "decay rate must be > 0");
        }
    if (cfg.model.kind == ModelKind::pure_dephasing) {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                if (!(a == 2 && b == 2) && cfg.model.coupling(a, b).amplitude != 0.0)
                    add(std::string("model.") + detail::axis_pair_name(a, b) + ".amplitude",
                        "pure dephasing couples only zz");
        if (2.0 * std::abs(cfg.model.omega_s) * cfg.protocol.dt >= std::numbers::pi)
            add("model.omega_s", "phase step 2*omega_s*dt must stay below pi");
    }
    if (cfg.model.kind == ModelKind::amplitude_damping && !(cfg.model.damping_rate >= 0.0))
        add("model.damping_rate", "damping rate must be >= 0");
    if (cfg.model.kind == ModelKind::correlated_xy) {
        if (cfg.trajectories < 1) add("model.trajectories", "trajectory count must be >= 1");
        if (cfg.substeps < 1) add("model.substeps", "substeps must be >= 1");
    }
    if (!(cfg.spam_strength >= 0.0 && cfg.spam_strength <= 1.0))
        add("protocol.spam_strength", "SPAM strength p must lie in [0,1]");
    if (cfg.pencil.L != 0 && cfg.pencil.rank_rule == RankRule::fixed &&
        (cfg.pencil.L < 3 || cfg.pencil.L > cfg.protocol.K - 3))
        add("pencil.L", "pencil length must lie in [N, K-N] = [3, " + std::to_string(cfg.protocol.K - 3) + "]");
    if (cfg.pencil.L == 0 && cfg.pencil.rank_rule == RankRule::fixed && cfg.protocol.K >= 4 && cfg.protocol.K < 6)
        add("protocol.K", "fixed-rank pencil needs K >= 2N=6");
    if (!(cfg.pencil.rel > 0.0 && cfg.pencil.rel < 1.0)) add("pencil.rel", "relative threshold must lie in (0,1)");
    if (cfg.analysis.horizon < 1) add("analysis.horizon", "horizon must be >= 1");
    if (cfg.analysis.grid_density < 1) add("analysis.grid_density", "grid density must be >= 1");
    if (cfg.analysis.omega_points < 1) add("analysis.omega_points", "need at least one frequency sample");
    if (!(cfg.analysis.omega_max >= 0.0)) add("analysis.omega_max", "omega_max must be >= 0");
    if (cfg.pipeline == PipelineKind::fig5_pta && cfg.protocol.twirl == TwirlMode::off)
        add("protocol.twirl", "fig5_pta needs twirl = exact or sampled");
    return errs;
}

/// Parses flat key=value text. A `preset` key (or the preset argument) is applied
/// first and later keys override it. Throws ConfigValidationError with all problems.
inline RunConfig parse_config(const std::string& text, const std::string& preset_override = {}) {
    std::vector<ConfigError> errs;
    struct Entry {
        int line;
        std::string key, value;
    };
    std::vector<Entry> entries;
    std::string preset = preset_override;
    int preset_line = 0;
    {
        std::istringstream in(text);
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                errs.push_back({line, "", "expected key = value"});
                continue;
            }
            Entry e{line, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1))};
            if (e.key == "preset") {
                if (preset_override.empty()) {
                    preset = e.value;
                    preset_line = line;
                }
                continue;
            }
            entries.push_back(std::move(e));
        }
    }
    RunConfig cfg;
    if (!preset.empty() && !apply_preset(cfg, preset))
        errs.push_back({preset_line, "preset", "unknown preset '" + preset + "' (fig2, fig3, fig4, fig5)"});

    const auto table = detail::key_table();
    std::vector<std::string> seen;
    for (const auto& e : entries) {
        if (std::find(seen.begin(), seen.end(), e.key) != seen.end()) {
            errs.push_back({e.line, e.key, "duplicate key"});
            continue;
        }
        seen.push_back(e.key);
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == e.key; });
        if (it == table.end()) {
            errs.push_back({e.line, e.key, "unknown key"});
            continue;
        }
        if (!it->second.set(cfg, e.value))
            errs.push_back({e.line, e.key, "expected " + std::string(it->second.expect) + ", got '" + e.value + "'"});
    }
    if (errs.empty()) {
        for (auto v : validate(cfg)) {
            for (const auto& e : entries)
                if (e.key == v.key) v.line = e.line;
            errs.push_back(std::move(v));
        }
    }
    std::stable_sort(errs.begin(), errs.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
    if (!errs.empty()) throw ConfigValidationError(std::move(errs));
    return cfg;
}

inline RunConfig load_config(const std::string& path, const std::string& preset_override = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), preset_override);
}

}  // namespace specttm

#endif  // SPECTTM_CONFIG_HPP
