// Copyright 2026 The aftergate Authors
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

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aftergate/attack.hpp"
#include "aftergate/detector.hpp"
#include "aftergate/errors.hpp"
#include "aftergate/feasibility.hpp"

// Plain-text run configuration:
//
//   # comment
//   [section]
//   key = value
//
// Every section and key must be known; values are parsed strictly.

namespace aftergate {

using IniSection = std::map<std::string, std::string>;
using IniDocument = std::map<std::string, IniSection>;

namespace detail {

inline std::string trim(const std::string &s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace detail

inline IniDocument parse_ini(std::istream &in, const std::string &origin = "config") {
    IniDocument doc;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) {
            line.erase(comment);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(where + "malformed section header");
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            if (doc.count(section)) {
                throw ConfigError(where + "duplicate section [" + section + "]");
            }
            doc[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + "expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError(where + "key outside of any section");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(where + "empty key");
        }
        if (!doc[section].emplace(key, value).second) {
            throw ConfigError(where + "duplicate key '" + key + "'");
        }
    }
    return doc;
}

inline IniDocument load_ini(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_ini(in, path);
}

/// Applies `section.key=value`; the section is everything before the last
/// dot of the left-hand side.
inline void apply_override(IniDocument &doc, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    const std::string lhs = detail::trim(assignment.substr(0, eq));
    const auto dot = lhs.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size()) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    doc[lhs.substr(0, dot)][lhs.substr(dot + 1)] = detail::trim(assignment.substr(eq + 1));
}

struct SweepConfig {
    double delay_start_ps = 0.0;
    /// Empty means one full gate period.
    std::optional<double> delay_stop_ps;
    double delay_step_ps = 0.5;
};

struct HistogramConfig {
    double flux = 0.1;
    /// Empty means the detector's reference delay.
    std::optional<double> delay_ps;
    std::size_t window = 12;
    std::size_t pulse_gate = 2;
    double dead_time_ps = 0.0;
};

struct ContourConfig {
    double flux_min = 1.0;
    double flux_max = 200.0;
    std::size_t flux_count = 60;
    double delay_step_ps = 2.0;
};

struct Gate2Config {
    double flux = 80.0;
    double delay_start_ps = 0.0;
    std::optional<double> delay_stop_ps;
    double delay_step_ps = 1.0;
};

struct PartialAttackConfig {
    /// Empty means the attack sweep's minimum delayed-detection error rate.
    std::optional<double> q_attack;
    /// Empty means the no-Eve error rate at the configured frequency.
    std::optional<double> q_baseline;
    double fraction_step = 0.01;
};

struct FeasibilityConfig {
    double frequency_min_hz = 1e7;
    double frequency_max_hz = 5e9;
    std::size_t frequency_count = 50;
    std::vector<double> temperatures_c{20.0, -50.0};
    FeasibilityOptions options{};
};

struct RunConfig {
    DetectorParams detector;
    Environment environment;
    AttackScenario scenario;
    SweepConfig sweep;
    HistogramConfig histogram;
    ContourConfig contour;
    Gate2Config gate2;
    PartialAttackConfig partial_attack;
    FeasibilityConfig feasibility;
    double qber_threshold = kDefaultQberThreshold;
    std::uint64_t seed = 20260101;
    std::uint64_t trials = 100000;
    unsigned workers = 1;
    std::optional<std::string> out_dir;
};

namespace detail {

class SectionReader {
  public:
    SectionReader(const IniDocument &doc, std::string name, std::set<std::string> allowed)
        : name_(std::move(name)), allowed_(std::move(allowed)) {
        const auto it = doc.find(name_);
        if (it != doc.end()) {
            section_ = &it->second;
            for (const auto &[key, value] : *section_) {
                if (!allowed_.count(key)) {
                    throw ConfigError("unknown key '" + key + "' in section [" + name_ + "]");
                }
            }
        }
    }

    bool present() const { return section_ != nullptr; }

    std::optional<std::string> raw(const std::string &key) const {
        if (!section_) {
            return std::nullopt;
        }
        const auto it = section_->find(key);
        if (it == section_->end()) {
            return std::nullopt;
        }
        return it->second;
    }

    void number(const std::string &key, double &target) const {
        if (const auto v = raw(key)) {
            target = parse_double(key, *v);
        }
    }

    void number(const std::string &key, std::optional<double> &target) const {
        if (const auto v = raw(key)) {
            target = parse_double(key, *v);
        }
    }

    template <typename Int>
    void integer(const std::string &key, Int &target) const {
        if (const auto v = raw(key)) {
            target = static_cast<Int>(parse_unsigned(key, *v));
        }
    }

    void list(const std::string &key, std::vector<double> &target) const {
        if (const auto v = raw(key)) {
            target.clear();
            std::stringstream ss(*v);
            std::string item;
            while (std::getline(ss, item, ',')) {
                target.push_back(parse_double(key, detail::trim(item)));
            }
            if (target.empty()) {
                throw ConfigError(where(key) + "empty list");
            }
        }
    }

    double parse_double(const std::string &key, const std::string &text) const {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(text, &used);
        } catch (const std::logic_error &) {
            throw ConfigError(where(key) + "'" + text + "' is not a number");
        }
        if (used != text.size() || !std::isfinite(value)) {
            throw ConfigError(where(key) + "'" + text + "' is not a finite number");
        }
        return value;
    }

    std::uint64_t parse_unsigned(const std::string &key, const std::string &text) const {
        if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
            throw ConfigError(where(key) + "'" + text + "' is not a non-negative integer");
        }
        try {
            return std::stoull(text);
        } catch (const std::logic_error &) {
            throw ConfigError(where(key) + "'" + text + "' is out of range");
        }
    }

  private:
    std::string where(const std::string &key) const { return "[" + name_ + "] " + key + ": "; }

    std::string name_;
    std::set<std::string> allowed_;
    const IniSection *section_ = nullptr;
};

template <typename Fn>
void rethrow_as_config_error(Fn &&fn) {
    try {
        fn();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

}  // namespace detail

inline RunConfig parse_run_config(const IniDocument &doc) {
    static const std::set<std::string> known_sections{
        "detector", "traps.interface", "traps.multiplication", "environment", "scenario", "sweep",
        "histogram", "contour", "gate2", "partial_attack", "feasibility", "analysis", "run"};
    for (const auto &[name, section] : doc) {
        if (!known_sections.count(name)) {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    for (const char *required : {"detector", "traps.interface", "traps.multiplication", "environment"}) {
        if (!doc.count(required)) {
            throw ConfigError(std::string("missing required section [") + required + "]");
        }
    }

    RunConfig cfg;
    using detail::SectionReader;

    const SectionReader det(doc, "detector",
                            {"gating_frequency_hz", "gate_width_ps", "detection_efficiency", "trigger_edge_start_ps",
                             "trigger_edge_duration_ps", "gain_edge_start_ps", "gain_edge_duration_ps", "gain_floor",
                             "discrimination_threshold", "dark_count_prob", "afterpulse_prob",
                             "reference_delay_ps"});
    double frequency = 1e9;
    double width = 500.0;
    det.number("gating_frequency_hz", frequency);
    det.number("gate_width_ps", width);
    DetectorParams &d = cfg.detector;
    det.number("detection_efficiency", d.detection_efficiency);
    det.number("trigger_edge_start_ps", d.trigger.edge_start_ps);
    det.number("trigger_edge_duration_ps", d.trigger.edge_duration_ps);
    det.number("gain_edge_start_ps", d.gain.edge_start_ps);
    det.number("gain_edge_duration_ps", d.gain.edge_duration_ps);
    det.number("gain_floor", d.gain.floor);
    det.number("discrimination_threshold", d.discrimination_threshold);
    det.number("dark_count_prob", d.dark_count_prob);
    det.number("afterpulse_prob", d.afterpulse_prob);
    det.number("reference_delay_ps", d.reference_delay_ps);

    const SectionReader itf(doc, "traps.interface",
                            {"activation_energy_ev", "lifetime_prefactor_ps", "capture_fraction_photo",
                             "capture_fraction_gated"});
    itf.number("activation_energy_ev", d.interface_trap.activation_energy_ev);
    itf.number("lifetime_prefactor_ps", d.interface_trap.lifetime_prefactor_ps);
    itf.number("capture_fraction_photo", d.interface_trap.capture_fraction_photo);
    itf.number("capture_fraction_gated", d.interface_trap.capture_fraction_gated);

    const SectionReader mul(doc, "traps.multiplication",
                            {"activation_energy_ev", "lifetime_prefactor_ps", "capture_per_avalanche_charge",
                             "retention_coefficient"});
    mul.number("activation_energy_ev", d.multiplication_trap.activation_energy_ev);
    mul.number("lifetime_prefactor_ps", d.multiplication_trap.lifetime_prefactor_ps);
    mul.number("capture_per_avalanche_charge", d.multiplication_trap.capture_per_avalanche_charge);
    mul.number("retention_coefficient", d.multiplication_trap.retention_coefficient);

    const SectionReader env(doc, "environment", {"temperature_k", "excess_bias_fraction"});
    env.number("temperature_k", cfg.environment.temperature_k);
    env.number("excess_bias_fraction", cfg.environment.excess_bias_fraction);

    const SectionReader sc(doc, "scenario", {"flux_full", "flux_half", "delay_ps", "attacked_fraction"});
    sc.number("flux_full", cfg.scenario.flux_full);
    cfg.scenario.flux_half = 0.5 * cfg.scenario.flux_full;
    sc.number("flux_half", cfg.scenario.flux_half);
    sc.number("delay_ps", cfg.scenario.delay_ps);
    sc.number("attacked_fraction", cfg.scenario.attacked_fraction);
    cfg.scenario.env = cfg.environment;

    const SectionReader sw(doc, "sweep", {"delay_start_ps", "delay_stop_ps", "delay_step_ps"});
    sw.number("delay_start_ps", cfg.sweep.delay_start_ps);
    sw.number("delay_stop_ps", cfg.sweep.delay_stop_ps);
    sw.number("delay_step_ps", cfg.sweep.delay_step_ps);

    const SectionReader hi(doc, "histogram", {"flux", "delay_ps", "window", "pulse_gate", "dead_time_ps"});
    hi.number("flux", cfg.histogram.flux);
    hi.number("delay_ps", cfg.histogram.delay_ps);
    hi.integer("window", cfg.histogram.window);
    hi.integer("pulse_gate", cfg.histogram.pulse_gate);
    hi.number("dead_time_ps", cfg.histogram.dead_time_ps);

    const SectionReader co(doc, "contour", {"flux_min", "flux_max", "flux_count", "delay_step_ps"});
    co.number("flux_min", cfg.contour.flux_min);
    co.number("flux_max", cfg.contour.flux_max);
    co.integer("flux_count", cfg.contour.flux_count);
    co.number("delay_step_ps", cfg.contour.delay_step_ps);

    const SectionReader g2(doc, "gate2", {"flux", "delay_start_ps", "delay_stop_ps", "delay_step_ps"});
    g2.number("flux", cfg.gate2.flux);
    g2.number("delay_start_ps", cfg.gate2.delay_start_ps);
    g2.number("delay_stop_ps", cfg.gate2.delay_stop_ps);
    g2.number("delay_step_ps", cfg.gate2.delay_step_ps);

    const SectionReader pa(doc, "partial_attack", {"q_attack", "q_baseline", "fraction_step"});
    pa.number("q_attack", cfg.partial_attack.q_attack);
    pa.number("q_baseline", cfg.partial_attack.q_baseline);
    pa.number("fraction_step", cfg.partial_attack.fraction_step);

    const SectionReader fe(doc, "feasibility",
                           {"frequency_min_hz", "frequency_max_hz", "frequency_count", "temperatures_c",
                            "signal_flux", "attack_flux", "attack_delay_step_ps", "rescale"});
    fe.number("frequency_min_hz", cfg.feasibility.frequency_min_hz);
    fe.number("frequency_max_hz", cfg.feasibility.frequency_max_hz);
    fe.integer("frequency_count", cfg.feasibility.frequency_count);
    fe.list("temperatures_c", cfg.feasibility.temperatures_c);
    fe.number("signal_flux", cfg.feasibility.options.signal_flux);
    fe.number("attack_flux", cfg.feasibility.options.attack_flux);
    fe.number("attack_delay_step_ps", cfg.feasibility.options.attack_delay_step_ps);
    if (const auto r = fe.raw("rescale")) {
        if (*r == "fixed_width") {
            cfg.feasibility.options.rescale = RescalePolicy::FixedWidth;
        } else if (*r == "constant_duty_cycle") {
            cfg.feasibility.options.rescale = RescalePolicy::ConstantDutyCycle;
        } else {
            throw ConfigError("[feasibility] rescale: expected fixed_width or constant_duty_cycle");
        }
    }

    const SectionReader an(doc, "analysis", {"qber_threshold"});
    an.number("qber_threshold", cfg.qber_threshold);
    cfg.feasibility.options.threshold = cfg.qber_threshold;

    const SectionReader run(doc, "run", {"seed", "trials", "workers", "out"});
    run.integer("seed", cfg.seed);
    run.integer("trials", cfg.trials);
    run.integer("workers", cfg.workers);
    cfg.out_dir = run.raw("out");

    detail::rethrow_as_config_error([&] {
        d.timing = GateTiming(frequency, width);
        d.validate();
        cfg.environment.validate();
        cfg.scenario.validate();
        detail::require(cfg.qber_threshold > 0.0 && cfg.qber_threshold < 0.5,
                        "[analysis] qber_threshold must lie in (0, 0.5)");
        detail::require(cfg.sweep.delay_step_ps > 0.0, "[sweep] delay_step_ps must be positive");
        detail::require(cfg.gate2.delay_step_ps > 0.0, "[gate2] delay_step_ps must be positive");
        detail::require(cfg.contour.delay_step_ps > 0.0, "[contour] delay_step_ps must be positive");
        detail::require(cfg.contour.flux_count >= 2 && cfg.contour.flux_min > 0.0 &&
                            cfg.contour.flux_max > cfg.contour.flux_min,
                        "[contour] need 0 < flux_min < flux_max and flux_count >= 2");
        detail::require(cfg.histogram.window >= 1 && cfg.histogram.pulse_gate < cfg.histogram.window,
                        "[histogram] pulse_gate must lie inside the window");
        detail::require(cfg.histogram.flux >= 0.0, "[histogram] flux must be >= 0");
        detail::require(cfg.histogram.dead_time_ps >= 0.0, "[histogram] dead_time_ps must be >= 0");
        detail::require(cfg.partial_attack.fraction_step > 0.0 && cfg.partial_attack.fraction_step <= 1.0,
                        "[partial_attack] fraction_step must lie in (0, 1]");
        detail::require(cfg.feasibility.frequency_count >= 2 && cfg.feasibility.frequency_min_hz > 0.0 &&
                            cfg.feasibility.frequency_max_hz > cfg.feasibility.frequency_min_hz,
                        "[feasibility] need 0 < frequency_min_hz < frequency_max_hz and frequency_count >= 2");
        detail::require(cfg.trials >= 1, "[run] trials must be >= 1");
    });
    return cfg;
}

}  // namespace aftergate
