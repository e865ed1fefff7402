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
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "aftergate/attack.hpp"
#include "aftergate/detector.hpp"
#include "aftergate/errors.hpp"

namespace aftergate {

enum class Classification { Noisy, Suitable, Vulnerable };

inline std::string_view to_string(Classification c) {
    switch (c) {
    case Classification::Noisy:
        return "Noisy";
    case Classification::Suitable:
        return "Suitable";
    case Classification::Vulnerable:
        return "Vulnerable";
    }
    return "?";
}

/// How a detector calibrated at one frequency is carried to another.
/// FixedWidth keeps the gate width and edge profiles and shortens or lengthens
/// only the gap between gates. ConstantDutyCycle scales every intra-gate time
/// with the period.
enum class RescalePolicy { FixedWidth, ConstantDutyCycle };

struct FeasibilityOptions {
    double threshold = kDefaultQberThreshold;
    double signal_flux = 0.1;
    double attack_flux = 20.0;
    /// Delay step of Eve's search, in picoseconds.
    double attack_delay_step_ps = 0.5;
    RescalePolicy rescale = RescalePolicy::FixedWidth;
};

struct FrequencyVerdict {
    double frequency_hz = 0.0;
    double q_noise = 0.0;
    double q_attack = 0.0;
    Classification classification = Classification::Suitable;
};

inline Classification classify(double q_noise, double q_attack, double threshold = kDefaultQberThreshold) {
    if (q_noise > threshold) {
        return Classification::Noisy;
    }
    if (q_attack <= threshold) {
        return Classification::Vulnerable;
    }
    return Classification::Suitable;
}

inline DetectorParams rescale_for_frequency(const DetectorParams &det, double frequency_hz,
                                            RescalePolicy policy = RescalePolicy::FixedWidth) {
    detail::require(std::isfinite(frequency_hz) && frequency_hz > 0.0, "rescale: frequency must be positive");
    DetectorParams out = det;
    if (policy == RescalePolicy::FixedWidth) {
        out.timing = GateTiming(frequency_hz, det.gate_width_ps());
        return out;
    }
    const double s = det.timing.gating_frequency_hz() / frequency_hz;
    out.timing = GateTiming(frequency_hz, det.gate_width_ps() * s);
    for (EdgeProfile *e : {&out.trigger, &out.gain}) {
        e->edge_start_ps *= s;
        e->edge_duration_ps *= s;
    }
    out.reference_delay_ps *= s;
    return out;
}

/// Error rate without Eve. A legitimate detection at the reference delay
/// leaves interface-trapped holes behind; their clicks in the next gate are
/// random bits, as are dark and afterpulse clicks.
inline double noise_qber(const DetectorParams &det, const Environment &env, double signal_flux = 0.1) {
    det.validate();
    detail::require(signal_flux > 0.0, "noise_qber: signal flux must be positive");
    const DetectorParams interface_only = without_species(det, TrapLabel::Multiplication);
    const PulseSpec pulse{signal_flux, det.reference_delay_ps};
    const double p_sig = poisson_upper_tail(det.threshold_count(pulse.delay_ps), avalanche_mean(det, pulse));
    const double p_dd = -std::expm1(-delayed_trigger_mean(interface_only, trap_loading(interface_only, pulse), env, 1));
    const double p_other = combine_independent(det.dark_count_prob, det.afterpulse_prob * p_sig);
    const double total = p_sig + p_dd + p_other;
    if (!(total > 0.0)) {
        throw NumericalError("noise_qber: total detection probability is zero");
    }
    return (0.5 * p_dd + 0.5 * p_other) / total;
}

/// Eve's best error rate at this frequency: the smallest delayed-detection
/// error rate over pulse delays inside the gate.
inline double attack_qber_at_frequency(const DetectorParams &det, const Environment &env, double attack_flux = 20.0,
                                       double delay_step_ps = 0.5) {
    detail::require(attack_flux > 0.0, "attack_qber_at_frequency: attack flux must be positive");
    const auto scenario = AttackScenario::with_full_flux(attack_flux, 0.0, env);
    const auto sweep = sweep_delay(det, scenario, delay_grid(0.0, det.gate_width_ps(), delay_step_ps));
    const SweepMinimum best = sweep_minimum(sweep, true);
    if (!best.found) {
        throw ConfigError("attack_qber_at_frequency: no delay produces any click");
    }
    return best.q;
}

inline FrequencyVerdict evaluate_frequency(const DetectorParams &det_template, const Environment &env,
                                           double frequency_hz, const FeasibilityOptions &opts = {}) {
    const DetectorParams det = rescale_for_frequency(det_template, frequency_hz, opts.rescale);
    FrequencyVerdict v;
    v.frequency_hz = frequency_hz;
    v.q_noise = noise_qber(det, env, opts.signal_flux);
    v.q_attack = attack_qber_at_frequency(det, env, opts.attack_flux, opts.attack_delay_step_ps);
    v.classification = classify(v.q_noise, v.q_attack, opts.threshold);
    return v;
}

inline std::vector<FrequencyVerdict> feasibility_band(const std::vector<double> &frequencies,
                                                      const Environment &env, const DetectorParams &det_template,
                                                      const FeasibilityOptions &opts = {}) {
    detail::require(std::is_sorted(frequencies.begin(), frequencies.end()),
                    "feasibility_band: frequencies must be ascending");
    std::vector<FrequencyVerdict> out;
    out.reserve(frequencies.size());
    for (double f : frequencies) {
        out.push_back(evaluate_frequency(det_template, env, f, opts));
    }
    return out;
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    detail::require(lo > 0.0 && hi > lo && count >= 2, "log_grid: need 0 < lo < hi and count >= 2");
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

/// Lowest and highest Suitable frequency, if any.
inline std::optional<std::pair<double, double>> suitable_interval(const std::vector<FrequencyVerdict> &band) {
    std::optional<std::pair<double, double>> out;
    for (const auto &v : band) {
        if (v.classification != Classification::Suitable) {
            continue;
        }
        if (!out) {
            out = std::make_pair(v.frequency_hz, v.frequency_hz);
        }
        out->second = v.frequency_hz;
    }
    return out;
}

/// True when the verdicts read Vulnerable*, Suitable*, Noisy* in ascending
/// frequency.
inline bool band_is_ordered(const std::vector<FrequencyVerdict> &band) {
    auto rank = [](Classification c) {
        return c == Classification::Vulnerable ? 0 : c == Classification::Suitable ? 1 : 2;
    };
    for (std::size_t i = 1; i < band.size(); ++i) {
        if (rank(band[i].classification) < rank(band[i - 1].classification)) {
            return false;
        }
    }
    return true;
}

/// Geometric mean of the Suitable interval's ends.
inline std::optional<double> suitable_midpoint(const std::vector<FrequencyVerdict> &band) {
    const auto interval = suitable_interval(band);
    if (!interval) {
        return std::nullopt;
    }
    return std::sqrt(interval->first * interval->second);
}

}  // namespace aftergate
