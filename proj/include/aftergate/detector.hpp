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
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "aftergate/errors.hpp"
#include "aftergate/poisson.hpp"

// Physical model of a gated InGaAs/InP avalanche photodiode. All times are
// picoseconds measured from the start of a gate; probabilities are plain
// doubles.

namespace aftergate {

inline constexpr double kBoltzmannEvPerK = 8.617e-5;
inline constexpr double kZeroCelsiusK = 273.15;

struct Environment {
    double temperature_k = 293.15;
    /// Excess bias as a fraction of the breakdown voltage.
    double excess_bias_fraction = 0.1;
    double boltzmann_ev_per_k = kBoltzmannEvPerK;

    static Environment at_celsius(double celsius, double excess_bias_fraction = 0.1) {
        return Environment{celsius + kZeroCelsiusK, excess_bias_fraction, kBoltzmannEvPerK};
    }

    void validate() const {
        detail::require(std::isfinite(temperature_k) && temperature_k > 0.0,
                        "environment: temperature must be positive");
        detail::require(excess_bias_fraction > 0.0 && excess_bias_fraction <= 1.0,
                        "environment: excess_bias_fraction must lie in (0, 1]");
        detail::require(std::isfinite(boltzmann_ev_per_k) && boltzmann_ev_per_k > 0.0,
                        "environment: boltzmann constant must be positive");
    }
};

enum class TrapLabel { Interface, Multiplication };

inline std::string_view to_string(TrapLabel label) {
    return label == TrapLabel::Interface ? "interface" : "multiplication";
}

/// One trapping population with an Arrhenius lifetime
/// tau(T) = lifetime_prefactor_ps * exp(activation_energy_ev / (k_B T)).
///
/// Interface traps are loaded by photogenerated holes: a hole arriving while
/// the gate is armed is captured with probability `capture_fraction_gated`, a
/// hole that is not injected (trigger probability 1 - p_a) with probability
/// `capture_fraction_photo`. Multiplication traps are loaded in proportion to
/// the avalanche charge, scaled by the end-of-gate retention factor
/// 1 + retention_coefficient * (1 - g).
struct TrapSpecies {
    TrapLabel label = TrapLabel::Interface;
    double activation_energy_ev = 0.0;
    double lifetime_prefactor_ps = 1.0;
    double capture_fraction_photo = 0.0;
    double capture_fraction_gated = 0.0;
    double capture_per_avalanche_charge = 0.0;
    double retention_coefficient = 0.0;

    void validate() const {
        const std::string name{to_string(label)};
        detail::require(std::isfinite(activation_energy_ev) && activation_energy_ev >= 0.0,
                        "trap " + name + ": activation energy must be >= 0");
        detail::require(std::isfinite(lifetime_prefactor_ps) && lifetime_prefactor_ps > 0.0,
                        "trap " + name + ": lifetime prefactor must be > 0");
        detail::require(capture_fraction_photo >= 0.0 && capture_fraction_photo <= 1.0,
                        "trap " + name + ": capture_fraction_photo must lie in [0, 1]");
        detail::require(capture_fraction_gated >= 0.0 && capture_fraction_gated <= 1.0,
                        "trap " + name + ": capture_fraction_gated must lie in [0, 1]");
        detail::require(std::isfinite(capture_per_avalanche_charge) && capture_per_avalanche_charge >= 0.0,
                        "trap " + name + ": capture_per_avalanche_charge must be >= 0");
        detail::require(std::isfinite(retention_coefficient) && retention_coefficient >= 0.0,
                        "trap " + name + ": retention_coefficient must be >= 0");
        if (label == TrapLabel::Interface) {
            detail::require(capture_per_avalanche_charge == 0.0,
                            "interface trap does not capture avalanche charge");
        } else {
            detail::require(capture_fraction_photo == 0.0 && capture_fraction_gated == 0.0,
                            "multiplication trap does not capture photogenerated holes");
        }
    }
};

/// Gate clock. The period is derived from the frequency; gates wider than
/// the period are rejected.
class GateTiming {
  public:
    GateTiming() = default;
    GateTiming(double gating_frequency_hz, double gate_width_ps)
        : frequency_hz_(gating_frequency_hz), width_ps_(gate_width_ps) {
        detail::require(std::isfinite(frequency_hz_) && frequency_hz_ > 0.0,
                        "gate timing: frequency must be positive");
        detail::require(std::isfinite(width_ps_) && width_ps_ > 0.0 && width_ps_ < period_ps(),
                        "gate timing: require 0 < gate_width < gate_period");
    }

    double gating_frequency_hz() const { return frequency_hz_; }
    double gate_width_ps() const { return width_ps_; }
    double gate_period_ps() const { return period_ps(); }

  private:
    double period_ps() const { return 1e12 / frequency_hz_; }

    double frequency_hz_ = 1e9;
    double width_ps_ = 500.0;
};

/// Flat top at 1 followed by a raised-cosine trailing edge down to `floor`.
/// The edge may extend past the gate end, in which case the gate closure
/// truncates it.
struct EdgeProfile {
    double edge_start_ps = 0.0;
    double edge_duration_ps = 0.0;
    double floor = 0.0;

    double inside(double t_ps) const {
        if (t_ps <= edge_start_ps) {
            return 1.0;
        }
        if (edge_duration_ps <= 0.0 || t_ps >= edge_start_ps + edge_duration_ps) {
            return floor;
        }
        const double u = (t_ps - edge_start_ps) / edge_duration_ps;
        return floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * u));
    }
};

struct DetectorParams {
    GateTiming timing;
    double detection_efficiency = 0.28;
    /// Per-carrier avalanche trigger probability p_a(t); zero outside the gate.
    EdgeProfile trigger{};
    /// Normalized avalanche gain g(t); equal to the floor outside the gate.
    EdgeProfile gain{0.0, 0.0, 0.25};
    double discrimination_threshold = 1.0;
    double dark_count_prob = 0.0;
    double afterpulse_prob = 0.0;
    /// Arrival time that maximizes single-photon detection efficiency.
    double reference_delay_ps = 0.0;
    TrapSpecies interface_trap{TrapLabel::Interface};
    TrapSpecies multiplication_trap{TrapLabel::Multiplication};

    double gate_period_ps() const { return timing.gate_period_ps(); }
    double gate_width_ps() const { return timing.gate_width_ps(); }

    double trigger_probability(double t_ps) const {
        if (t_ps < 0.0 || t_ps >= gate_width_ps()) {
            return 0.0;
        }
        return std::clamp(trigger.inside(t_ps), 0.0, 1.0);
    }

    double avalanche_gain(double t_ps) const {
        if (t_ps < 0.0 || t_ps >= gate_width_ps()) {
            return gain.floor;
        }
        return gain.inside(t_ps);
    }

    /// Smallest avalanche count n with n * g(t) >= threshold.
    std::uint32_t threshold_count(double t_ps) const {
        const double g = avalanche_gain(t_ps);
        if (discrimination_threshold <= 0.0) {
            return 1;
        }
        double n = std::ceil(discrimination_threshold / g);
        // Exact ties count as clicks; undo a ceil pushed up by rounding.
        if (n > 1.0 && (n - 1.0) * g >= discrimination_threshold) {
            n -= 1.0;
        }
        return static_cast<std::uint32_t>(std::max(1.0, n));
    }

    double mid_gate_trigger() const { return trigger_probability(0.5 * gate_width_ps()); }

    const TrapSpecies &trap(TrapLabel label) const {
        return label == TrapLabel::Interface ? interface_trap : multiplication_trap;
    }

    void validate() const {
        detail::require(detection_efficiency >= 0.0 && detection_efficiency <= 1.0,
                        "detector: detection_efficiency must lie in [0, 1]");
        detail::require(trigger.floor >= 0.0 && trigger.floor <= 1.0 && trigger.edge_duration_ps >= 0.0,
                        "detector: invalid trigger profile");
        detail::require(gain.floor > 0.0 && gain.floor <= 1.0 && gain.edge_duration_ps >= 0.0,
                        "detector: gain floor must lie in (0, 1]");
        detail::require(std::isfinite(discrimination_threshold) && discrimination_threshold >= 0.0,
                        "detector: discrimination threshold must be >= 0");
        detail::require(dark_count_prob >= 0.0 && dark_count_prob < 1.0,
                        "detector: dark_count_prob must lie in [0, 1)");
        detail::require(afterpulse_prob >= 0.0 && afterpulse_prob < 1.0,
                        "detector: afterpulse_prob must lie in [0, 1)");
        detail::require(reference_delay_ps >= 0.0 && reference_delay_ps < gate_width_ps(),
                        "detector: reference delay must fall inside the gate");
        detail::require(interface_trap.label == TrapLabel::Interface &&
                            multiplication_trap.label == TrapLabel::Multiplication,
                        "detector: trap species labels are swapped");
        interface_trap.validate();
        multiplication_trap.validate();
    }
};

struct PulseSpec {
    double mean_flux = 0.0;
    double delay_ps = 0.0;
};

inline void validate_pulse(const DetectorParams &det, const PulseSpec &pulse) {
    detail::require(std::isfinite(pulse.mean_flux) && pulse.mean_flux >= 0.0, "pulse: mean flux must be >= 0");
    detail::require(pulse.delay_ps >= 0.0 && pulse.delay_ps < det.gate_period_ps(),
                    "pulse: delay must lie within one gate period");
}

/// Expected trapped populations left behind by one pulse, stamped with the
/// intra-gate time at which they were loaded.
struct TrapState {
    double interface_population = 0.0;
    double multiplication_population = 0.0;
    double load_time_ps = 0.0;

    double population(TrapLabel label) const {
        return label == TrapLabel::Interface ? interface_population : multiplication_population;
    }
    bool empty() const { return interface_population == 0.0 && multiplication_population == 0.0; }
};

inline constexpr std::array<TrapLabel, 2> kTrapLabels{TrapLabel::Interface, TrapLabel::Multiplication};

inline double trap_lifetime(const TrapSpecies &species, const Environment &env) {
    env.validate();
    detail::require(std::isfinite(species.activation_energy_ev) && std::isfinite(species.lifetime_prefactor_ps) &&
                        species.lifetime_prefactor_ps > 0.0,
                    "trap_lifetime: non-finite or non-positive parameters");
    return species.lifetime_prefactor_ps *
           std::exp(species.activation_energy_ev / (env.boltzmann_ev_per_k * env.temperature_k));
}

inline double survival_fraction(const TrapSpecies &species, const Environment &env, double elapsed_ps) {
    detail::require(elapsed_ps >= 0.0, "survival_fraction: elapsed time must be >= 0");
    if (std::isinf(elapsed_ps)) {
        return 0.0;
    }
    return std::exp(-elapsed_ps / trap_lifetime(species, env));
}

/// Mean number of avalanche-triggering photocarriers, lambda = mu * eta * p_a(delay).
inline double avalanche_mean(const DetectorParams &det, const PulseSpec &pulse) {
    return pulse.mean_flux * det.detection_efficiency * det.trigger_probability(pulse.delay_ps);
}

/// P[A or B] for independent events; exact when either probability is zero.
inline double combine_independent(double p, double q) {
    if (p == 0.0) {
        return q;
    }
    if (q == 0.0) {
        return p;
    }
    return 1.0 - (1.0 - p) * (1.0 - q);
}

/// Target-gate click probability under the charge-threshold model, including
/// dark counts.
inline double click_probability(const DetectorParams &det, const PulseSpec &pulse) {
    validate_pulse(det, pulse);
    const double lambda = avalanche_mean(det, pulse);
    if (!std::isfinite(lambda)) {
        throw NumericalError("click_probability: non-finite avalanche mean");
    }
    const double photon = poisson_upper_tail(det.threshold_count(pulse.delay_ps), lambda);
    return combine_independent(photon, det.dark_count_prob);
}

inline TrapState trap_loading(const DetectorParams &det, const PulseSpec &pulse) {
    validate_pulse(det, pulse);
    const double p_a = det.trigger_probability(pulse.delay_ps);
    const double carriers = pulse.mean_flux * det.detection_efficiency;
    const auto &itf = det.interface_trap;
    const auto &mul = det.multiplication_trap;

    TrapState state;
    state.load_time_ps = pulse.delay_ps;
    state.interface_population =
        carriers * (itf.capture_fraction_gated * p_a + itf.capture_fraction_photo * (1.0 - p_a));
    const double g = det.avalanche_gain(pulse.delay_ps);
    const double charge = carriers * p_a * g;
    const double retention = 1.0 + mul.retention_coefficient * (1.0 - g);
    state.multiplication_population = mul.capture_per_avalanche_charge * charge * retention;
    return state;
}

/// Fraction of one species' population released inside the gate `offset`
/// gates after loading.
inline double release_window_fraction(const DetectorParams &det, const TrapSpecies &species,
                                      const Environment &env, double load_time_ps, std::uint32_t offset) {
    const double start = offset * det.gate_period_ps() - load_time_ps;
    const double end = start + det.gate_width_ps();
    const double tau = trap_lifetime(species, env);
    return std::exp(-start / tau) - std::exp(-end / tau);
}

/// Expected number of released carriers that trigger an avalanche in gate
/// `offset` after loading.
inline double delayed_trigger_mean(const DetectorParams &det, const TrapState &state, const Environment &env,
                                   std::uint32_t offset) {
    detail::require(offset >= 1, "delayed detection needs a gate offset >= 1");
    double total = 0.0;
    for (const auto label : kTrapLabels) {
        const double population = state.population(label);
        if (population <= 0.0) {
            continue;
        }
        total += population * release_window_fraction(det, det.trap(label), env, state.load_time_ps, offset);
    }
    return total * det.mid_gate_trigger();
}

/// Click probability in gate `offset` caused by trap release, including dark
/// counts.
inline double delayed_click_probability(const DetectorParams &det, const TrapState &state, const Environment &env,
                                        std::uint32_t offset) {
    const double released = -std::expm1(-delayed_trigger_mean(det, state, env, offset));
    return combine_independent(released, det.dark_count_prob);
}

}  // namespace aftergate
