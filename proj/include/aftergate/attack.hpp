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
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aftergate/detector.hpp"
#include "aftergate/errors.hpp"
#include "aftergate/histogram.hpp"

namespace aftergate {

/// Error-rate threshold above which BB84 post-processing aborts.
inline constexpr double kDefaultQberThreshold = 0.11;

namespace detail {

inline void require_probability(double p, const char *what) {
    detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, std::string(what) + " must lie in [0, 1]");
}

}  // namespace detail

/// Error rate Eve induces in the target gate:
/// (2 p_h - p_h^2) / (2 p_f + 2 (2 p_h - p_h^2)).
/// Returns nullopt when neither power ever clicks.
inline std::optional<double> qber_target(double p_f, double p_h) {
    detail::require_probability(p_f, "qber_target: p_f");
    detail::require_probability(p_h, "qber_target: p_h");
    const double mismatched = 2.0 * p_h - p_h * p_h;
    const double denominator = 2.0 * p_f + 2.0 * mismatched;
    if (denominator == 0.0) {
        return std::nullopt;
    }
    return mismatched / denominator;
}

/// Average one-gate-delayed click probability: Bob's basis matches Eve's a
/// quarter of the time at full power and half the time at half power.
inline double mean_delayed(double p_dd_f, double p_dd_h) {
    detail::require_probability(p_dd_f, "mean_delayed: p_dd_f");
    detail::require_probability(p_dd_h, "mean_delayed: p_dd_h");
    return 0.25 * p_dd_f + 0.5 * p_dd_h;
}

struct DelayedQber {
    std::optional<double> q;
    double p_dd_bar = 0.0;
    /// True when p + p_dd_bar exceeded 1 for either power.
    bool clamped = false;
};

inline DelayedQber qber_with_dd_detail(double p_f, double p_h, double p_dd_f, double p_dd_h) {
    detail::require_probability(p_f, "qber_with_dd: p_f");
    detail::require_probability(p_h, "qber_with_dd: p_h");
    DelayedQber out;
    out.p_dd_bar = mean_delayed(p_dd_f, p_dd_h);
    const double pf = p_f + out.p_dd_bar;
    const double ph = p_h + out.p_dd_bar;
    out.clamped = pf > 1.0 || ph > 1.0;
    out.q = qber_target(std::min(pf, 1.0), std::min(ph, 1.0));
    return out;
}

inline std::optional<double> qber_with_dd(double p_f, double p_h, double p_dd_f, double p_dd_h) {
    return qber_with_dd_detail(p_f, p_h, p_dd_f, p_dd_h).q;
}

/// Smallest p_f that pushes qber_target(p_f, p_h) strictly below `q`.
inline double superlinear_threshold(double p_h, double q) {
    detail::require_probability(p_h, "superlinear_threshold: p_h");
    detail::require(q > 0.0 && q <= 0.5, "superlinear_threshold: q must lie in (0, 0.5]");
    const double mismatched = 2.0 * p_h - p_h * p_h;
    return mismatched * (1.0 - 2.0 * q) / (2.0 * q);
}

struct AttackScenario {
    double flux_full = 80.0;
    double flux_half = 40.0;
    double delay_ps = 0.0;
    double attacked_fraction = 1.0;
    Environment env{};

    static AttackScenario with_full_flux(double flux_full, double delay_ps = 0.0, Environment env = {}) {
        return AttackScenario{flux_full, 0.5 * flux_full, delay_ps, 1.0, env};
    }

    void validate() const {
        detail::require(std::isfinite(flux_full) && std::isfinite(flux_half) && flux_full >= flux_half &&
                            flux_half >= 0.0,
                        "scenario: require flux_full >= flux_half >= 0");
        detail::require(attacked_fraction >= 0.0 && attacked_fraction <= 1.0,
                        "scenario: attacked_fraction must lie in [0, 1]");
        env.validate();
    }
};

struct QberPoint {
    double delay_ps = 0.0;
    double p_f = 0.0;
    double p_h = 0.0;
    double p_dd_f = 0.0;
    double p_dd_h = 0.0;
    double p_dd_bar = 0.0;
    std::optional<double> q_target;
    std::optional<double> q_with_dd;
    bool clamped = false;
};

/// Evaluates both error-rate forms for one pulse delay.
inline QberPoint qber_point(const DetectorParams &det, const AttackScenario &scenario, double delay_ps) {
    const PulseSpec full{scenario.flux_full, delay_ps};
    const PulseSpec half{scenario.flux_half, delay_ps};
    QberPoint pt;
    pt.delay_ps = delay_ps;
    pt.p_f = click_probability(det, full);
    pt.p_h = click_probability(det, half);
    pt.p_dd_f = delayed_click_probability(det, trap_loading(det, full), scenario.env, 1);
    pt.p_dd_h = delayed_click_probability(det, trap_loading(det, half), scenario.env, 1);
    pt.q_target = qber_target(pt.p_f, pt.p_h);
    const DelayedQber dd = qber_with_dd_detail(pt.p_f, pt.p_h, pt.p_dd_f, pt.p_dd_h);
    pt.p_dd_bar = dd.p_dd_bar;
    pt.q_with_dd = dd.q;
    pt.clamped = dd.clamped;
    return pt;
}

/// Delay sweep in ascending delay order. No-signal points are kept with
/// empty q fields.
inline std::vector<QberPoint> sweep_delay(const DetectorParams &det, const AttackScenario &scenario,
                                          std::vector<double> delays) {
    det.validate();
    scenario.validate();
    std::sort(delays.begin(), delays.end());
    std::vector<QberPoint> out;
    out.reserve(delays.size());
    for (double d : delays) {
        out.push_back(qber_point(det, scenario, d));
    }
    return out;
}

/// Delays start, start + step, ... strictly below `stop`.
inline std::vector<double> delay_grid(double start, double stop, double step) {
    detail::require(step > 0.0 && stop > start, "delay grid: need step > 0 and stop > start");
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double d = start + static_cast<double>(i) * step;
        if (d >= stop) {
            break;
        }
        out.push_back(d);
    }
    return out;
}

/// Minimum of one q field over a sweep, with the delay where it occurs.
struct SweepMinimum {
    double q = std::numeric_limits<double>::quiet_NaN();
    double delay_ps = std::numeric_limits<double>::quiet_NaN();
    bool found = false;
};

inline SweepMinimum sweep_minimum(const std::vector<QberPoint> &sweep, bool with_dd) {
    SweepMinimum best;
    for (const auto &pt : sweep) {
        const auto &q = with_dd ? pt.q_with_dd : pt.q_target;
        if (q && (!best.found || *q < best.q)) {
            best = {*q, pt.delay_ps, true};
        }
    }
    return best;
}

enum class Power { Full, Half };

/// Analytic per-gate click probabilities after one attack pulse in gate 0.
/// Later gates see only released carriers and dark counts.
inline GateHistogram attack_histogram(const DetectorParams &det, const AttackScenario &scenario, Power power,
                                      std::size_t gates) {
    det.validate();
    scenario.validate();
    detail::require(gates >= 1, "attack_histogram: need at least one gate");
    const PulseSpec pulse{power == Power::Full ? scenario.flux_full : scenario.flux_half, scenario.delay_ps};
    const TrapState state = trap_loading(det, pulse);
    GateHistogram hist;
    hist.gate_period_ps = det.gate_period_ps();
    hist.counts.push_back(click_probability(det, pulse));
    for (std::size_t k = 1; k < gates; ++k) {
        hist.counts.push_back(delayed_click_probability(det, state, scenario.env, static_cast<std::uint32_t>(k)));
    }
    return hist;
}

/// Copy of `det` with one trap species switched off.
inline DetectorParams without_species(DetectorParams det, TrapLabel label) {
    if (label == TrapLabel::Interface) {
        det.interface_trap.capture_fraction_photo = 0.0;
        det.interface_trap.capture_fraction_gated = 0.0;
    } else {
        det.multiplication_trap.capture_per_avalanche_charge = 0.0;
    }
    return det;
}

/// Gate-2 click probability as a function of the pulse delay in Gate 1.
inline std::vector<std::pair<double, double>> gate2_vs_delay(const DetectorParams &det, double flux,
                                                             std::vector<double> delays, const Environment &env) {
    det.validate();
    detail::require(flux >= 0.0, "gate2_vs_delay: flux must be >= 0");
    std::sort(delays.begin(), delays.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(delays.size());
    for (double d : delays) {
        const PulseSpec pulse{flux, d};
        out.emplace_back(d, delayed_click_probability(det, trap_loading(det, pulse), env, 1));
    }
    return out;
}

/// Indices i with v[i-1] > v[i] <= v[i+1].
inline std::vector<std::size_t> interior_local_minima(const std::vector<double> &v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] < v[i - 1] && v[i] <= v[i + 1]) {
            out.push_back(i);
        }
    }
    return out;
}

/// q_target over a flux-by-delay grid; `values[i][j]` belongs to
/// fluxes[i], delays[j]. Half power is flux/2 in every cell.
struct QberContour {
    std::vector<double> fluxes;
    std::vector<double> delays;
    std::vector<std::vector<std::optional<double>>> values;

    bool below(std::size_t i, std::size_t j, double threshold) const {
        return values[i][j] && *values[i][j] < threshold;
    }

    /// Smallest flux with some cell below `threshold`, and the first delay
    /// where that happens.
    std::optional<std::pair<double, double>> min_flux_below(double threshold) const {
        for (std::size_t i = 0; i < fluxes.size(); ++i) {
            for (std::size_t j = 0; j < delays.size(); ++j) {
                if (below(i, j, threshold)) {
                    return std::make_pair(fluxes[i], delays[j]);
                }
            }
        }
        return std::nullopt;
    }
};

inline QberContour contour_flux_delay(const DetectorParams &det, std::vector<double> fluxes,
                                      std::vector<double> delays) {
    det.validate();
    std::sort(fluxes.begin(), fluxes.end());
    std::sort(delays.begin(), delays.end());
    for (double f : fluxes) {
        detail::require(f > 0.0, "contour: fluxes must be positive");
    }
    QberContour c{fluxes, delays, {}};
    c.values.resize(fluxes.size());
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        c.values[i].reserve(delays.size());
        for (double d : delays) {
            const double p_f = click_probability(det, {fluxes[i], d});
            const double p_h = click_probability(det, {0.5 * fluxes[i], d});
            c.values[i].push_back(qber_target(p_f, p_h));
        }
    }
    return c;
}

inline double binary_entropy(double q) {
    detail::require(std::isfinite(q) && q >= 0.0 && q <= 1.0, "binary_entropy: q must lie in [0, 1]");
    if (q == 0.0 || q == 1.0) {
        return 0.0;
    }
    return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

/// Asymptotic BB84 secret fraction, clamped at zero.
inline double key_rate(double q) { return std::max(0.0, 1.0 - 2.0 * binary_entropy(q)); }

struct KeyRateResult {
    double qber = 0.0;
    double rate = 0.0;
};

inline KeyRateResult key_rate_result(double q) { return {q, key_rate(q)}; }

struct PartialAttackRow {
    double fraction = 0.0;
    /// Rate when attacked and unattacked gates are distilled separately.
    double combined_rate = 0.0;
    /// Rate when all gates are distilled together at the blended error rate.
    double full_attack_rate = 0.0;
};

inline std::vector<PartialAttackRow> partial_attack_rates(double q_attack, double q_baseline,
                                                          const std::vector<double> &fractions) {
    detail::require(q_attack >= 0.0 && q_attack <= 0.5, "partial_attack_rates: q_attack must lie in [0, 0.5]");
    detail::require(q_baseline >= 0.0 && q_baseline <= 0.5,
                    "partial_attack_rates: q_baseline must lie in [0, 0.5]");
    const double r_attack = key_rate(q_attack);
    const double r_baseline = key_rate(q_baseline);
    std::vector<PartialAttackRow> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        detail::require(f >= 0.0 && f <= 1.0, "partial_attack_rates: fractions must lie in [0, 1]");
        out.push_back({f, f * r_attack + (1.0 - f) * r_baseline, key_rate(f * q_attack + (1.0 - f) * q_baseline)});
    }
    return out;
}

}  // namespace aftergate
