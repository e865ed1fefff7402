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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aftergate/detector.hpp"
#include "aftergate/errors.hpp"
#include "aftergate/histogram.hpp"
#include "aftergate/monte_carlo.hpp"

namespace aftergate {

/// Counts clicks per gate after applying a per-trial dead time: a click
/// closer than `dead_time_ps` to the previous accepted click of the same
/// trial is dropped.
inline GateHistogram build_histogram(std::vector<ClickRecord> records, std::size_t window, std::uint64_t trials,
                                     double dead_time_ps, double gate_period_ps) {
    if (!(dead_time_ps >= 0.0)) {
        throw std::invalid_argument("build_histogram: dead time must be >= 0");
    }
    detail::require(gate_period_ps > 0.0, "build_histogram: gate period must be positive");
    detail::require(trials >= 1, "build_histogram: trials must be >= 1");
    std::sort(records.begin(), records.end(), [](const ClickRecord &a, const ClickRecord &b) {
        return a.trial != b.trial ? a.trial < b.trial : a.gate_index < b.gate_index;
    });

    GateHistogram hist;
    hist.trials = trials;
    hist.gate_period_ps = gate_period_ps;
    hist.counts.assign(window, 0.0);
    std::optional<std::uint64_t> trial;
    double last_accepted = 0.0;
    for (const auto &r : records) {
        detail::require(r.gate_index < window, "build_histogram: gate index outside window");
        detail::require(r.trial < trials, "build_histogram: trial index out of range");
        const double t = static_cast<double>(r.gate_index) * gate_period_ps;
        if (trial == r.trial && t - last_accepted < dead_time_ps) {
            continue;
        }
        trial = r.trial;
        last_accepted = t;
        hist.counts[r.gate_index] += 1.0;
    }
    return hist;
}

struct LifetimeOptions {
    /// 1-based gate numbers; Gate 1 is the illuminated gate.
    std::size_t anchor = 1;
    std::size_t probe = 3;
    /// Histogram index of Gate 1.
    std::size_t illuminated_index = 0;
    /// Gate 2 may be partly cancelled by self-differencing readout, so it is
    /// refused as anchor or probe unless this is cleared.
    bool self_differencing = true;
    /// Overrides both the histogram's own estimate and the tail mean.
    std::optional<double> background;
};

/// Mean of the gates after the fifth, in counts per gate.
inline double tail_background(const GateHistogram &hist, std::size_t illuminated_index = 0) {
    const std::size_t first = illuminated_index + 5;
    if (hist.size() <= first) {
        throw NumericalError("background: histogram has no gates beyond the fifth");
    }
    double sum = 0.0;
    for (std::size_t i = first; i < hist.size(); ++i) {
        sum += hist.counts[i];
    }
    return sum / static_cast<double>(hist.size() - first);
}

/// Single-exponential lifetime from two background-subtracted gates:
/// tau = (probe - anchor) * T / ln(C_anchor / C_probe).
inline double extract_lifetime(const GateHistogram &hist, const LifetimeOptions &opts = {}) {
    hist.validate();
    detail::require(opts.anchor >= 1 && opts.probe > opts.anchor, "extract_lifetime: need 1 <= anchor < probe");
    if (opts.self_differencing) {
        detail::require(opts.anchor != 2 && opts.probe != 2,
                        "extract_lifetime: Gate 2 is unreliable under self-differencing readout");
    }
    const std::size_t ia = opts.illuminated_index + opts.anchor - 1;
    const std::size_t ip = opts.illuminated_index + opts.probe - 1;
    detail::require(ip < hist.size(), "extract_lifetime: probe gate outside histogram");

    double background = 0.0;
    if (opts.background) {
        background = *opts.background;
    } else if (hist.background) {
        background = *hist.background;
    } else {
        background = tail_background(hist, opts.illuminated_index);
    }
    detail::require(background >= 0.0, "extract_lifetime: background must be >= 0");

    const double ca = hist.counts[ia] - background;
    const double cp = hist.counts[ip] - background;
    if (!(ca > 0.0) || !(cp > 0.0)) {
        throw NumericalError("lifetime extraction failed: background-subtracted counts are not positive");
    }
    if (cp >= ca) {
        throw NumericalError("lifetime extraction failed: counts do not decay between the chosen gates");
    }
    const double separation = static_cast<double>(opts.probe - opts.anchor) * hist.gate_period_ps;
    return separation / std::log(ca / cp);
}

struct LifetimePoint {
    double temperature_k = 0.0;
    double lifetime_ps = 0.0;
    double excess_bias_fraction = 0.1;
};

struct ArrheniusFit {
    double activation_energy_ev = 0.0;
    double lifetime_prefactor_ps = 0.0;
    /// Root-mean-square residual of ln(tau).
    double residual_norm = 0.0;
};

/// Ordinary least squares of ln(tau) against 1/T.
inline ArrheniusFit arrhenius_fit(const std::vector<LifetimePoint> &points,
                                  double boltzmann_ev_per_k = kBoltzmannEvPerK) {
    std::set<double> temperatures;
    for (const auto &p : points) {
        detail::require(std::isfinite(p.temperature_k) && p.temperature_k > 0.0,
                        "arrhenius_fit: temperatures must be positive");
        detail::require(std::isfinite(p.lifetime_ps) && p.lifetime_ps > 0.0,
                        "arrhenius_fit: lifetimes must be positive");
        detail::require(p.excess_bias_fraction == points.front().excess_bias_fraction,
                        "arrhenius_fit: all points must share one excess bias");
        temperatures.insert(p.temperature_k);
    }
    detail::require(temperatures.size() >= 2, "arrhenius_fit: need at least two distinct temperatures");

    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto &p : points) {
        mx += 1.0 / p.temperature_k;
        my += std::log(p.lifetime_ps);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto &p : points) {
        const double dx = 1.0 / p.temperature_k - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.lifetime_ps) - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    double ss = 0.0;
    for (const auto &p : points) {
        const double r = std::log(p.lifetime_ps) - (intercept + slope / p.temperature_k);
        ss += r * r;
    }
    ArrheniusFit fit;
    fit.activation_energy_ev = slope * boltzmann_ev_per_k;
    fit.lifetime_prefactor_ps = std::exp(intercept);
    fit.residual_norm = std::sqrt(ss / n);
    return fit;
}

}  // namespace aftergate
