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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "aftergate/detector.hpp"
#include "aftergate/histogram.hpp"

namespace aftergate {

/// A pulse aimed at a particular gate of the window.
struct IndexedPulse {
    std::size_t gate_index = 0;
    PulseSpec pulse;
};

struct ClickRecord {
    std::uint64_t trial = 0;
    std::size_t gate_index = 0;

    friend bool operator==(const ClickRecord &, const ClickRecord &) = default;
};

namespace detail {

inline void validate_train(const DetectorParams &det, const std::vector<IndexedPulse> &pulses, std::size_t window) {
    det.validate();
    detail::require(window >= 1, "pulse train: window must contain at least one gate");
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        validate_pulse(det, pulses[i].pulse);
        detail::require(pulses[i].gate_index < window, "pulse train: window too small to contain all pulses");
        detail::require(i == 0 || pulses[i].gate_index > pulses[i - 1].gate_index,
                        "pulse train: gate indices must be strictly increasing");
    }
}

/// Flat afterpulse probability per gate: the expected number of
/// illuminated clicks times the afterpulse probability, spread evenly over
/// the window.
inline double afterpulse_background(const DetectorParams &det, const std::vector<IndexedPulse> &pulses,
                                    std::size_t window) {
    double expected_clicks = 0.0;
    for (const auto &p : pulses) {
        expected_clicks += poisson_upper_tail(det.threshold_count(p.pulse.delay_ps), avalanche_mean(det, p.pulse));
    }
    return std::min(1.0, det.afterpulse_prob * expected_clicks / static_cast<double>(window));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for one trial, derived from the master seed and the trial index
/// only, so the assignment of trials to workers does not matter.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

struct SpeciesSampler {
    double population = 0.0;
    double lifetime_ps = 1.0;
};

struct PreparedPulse {
    std::size_t gate_index = 0;
    double delay_ps = 0.0;
    double avalanche_mean = 0.0;
    std::uint32_t threshold = 1;
    std::array<SpeciesSampler, 2> species{};
};

/// Everything a trial needs, evaluated once per call.
struct TrainPlan {
    std::vector<PreparedPulse> pulses;
    std::size_t window = 0;
    double gate_period_ps = 0.0;
    double gate_width_ps = 0.0;
    double mid_trigger = 0.0;
    double dark = 0.0;
    double background = 0.0;
};

inline TrainPlan make_plan(const DetectorParams &det, const std::vector<IndexedPulse> &pulses,
                           const Environment &env, std::size_t window) {
    validate_train(det, pulses, window);
    env.validate();
    TrainPlan plan;
    plan.window = window;
    plan.gate_period_ps = det.gate_period_ps();
    plan.gate_width_ps = det.gate_width_ps();
    plan.mid_trigger = det.mid_gate_trigger();
    plan.dark = det.dark_count_prob;
    plan.background = afterpulse_background(det, pulses, window);
    for (const auto &p : pulses) {
        PreparedPulse prep;
        prep.gate_index = p.gate_index;
        prep.delay_ps = p.pulse.delay_ps;
        prep.avalanche_mean = avalanche_mean(det, p.pulse);
        prep.threshold = det.threshold_count(p.pulse.delay_ps);
        const TrapState state = trap_loading(det, p.pulse);
        for (std::size_t s = 0; s < kTrapLabels.size(); ++s) {
            prep.species[s].population = state.population(kTrapLabels[s]);
            prep.species[s].lifetime_ps = trap_lifetime(det.trap(kTrapLabels[s]), env);
        }
        plan.pulses.push_back(prep);
    }
    return plan;
}

/// Marks the gates that click in one trial.
inline void run_trial(const TrainPlan &plan, std::uint64_t seed, std::vector<char> &clicked) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::fill(clicked.begin(), clicked.end(), 0);

    for (const auto &p : plan.pulses) {
        if (p.avalanche_mean > 0.0) {
            std::poisson_distribution<std::uint64_t> photons(p.avalanche_mean);
            if (photons(rng) >= p.threshold) {
                clicked[p.gate_index] = 1;
            }
        }
        for (const auto &species : p.species) {
            if (species.population <= 0.0) {
                continue;
            }
            std::poisson_distribution<std::uint64_t> carriers(species.population);
            std::exponential_distribution<double> release(1.0 / species.lifetime_ps);
            const std::uint64_t n = carriers(rng);
            for (std::uint64_t c = 0; c < n; ++c) {
                // Time since the start of the loading gate.
                const double t = p.delay_ps + release(rng);
                const double offset = std::floor(t / plan.gate_period_ps);
                if (offset < 1.0 || t - offset * plan.gate_period_ps >= plan.gate_width_ps) {
                    continue;
                }
                const double gate = static_cast<double>(p.gate_index) + offset;
                if (gate < static_cast<double>(plan.window) && unit(rng) < plan.mid_trigger) {
                    clicked[static_cast<std::size_t>(gate)] = 1;
                }
            }
        }
    }
    for (std::size_t g = 0; g < plan.window; ++g) {
        const bool dark = unit(rng) < plan.dark;
        const bool background = unit(rng) < plan.background;
        if (dark || background) {
            clicked[g] = 1;
        }
    }
}

/// Runs `trials` trials on `workers` threads. Each worker owns a contiguous
/// block of trial indices and hands every trial's clicks to `sink`, which
/// must only touch state owned by that worker.
template <typename Sink>
void for_each_trial(const TrainPlan &plan, std::uint64_t trials, std::uint64_t seed, std::vector<Sink> &sinks) {
    const auto n_workers = static_cast<std::uint64_t>(sinks.size());
    auto work = [&](std::uint64_t w) {
        const std::uint64_t begin = trials * w / n_workers;
        const std::uint64_t end = trials * (w + 1) / n_workers;
        std::vector<char> clicked(plan.window);
        for (std::uint64_t t = begin; t < end; ++t) {
            run_trial(plan, trial_seed(seed, t), clicked);
            sinks[w](t, clicked);
        }
    };
    if (n_workers == 1) {
        work(0);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::uint64_t w = 0; w < n_workers; ++w) {
        threads.emplace_back(work, w);
    }
    for (auto &t : threads) {
        t.join();
    }
}

inline unsigned effective_workers(unsigned workers, std::uint64_t trials) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    return static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
}

}  // namespace detail

/// Exact per-gate click probabilities for a pulse train. Photon clicks,
/// released carriers from every earlier pulse, dark counts and the flat
/// afterpulse background are independent sources.
inline GateHistogram analytic_pulse_train(const DetectorParams &det, const std::vector<IndexedPulse> &pulses,
                                          const Environment &env, std::size_t window) {
    const detail::TrainPlan plan = detail::make_plan(det, pulses, env, window);
    std::vector<double> photon_miss(window, 1.0);
    std::vector<double> released(window, 0.0);
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto &p = plan.pulses[i];
        photon_miss[p.gate_index] *= 1.0 - poisson_upper_tail(p.threshold, p.avalanche_mean);
        const TrapState state = trap_loading(det, pulses[i].pulse);
        for (std::size_t g = p.gate_index + 1; g < window; ++g) {
            released[g] += delayed_trigger_mean(det, state, env, static_cast<std::uint32_t>(g - p.gate_index));
        }
    }
    GateHistogram hist;
    hist.gate_period_ps = plan.gate_period_ps;
    hist.counts.resize(window);
    for (std::size_t g = 0; g < window; ++g) {
        const double miss = photon_miss[g] * std::exp(-released[g]) * (1.0 - plan.dark) * (1.0 - plan.background);
        hist.counts[g] = 1.0 - miss;
    }
    return hist;
}

/// Monte Carlo realization of analytic_pulse_train. The result depends only
/// on the inputs and `seed`, never on `workers` (0 picks the hardware
/// concurrency).
inline GateHistogram simulate_pulse_train(const DetectorParams &det, const std::vector<IndexedPulse> &pulses,
                                          const Environment &env, std::size_t window, std::uint64_t trials,
                                          std::uint64_t seed, unsigned workers = 1) {
    detail::require(trials >= 1, "simulate_pulse_train: trials must be >= 1");
    const detail::TrainPlan plan = detail::make_plan(det, pulses, env, window);
    const unsigned n = detail::effective_workers(workers, trials);

    std::vector<std::vector<std::uint64_t>> partial(n, std::vector<std::uint64_t>(window, 0));
    std::vector<std::function<void(std::uint64_t, const std::vector<char> &)>> sinks;
    for (unsigned w = 0; w < n; ++w) {
        sinks.emplace_back([&counts = partial[w]](std::uint64_t, const std::vector<char> &clicked) {
            for (std::size_t g = 0; g < clicked.size(); ++g) {
                counts[g] += static_cast<std::uint64_t>(clicked[g]);
            }
        });
    }
    detail::for_each_trial(plan, trials, seed, sinks);

    GateHistogram hist;
    hist.trials = trials;
    hist.gate_period_ps = plan.gate_period_ps;
    hist.counts.assign(window, 0.0);
    for (std::size_t g = 0; g < window; ++g) {
        std::uint64_t total = 0;
        for (const auto &counts : partial) {
            total += counts[g];
        }
        hist.counts[g] = static_cast<double>(total);
    }
    return hist;
}

/// Same sampling as simulate_pulse_train, returning every click ordered by
/// (trial, gate) for dead-time processing.
inline std::vector<ClickRecord> simulate_click_records(const DetectorParams &det,
                                                       const std::vector<IndexedPulse> &pulses,
                                                       const Environment &env, std::size_t window,
                                                       std::uint64_t trials, std::uint64_t seed,
                                                       unsigned workers = 1) {
    detail::require(trials >= 1, "simulate_click_records: trials must be >= 1");
    const detail::TrainPlan plan = detail::make_plan(det, pulses, env, window);
    const unsigned n = detail::effective_workers(workers, trials);

    // Workers own contiguous trial blocks, so concatenating in worker order
    // yields records sorted by trial.
    std::vector<std::vector<ClickRecord>> partial(n);
    std::vector<std::function<void(std::uint64_t, const std::vector<char> &)>> sinks;
    for (unsigned w = 0; w < n; ++w) {
        sinks.emplace_back([&records = partial[w]](std::uint64_t trial, const std::vector<char> &clicked) {
            for (std::size_t g = 0; g < clicked.size(); ++g) {
                if (clicked[g]) {
                    records.push_back({trial, g});
                }
            }
        });
    }
    detail::for_each_trial(plan, trials, seed, sinks);

    std::vector<ClickRecord> records;
    for (auto &block : partial) {
        records.insert(records.end(), block.begin(), block.end());
    }
    return records;
}

}  // namespace aftergate
