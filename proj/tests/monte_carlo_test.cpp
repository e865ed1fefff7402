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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "aftergate/characterization.hpp"
#include "aftergate/monte_carlo.hpp"
#include "test_util.hpp"

using namespace aftergate;

namespace {

::testing::AssertionResult within_standard_errors(const GateHistogram &mc, const GateHistogram &exact, double k) {
    for (std::size_t g = 0; g < mc.size(); ++g) {
        const double p = exact.counts[g];
        const double n = static_cast<double>(mc.trials);
        const double se = std::sqrt(p * (1.0 - p) / n);
        const double f = mc.counts[g] / n;
        if (std::abs(f - p) > k * se && !(p == 0.0 && f == 0.0)) {
            return ::testing::AssertionFailure()
                   << "gate " << g << ": frequency " << f << " vs analytic " << p << " (se " << se << ")";
        }
    }
    return ::testing::AssertionSuccess();
}

}  // namespace

TEST(MonteCarlo, DarkFreeZeroFluxGivesEmptyHistogram) {
    DetectorParams det = testing_util::default_detector_without_darks();
    const auto hist = simulate_pulse_train(det, {{1, {0.0, 26.0}}}, Environment{}, 8, 5000, 7);
    for (double c : hist.counts) {
        EXPECT_EQ(c, 0.0);
    }
    EXPECT_EQ(hist.trials, 5000u);
}

TEST(MonteCarlo, SameSeedIsBitIdenticalForAnyWorkerCount) {
    const DetectorParams det = testing_util::default_detector();
    const std::vector<IndexedPulse> train{{0, {80.0, 170.0}}, {2, {40.0, 181.0}}};
    const auto one = simulate_pulse_train(det, train, Environment{}, 10, 20000, 99, 1);
    for (unsigned w : {2u, 3u, 8u}) {
        const auto many = simulate_pulse_train(det, train, Environment{}, 10, 20000, 99, w);
        EXPECT_EQ(one.counts, many.counts) << "workers " << w;
    }
    const auto again = simulate_pulse_train(det, train, Environment{}, 10, 20000, 99, 1);
    EXPECT_EQ(one.counts, again.counts);
    const auto other = simulate_pulse_train(det, train, Environment{}, 10, 20000, 100, 1);
    EXPECT_NE(one.counts, other.counts);
}

TEST(MonteCarlo, ClickRecordsMatchHistogramAndWorkerCount) {
    const DetectorParams det = testing_util::default_detector();
    const std::vector<IndexedPulse> train{{1, {80.0, 178.0}}};
    const auto hist = simulate_pulse_train(det, train, Environment{}, 6, 10000, 5, 1);
    const auto records = simulate_click_records(det, train, Environment{}, 6, 10000, 5, 1);
    const auto records8 = simulate_click_records(det, train, Environment{}, 6, 10000, 5, 8);
    EXPECT_EQ(records, records8);
    const auto rebuilt = build_histogram(records, 6, 10000, 0.0, det.gate_period_ps());
    EXPECT_EQ(rebuilt.counts, hist.counts);
}

TEST(MonteCarlo, AgreesWithAnalyticSinglePulse) {
    const DetectorParams det = testing_util::default_detector();
    for (double delay : {26.0, 120.0, 176.0, 181.0}) {
        const std::vector<IndexedPulse> train{{1, {80.0, delay}}};
        const auto exact = analytic_pulse_train(det, train, Environment{}, 8);
        const auto mc = simulate_pulse_train(det, train, Environment{}, 8, 100000, 11);
        EXPECT_TRUE(within_standard_errors(mc, exact, 4.0)) << "delay " << delay;
    }
}

TEST(MonteCarlo, AgreesWithAnalyticPulseTrainAtLowTemperature) {
    DetectorParams det = testing_util::default_detector();
    // Exaggerated traps so released carriers dominate later gates.
    det.interface_trap.capture_fraction_photo = 0.05;
    det.interface_trap.capture_fraction_gated = 0.01;
    det.multiplication_trap.capture_per_avalanche_charge = 2.0;
    det.afterpulse_prob = 0.2;
    const std::vector<IndexedPulse> train{{0, {30.0, 150.0}}, {1, {5.0, 600.0}}, {3, {60.0, 179.0}}};
    const Environment cold = Environment::at_celsius(-50.0);
    const auto exact = analytic_pulse_train(det, train, cold, 9);
    const auto mc = simulate_pulse_train(det, train, cold, 9, 100000, 3, 4);
    EXPECT_TRUE(within_standard_errors(mc, exact, 4.0));
}

TEST(MonteCarlo, SinglePhotonEfficiencyAtReferenceDelay) {
    const DetectorParams det = testing_util::default_detector();
    const double mu = 0.1;
    const std::size_t window = 12;
    const std::vector<IndexedPulse> train{{2, {mu, det.reference_delay_ps}}};
    const std::uint64_t n = 1000000;
    const auto mc = simulate_pulse_train(det, train, Environment{}, window, n, 2026, 4);
    const double p = mc.probability(2);
    // Remove dark and flat afterpulse clicks, then invert 1 - exp(-mu eta).
    const double background = detail::afterpulse_background(det, train, window);
    const double other = (1.0 - det.dark_count_prob) * (1.0 - background);
    const double eta = -std::log((1.0 - p) / other) / mu;
    const double se_p = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double se_eta = se_p / ((1.0 - p) * mu);
    EXPECT_NEAR(eta, 0.28, 3.0 * se_eta);
}

TEST(MonteCarlo, AfterpulseBackgroundIsFlat) {
    DetectorParams det = testing_util::default_detector_without_darks();
    det.interface_trap.capture_fraction_photo = 0.0;
    det.interface_trap.capture_fraction_gated = 0.0;
    det.multiplication_trap.capture_per_avalanche_charge = 0.0;
    det.afterpulse_prob = 0.5;
    const std::vector<IndexedPulse> train{{0, {10.0, 26.0}}};
    const auto exact = analytic_pulse_train(det, train, Environment{}, 5);
    const double illuminated = 1.0 - std::exp(-10.0 * 0.28);
    for (std::size_t g = 1; g < 5; ++g) {
        EXPECT_NEAR(exact.counts[g], 0.5 * illuminated / 5.0, 1e-15);
    }
}

TEST(MonteCarlo, RejectsBadInputs) {
    const DetectorParams det = testing_util::default_detector();
    EXPECT_THROW(simulate_pulse_train(det, {{0, {1.0, 26.0}}}, Environment{}, 4, 0, 1), std::invalid_argument);
    EXPECT_THROW(simulate_pulse_train(det, {{4, {1.0, 26.0}}}, Environment{}, 4, 10, 1), std::invalid_argument);
    EXPECT_THROW(simulate_pulse_train(det, {{2, {1.0, 26.0}}, {2, {1.0, 26.0}}}, Environment{}, 4, 10, 1),
                 std::invalid_argument);
    EXPECT_THROW(simulate_pulse_train(det, {{2, {1.0, 26.0}}, {1, {1.0, 26.0}}}, Environment{}, 4, 10, 1),
                 std::invalid_argument);
}

TEST(MonteCarlo, TrialSeedsAreDistinct) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        seeds.push_back(detail::trial_seed(42, t));
    }
    std::sort(seeds.begin(), seeds.end());
    EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
    EXPECT_NE(detail::trial_seed(42, 0), detail::trial_seed(43, 0));
}
