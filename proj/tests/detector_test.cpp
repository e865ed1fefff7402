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


#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "aftergate/config.hpp"
#include "aftergate/detector.hpp"
#include "test_util.hpp"

using namespace aftergate;

namespace {

TrapSpecies interface_species(double ea, double tau0) {
    TrapSpecies s;
    s.label = TrapLabel::Interface;
    s.activation_energy_ev = ea;
    s.lifetime_prefactor_ps = tau0;
    return s;
}

}  // namespace

TEST(TrapLifetime, ZeroActivationEnergyReturnsPrefactor) {
    const auto s = interface_species(0.0, 100.0);
    for (double t : {50.0, 200.0, 293.15, 400.0}) {
        EXPECT_DOUBLE_EQ(trap_lifetime(s, Environment{t}), 100.0);
    }
}

TEST(TrapLifetime, ArrheniusValues) {
    const auto s = interface_species(0.030, 50.0);
    const double warm = trap_lifetime(s, Environment{293.15});
    const double cold = trap_lifetime(s, Environment{243.15});
    EXPECT_NEAR(warm, 163.96235872592555, 1e-9);
    EXPECT_NEAR(cold, 209.31726746208344, 1e-9);
    EXPECT_NEAR(warm, 164.1, 0.2);
    EXPECT_NEAR(cold, 209.5, 0.2);
    EXPECT_GT(cold, warm);
}

TEST(TrapLifetime, StrictlyDecreasesWithTemperature) {
    const auto s = interface_species(0.045, 60.0);
    double previous = INFINITY;
    for (double t = 150.0; t <= 400.0; t += 5.0) {
        const double tau = trap_lifetime(s, Environment{t});
        EXPECT_LT(tau, previous);
        previous = tau;
    }
}

TEST(TrapLifetime, LowerActivationEnergyIsShorterEverywhere) {
    const auto low = interface_species(0.020, 50.0);
    const auto high = interface_species(0.040, 50.0);
    for (double t = 200.0; t <= 320.0; t += 10.0) {
        EXPECT_LT(trap_lifetime(low, Environment{t}), trap_lifetime(high, Environment{t}));
    }
}

TEST(TrapLifetime, RejectsInvalidEnvironment) {
    const auto s = interface_species(0.03, 50.0);
    EXPECT_THROW(trap_lifetime(s, Environment{0.0}), std::invalid_argument);
    EXPECT_THROW(trap_lifetime(s, Environment{NAN}), std::invalid_argument);
    EXPECT_THROW(trap_lifetime(s, Environment{293.15, 0.0}), std::invalid_argument);
    EXPECT_THROW(trap_lifetime(s, Environment{293.15, 1.5}), std::invalid_argument);
}

TEST(SurvivalFraction, Values) {
    const auto s = interface_species(0.0, 500.0);
    const Environment env{};
    EXPECT_EQ(survival_fraction(s, env, 0.0), 1.0);
    EXPECT_NEAR(survival_fraction(s, env, 2000.0), 0.01831563888873418, 1e-15);
    EXPECT_NEAR(survival_fraction(s, env, 1e9), 0.0, 1e-300);
    EXPECT_EQ(survival_fraction(s, env, INFINITY), 0.0);
    EXPECT_THROW(survival_fraction(s, env, -1.0), std::invalid_argument);
}

TEST(GateTiming, RejectsDegenerateGates) {
    EXPECT_THROW(GateTiming(1e9, 1000.0), std::invalid_argument);
    EXPECT_THROW(GateTiming(1e9, 1500.0), std::invalid_argument);
    EXPECT_THROW(GateTiming(1e9, 0.0), std::invalid_argument);
    EXPECT_THROW(GateTiming(0.0, 10.0), std::invalid_argument);
    const GateTiming t(1e9, 999.0);
    EXPECT_DOUBLE_EQ(t.gate_period_ps(), 1000.0);
    EXPECT_DOUBLE_EQ(GateTiming(2.5e8, 100.0).gate_period_ps(), 4000.0);
}

TEST(Profiles, ZeroOutsideGateAndNonIncreasingOnEdge) {
    const DetectorParams det = testing_util::default_detector();
    const double w = det.gate_width_ps();
    EXPECT_EQ(det.trigger_probability(w), 0.0);
    EXPECT_EQ(det.trigger_probability(w + 1.0), 0.0);
    EXPECT_EQ(det.trigger_probability(-1.0), 0.0);
    EXPECT_EQ(det.avalanche_gain(w + 10.0), det.gain.floor);
    EXPECT_EQ(det.trigger_probability(0.0), 1.0);
    EXPECT_EQ(det.avalanche_gain(0.0), 1.0);
    double pa = 1.0, g = 1.0;
    for (double t = 0.0; t < det.gate_period_ps(); t += 0.25) {
        EXPECT_LE(det.trigger_probability(t), pa);
        EXPECT_LE(det.avalanche_gain(t), g);
        EXPECT_GE(det.avalanche_gain(t), det.gain.floor);
        pa = det.trigger_probability(t);
        g = det.avalanche_gain(t);
    }
}

TEST(ThresholdCount, CeilingWithTiesCountingAsClicks) {
    DetectorParams det = testing_util::simple_detector();
    det.gain = {0.0, 0.0, 0.25};  // floor everywhere inside the edge
    det.discrimination_threshold = 1.0;
    EXPECT_EQ(det.threshold_count(10.0), 4u);  // 4 * 0.25 == 1 exactly
    det.gain = {0.0, 0.0, 0.3};
    EXPECT_EQ(det.threshold_count(10.0), 4u);  // 3 * 0.3 < 1
    det.gain = {0.0, 0.0, 0.1};
    EXPECT_EQ(det.threshold_count(10.0), 10u);
    det.gain = {1000.0, 0.0, 0.25};
    EXPECT_EQ(det.threshold_count(10.0), 1u);
}

TEST(ClickProbability, Examples) {
    DetectorParams det = testing_util::simple_detector();
    EXPECT_EQ(click_probability(det, {0.0, 10.0}), 0.0);

    // lambda = mu * eta * p_a = 0.1 with N_th = 1.
    det.detection_efficiency = 0.5;
    EXPECT_NEAR(click_probability(det, {0.2, 10.0}), 0.09516258196404048, 1e-15);

    det.gain = {0.0, 0.0, 0.25};
    const double p_h = click_probability(det, {2.0, 10.0});
    const double p_f = click_probability(det, {4.0, 10.0});
    EXPECT_NEAR(p_h, 0.01898815687615381, 1e-14);
    EXPECT_NEAR(p_f, 0.14287653950145296, 1e-14);
    EXPECT_GT(p_f, 2.0 * p_h);
}

TEST(ClickProbability, DarkCountsCombineIndependently) {
    DetectorParams det = testing_util::simple_detector();
    det.dark_count_prob = 0.01;
    EXPECT_NEAR(click_probability(det, {0.0, 10.0}), 0.01, 1e-15);
    const double photon = 1.0 - std::exp(-0.28 * 0.5);
    EXPECT_NEAR(click_probability(det, {0.5, 10.0}), 1.0 - (1.0 - photon) * 0.99, 1e-15);
}

TEST(ClickProbability, RejectsDelayOutsidePeriod) {
    const DetectorParams det = testing_util::simple_detector();
    EXPECT_THROW(click_probability(det, {1.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(click_probability(det, {1.0, det.gate_period_ps()}), std::invalid_argument);
    EXPECT_THROW(click_probability(det, {-1.0, 10.0}), std::invalid_argument);
}

TEST(ClickProbability, LinearRegimeIdentity) {
    // Where N_th = 1 and there are no darks, doubling the flux gives exactly
    // 2 p_h - p_h^2.
    const DetectorParams det = testing_util::default_detector_without_darks();
    for (double mu = 0.01; mu < 20.0; mu *= 1.7) {
        for (double d = 0.0; d < det.gain.edge_start_ps; d += 7.0) {
            ASSERT_EQ(det.threshold_count(d), 1u);
            const double p_h = click_probability(det, {mu, d});
            const double p_f = click_probability(det, {2.0 * mu, d});
            EXPECT_NEAR(p_f, 2.0 * p_h - p_h * p_h, 1e-15);
        }
    }
}

TEST(ClickProbability, SuperlinearityOnlyNearGateEnd) {
    const DetectorParams det = testing_util::default_detector_without_darks();
    bool found = false;
    for (double d = 0.0; d < det.gate_width_ps(); d += 0.5) {
        const double p_h = click_probability(det, {40.0, d});
        const double p_f = click_probability(det, {80.0, d});
        if (det.threshold_count(d) == 1) {
            EXPECT_LE(p_f, 2.0 * p_h);
        } else if (p_f > 2.0 * p_h) {
            found = true;
            EXPECT_GT(d, det.gain.edge_start_ps);
        }
    }
    EXPECT_TRUE(found);
}

TEST(TrapLoading, ZeroFluxAndLinearity) {
    const DetectorParams det = testing_util::default_detector();
    for (double d : {10.0, 90.0, 150.0, 181.0, 400.0}) {
        const TrapState zero = trap_loading(det, {0.0, d});
        EXPECT_EQ(zero.interface_population, 0.0);
        EXPECT_EQ(zero.multiplication_population, 0.0);
        const TrapState one = trap_loading(det, {10.0, d});
        const TrapState two = trap_loading(det, {20.0, d});
        EXPECT_NEAR(two.interface_population, 2.0 * one.interface_population, 1e-18);
        EXPECT_NEAR(two.multiplication_population, 2.0 * one.multiplication_population, 1e-15);
        EXPECT_EQ(one.load_time_ps, d);
    }
}

TEST(TrapLoading, InterfaceLawMatchesHandEvaluation) {
    DetectorParams det = testing_util::simple_detector();
    det.interface_trap.capture_fraction_photo = 0.02;
    det.interface_trap.capture_fraction_gated = 0.005;
    det.trigger = {100.0, 100.0, 0.0};
    // p_a(150) = 0.5 on the raised cosine, p_a(300) = 0 past the gate.
    const TrapState mid = trap_loading(det, {10.0, 150.0});
    EXPECT_NEAR(mid.interface_population, 10.0 * 0.28 * (0.005 * 0.5 + 0.02 * 0.5), 1e-15);
    const TrapState after = trap_loading(det, {10.0, 600.0});
    EXPECT_NEAR(after.interface_population, 10.0 * 0.28 * 0.02, 1e-15);
}

TEST(TrapLoading, RetentionRaisesEndOfGateLoading) {
    DetectorParams det = testing_util::simple_detector();
    det.multiplication_trap.capture_per_avalanche_charge = 0.3;
    det.multiplication_trap.retention_coefficient = 0.8;
    det.gain = {100.0, 50.0, 0.25};
    // Mid-gate: g = 1. End of gate: g = 0.25. Choose fluxes so lambda * g matches.
    const double mid_flux = 10.0;
    const double end_flux = 40.0;
    ASSERT_DOUBLE_EQ(det.avalanche_gain(50.0), 1.0);
    ASSERT_DOUBLE_EQ(det.avalanche_gain(160.0), 0.25);
    ASSERT_DOUBLE_EQ(det.trigger_probability(160.0), 1.0);
    const double mid = trap_loading(det, {mid_flux, 50.0}).multiplication_population;
    const double end = trap_loading(det, {end_flux, 160.0}).multiplication_population;
    EXPECT_NEAR(end / mid, 1.0 + 0.8 * 0.75, 1e-12);
    EXPECT_GT(end / mid, 1.0);
}

TEST(DelayedClick, EmptyStateGivesDarkRate) {
    DetectorParams det = testing_util::default_detector();
    const TrapState empty{};
    EXPECT_EQ(delayed_click_probability(det, empty, Environment{}, 1), det.dark_count_prob);
    det.dark_count_prob = 0.0;
    EXPECT_EQ(delayed_click_probability(det, empty, Environment{}, 3), 0.0);
}

TEST(DelayedClick, HandEvaluatedSingleSpecies) {
    // Lifetime, gate period and width chosen so the survival window is 0.4 and
    // the mid-gate trigger probability is 0.9.
    DetectorParams det = testing_util::simple_detector();
    const double w = det.gate_width_ps();
    // Stretch the raised-cosine edge so that p_a(w/2) is 0.9.
    const double u = std::acos(2.0 * 0.9 - 1.0) / std::numbers::pi;
    det.trigger = {0.0, 0.5 * w / u, 0.0};
    ASSERT_NEAR(det.mid_gate_trigger(), 0.9, 1e-12);

    det.interface_trap.activation_energy_ev = 0.0;
    const double tau = 400.0;
    det.interface_trap.lifetime_prefactor_ps = tau;
    // Window fraction exp(-s/tau) - exp(-(s+w)/tau) with s = T - load time.
    TrapState state;
    state.interface_population = 0.5;
    const double T = det.gate_period_ps();
    const double want = 0.4;
    // Solve exp(-s/tau) (1 - exp(-w/tau)) = 0.4 for s.
    const double s = -tau * std::log(want / (1.0 - std::exp(-w / tau)));
    state.load_time_ps = T - s;
    ASSERT_GE(state.load_time_ps, 0.0);
    EXPECT_NEAR(delayed_click_probability(det, state, Environment{}, 1), 0.164729788588728, 1e-12);
}

TEST(DelayedClick, NonIncreasingInOffset) {
    const DetectorParams det = testing_util::default_detector();
    for (double d : {5.0, 100.0, 175.0, 181.0, 600.0, 999.0}) {
        for (double mu : {0.1, 10.0, 80.0}) {
            const TrapState state = trap_loading(det, {mu, d});
            double previous = 1.0;
            for (std::uint32_t k = 1; k <= 6; ++k) {
                const double p = delayed_click_probability(det, state, Environment{}, k);
                EXPECT_LE(p, previous);
                previous = p;
            }
        }
    }
}

TEST(DelayedClick, RejectsOffsetZero) {
    const DetectorParams det = testing_util::default_detector();
    EXPECT_THROW(delayed_click_probability(det, TrapState{}, Environment{}, 0), std::invalid_argument);
}

TEST(DelayedClick, SingleSpeciesDecayMatchesLifetime) {
    DetectorParams det = testing_util::simple_detector();
    det.interface_trap.activation_energy_ev = 0.035;
    det.interface_trap.lifetime_prefactor_ps = 60.0;
    const Environment env{260.0};
    const TrapState state{0.3, 0.0, 20.0};
    const double tau = trap_lifetime(det.interface_trap, env);
    // Expected carriers per gate fit one exponential in the gate index.
    std::vector<double> x, y;
    for (std::uint32_t k = 1; k <= 5; ++k) {
        x.push_back(k * det.gate_period_ps());
        y.push_back(std::log(delayed_trigger_mean(det, state, env, k)));
    }
    const double slope = (y.back() - y.front()) / (x.back() - x.front());
    EXPECT_NEAR(-1.0 / slope, tau, 0.01 * tau);
    for (std::size_t i = 1; i < x.size(); ++i) {
        EXPECT_NEAR((y[i] - y[i - 1]) / (x[i] - x[i - 1]), slope, 1e-12);
    }
}

TEST(DefaultCalibration, InterfaceLifetimeIsSubNanosecond) {
    const DetectorParams det = testing_util::default_detector();
    const double tau = trap_lifetime(det.interface_trap, Environment{293.15});
    EXPECT_GT(tau, 100.0);
    EXPECT_LT(tau, 1000.0);
    EXPECT_GT(trap_lifetime(det.multiplication_trap, Environment{293.15}), tau);
}

TEST(DetectorParams, ValidationCatchesBadFields) {
    DetectorParams det = testing_util::simple_detector();
    det.detection_efficiency = 1.2;
    EXPECT_THROW(det.validate(), std::invalid_argument);
    det = testing_util::simple_detector();
    det.dark_count_prob = 1.0;
    EXPECT_THROW(det.validate(), std::invalid_argument);
    det = testing_util::simple_detector();
    det.interface_trap.capture_per_avalanche_charge = 0.1;
    EXPECT_THROW(det.validate(), std::invalid_argument);
    det = testing_util::simple_detector();
    det.multiplication_trap.capture_fraction_photo = 0.1;
    EXPECT_THROW(det.validate(), std::invalid_argument);
    det = testing_util::simple_detector();
    det.gain.floor = 0.0;
    EXPECT_THROW(det.validate(), std::invalid_argument);
}
