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


#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "aftergate/config.hpp"
#include "test_util.hpp"

using namespace aftergate;

namespace {

const char *kMinimal = R"(
[detector]
gating_frequency_hz = 1e9
gate_width_ps = 400   # inline comment
[traps.interface]
activation_energy_ev = 0.03
lifetime_prefactor_ps = 50
[traps.multiplication]
lifetime_prefactor_ps = 10
; another comment style
[environment]
temperature_k = 250
)";

IniDocument doc_from(const std::string &text) {
    std::istringstream in(text);
    return parse_ini(in);
}

}  // namespace

TEST(Config, ParsesMinimalDocumentWithDefaults) {
    const RunConfig cfg = parse_run_config(doc_from(kMinimal));
    EXPECT_DOUBLE_EQ(cfg.detector.gate_width_ps(), 400.0);
    EXPECT_DOUBLE_EQ(cfg.detector.interface_trap.lifetime_prefactor_ps, 50.0);
    EXPECT_DOUBLE_EQ(cfg.environment.temperature_k, 250.0);
    EXPECT_DOUBLE_EQ(cfg.scenario.env.temperature_k, 250.0);
    EXPECT_EQ(cfg.scenario.flux_full, 2.0 * cfg.scenario.flux_half);
    EXPECT_EQ(cfg.trials, 100000u);
    EXPECT_FALSE(cfg.out_dir);
}

TEST(Config, ShippedDefaultsLoad) {
    const RunConfig cfg = testing_util::default_config();
    EXPECT_DOUBLE_EQ(cfg.detector.gate_period_ps(), 1000.0);
    EXPECT_DOUBLE_EQ(cfg.detector.detection_efficiency, 0.28);
    EXPECT_DOUBLE_EQ(cfg.detector.afterpulse_prob, 0.04);
    EXPECT_EQ(cfg.scenario.flux_full, 80.0);
    EXPECT_EQ(cfg.scenario.flux_half, 40.0);
    EXPECT_EQ(cfg.feasibility.temperatures_c, (std::vector<double>{20.0, -50.0}));
    EXPECT_EQ(cfg.feasibility.options.rescale, RescalePolicy::FixedWidth);
    EXPECT_EQ(cfg.qber_threshold, 0.11);
}

TEST(Config, RejectsUnknownKeysAndSections) {
    auto doc = doc_from(kMinimal);
    doc["detector"]["gate_widht_ps"] = "400";
    EXPECT_THROW(parse_run_config(doc), ConfigError);
    doc = doc_from(kMinimal);
    doc["detectors"]["gate_width_ps"] = "400";
    EXPECT_THROW(parse_run_config(doc), ConfigError);
    doc = doc_from(kMinimal);
    doc["traps.interface"]["capture_per_avalanche_charge"] = "0.1";
    EXPECT_THROW(parse_run_config(doc), ConfigError);
}

TEST(Config, RejectsMissingRequiredSection) {
    auto doc = doc_from(kMinimal);
    doc.erase("traps.multiplication");
    EXPECT_THROW(parse_run_config(doc), ConfigError);
}

TEST(Config, RejectsMalformedText) {
    EXPECT_THROW(doc_from("[detector]\ngate_width_ps\n"), ConfigError);
    EXPECT_THROW(doc_from("gate_width_ps = 3\n"), ConfigError);
    EXPECT_THROW(doc_from("[detector\n"), ConfigError);
    EXPECT_THROW(doc_from("[a]\nx = 1\nx = 2\n"), ConfigError);
    EXPECT_THROW(doc_from("[a]\n[a]\n"), ConfigError);
}

TEST(Config, RejectsBadValues) {
    for (const auto &[key, value] : std::vector<std::pair<std::string, std::string>>{
             {"detector.gate_width_ps", "1000"},
             {"detector.gate_width_ps", "4OO"},
             {"detector.gate_width_ps", "nan"},
             {"detector.detection_efficiency", "1.5"},
             {"environment.temperature_k", "-3"},
             {"run.trials", "0"},
             {"run.trials", "-5"},
             {"run.seed", "12abc"},
             {"scenario.flux_half", "100"},
             {"feasibility.rescale", "stretch"},
             {"histogram.pulse_gate", "40"},
         }) {
        auto doc = doc_from(kMinimal);
        apply_override(doc, key + "=" + value);
        EXPECT_THROW(parse_run_config(doc), ConfigError) << key << "=" << value;
    }
}

TEST(Config, OverridesUseLastDotAsSectionSeparator) {
    auto doc = doc_from(kMinimal);
    apply_override(doc, "traps.interface.capture_fraction_photo = 0.25");
    apply_override(doc, "run.seed=7");
    apply_override(doc, "feasibility.temperatures_c=0, -10, -20");
    const RunConfig cfg = parse_run_config(doc);
    EXPECT_DOUBLE_EQ(cfg.detector.interface_trap.capture_fraction_photo, 0.25);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.feasibility.temperatures_c, (std::vector<double>{0.0, -10.0, -20.0}));
    EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
    EXPECT_THROW(apply_override(doc, "nosection=3"), ConfigError);
}

TEST(Config, MissingFileIsConfigError) {
    EXPECT_THROW(load_ini("/nonexistent/aftergate.ini"), ConfigError);
}
