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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aftergate/errors.hpp"

namespace aftergate {

inline constexpr const char *kHistogramCsvHeader = "gate_index,counts,trials,probability";

/// Per-gate click totals over a window of consecutive gates. Monte Carlo
/// histograms hold integer counts; analytic histograms hold probabilities
/// with `trials == 1`.
struct GateHistogram {
    std::vector<double> counts;
    std::uint64_t trials = 1;
    double gate_period_ps = 1000.0;
    std::optional<double> background;

    std::size_t size() const { return counts.size(); }

    double probability(std::size_t gate) const { return counts.at(gate) / static_cast<double>(trials); }

    std::vector<double> probabilities() const {
        std::vector<double> out(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            out[i] = probability(i);
        }
        return out;
    }

    void validate() const {
        detail::require(trials >= 1, "histogram: trials must be >= 1");
        detail::require(gate_period_ps > 0.0, "histogram: gate period must be positive");
        for (double c : counts) {
            detail::require(std::isfinite(c) && c >= 0.0 && c <= static_cast<double>(trials),
                            "histogram: counts must lie in [0, trials]");
        }
        if (background) {
            detail::require(*background >= 0.0, "histogram: background must be >= 0");
        }
    }
};

/// Shortest round-trip decimal representation; keeps CSV output stable
/// across runs and platforms.
inline std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buffer[40];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value) {
            break;
        }
    }
    return buffer;
}

inline void write_histogram_csv(std::ostream &out, const GateHistogram &hist) {
    out << kHistogramCsvHeader << '\n';
    for (std::size_t i = 0; i < hist.size(); ++i) {
        out << i << ',' << format_number(hist.counts[i]) << ',' << hist.trials << ','
            << format_number(hist.probability(i)) << '\n';
    }
}

/// Reads the format written by write_histogram_csv. Gate indices must run
/// 0, 1, 2, ... and all rows must share one trial count.
inline GateHistogram read_histogram_csv(std::istream &in, double gate_period_ps) {
    std::string line;
    if (!std::getline(in, line) || line != kHistogramCsvHeader) {
        throw ConfigError("histogram csv: expected header '" + std::string(kHistogramCsvHeader) + "'");
    }
    GateHistogram hist;
    hist.gate_period_ps = gate_period_ps;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string index, counts, trials, probability;
        if (!std::getline(fields, index, ',') || !std::getline(fields, counts, ',') ||
            !std::getline(fields, trials, ',') || !std::getline(fields, probability)) {
            throw ConfigError("histogram csv: malformed row " + std::to_string(row + 1));
        }
        try {
            if (std::stoull(index) != row) {
                throw ConfigError("histogram csv: gate indices must be consecutive from 0");
            }
            const auto n = std::stoull(trials);
            if (row == 0) {
                hist.trials = n;
            } else if (n != hist.trials) {
                throw ConfigError("histogram csv: inconsistent trial counts");
            }
            hist.counts.push_back(std::stod(counts));
        } catch (const std::logic_error &) {
            throw ConfigError("histogram csv: malformed row " + std::to_string(row + 1));
        }
        ++row;
    }
    hist.validate();
    return hist;
}

}  // namespace aftergate
