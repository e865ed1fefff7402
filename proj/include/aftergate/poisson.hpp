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
#include <cstdint>

#include <boost/math/special_functions/gamma.hpp>

namespace aftergate {

/// P[N >= threshold] for N ~ Poisson(mean).
inline double poisson_upper_tail(std::uint32_t threshold, double mean) {
    if (threshold == 0) {
        return 1.0;
    }
    if (mean <= 0.0) {
        return 0.0;
    }
    if (threshold == 1) {
        return -std::expm1(-mean);
    }
    // Regularized lower incomplete gamma: P(a, x) = P[Poisson(x) >= a].
    return boost::math::gamma_p(static_cast<double>(threshold), mean);
}

}  // namespace aftergate
