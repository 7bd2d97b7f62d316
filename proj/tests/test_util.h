// Copyright 2026 The Hydra Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYDRA_TESTS_TEST_UTIL_H_
#define HYDRA_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hydra/error.h"
#include "hydra/model.h"
#include "hydra/numerics/tensor.h"

namespace hydra::testing {

// Runs f and returns the error code it throws, or nullopt.
template <typename F>
std::optional<ErrorCode> CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline numerics::Tensor<double> RandomTensor(numerics::Shape shape, std::mt19937_64& rng,
                                             double scale = 1.0) {
  numerics::Tensor<double> t(std::move(shape));
  std::normal_distribution<double> normal(0.0, scale);
  for (double& x : t.mutable_data()) x = normal(rng);
  return t;
}

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
// gradient is ~0 from dividing round-off by round-off.
inline double RelativeError(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradientReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

// Compares parameter.grad (already filled by the caller) with finite
// differences of `loss` for up to per_tensor random entries of every
// parameter.
inline GradientReport CompareWithFiniteDifferences(
    std::vector<numerics::Parameter<double>>& params,
    const std::function<double()>& loss, std::size_t per_tensor,
    std::uint64_t seed, double eps = 1e-3) {
  GradientReport report;
  std::mt19937_64 rng(seed);
  for (auto& p : params) {
    const std::size_t n = p.value.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n, per_tensor));
    for (std::size_t i : idx) {
      const double original = p.value[i];
      auto at = [&](double offset) {
        p.value[i] = original + offset;
        return loss();
      };
      // Five-point stencil: truncation error O(eps^4).
      const double numeric =
          (-at(2 * eps) + 8 * at(eps) - 8 * at(-eps) + at(-2 * eps)) / (12 * eps);
      p.value[i] = original;
      const double err = RelativeError(p.grad[i], numeric);
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = p.name + "[" + std::to_string(i) + "] analytic " +
                       std::to_string(p.grad[i]) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return report;
}

}  // namespace hydra::testing

#endif  // HYDRA_TESTS_TEST_UTIL_H_
