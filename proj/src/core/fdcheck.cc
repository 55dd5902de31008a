// core/fdcheck.cc

// Copyright 2026  MPSS Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/fdcheck.h"

#include <algorithm>
#include <cmath>

#include "core/rng.h"

namespace mpss {
namespace core {

double FiniteDiffCheck(const std::function<Tensor()>& loss_builder,
                       ParamStore& params, double epsilon, int max_coords,
                       uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw Error("finite_diff_check: epsilon must lie in [1e-7, 1e-3]");
  }
  const double v1 = loss_builder().item();
  const double v2 = loss_builder().item();
  if (v1 != v2) {
    throw Error("finite_diff_check: loss function is not deterministic (" +
                std::to_string(v1) + " vs " + std::to_string(v2) + ")");
  }

  auto grads = Gradients(loss_builder(), params.params());

  // Enumerate (name, coordinate) pairs and sample without replacement.
  std::vector<std::pair<std::string, int64_t>> coords;
  for (const auto& [name, t] : params.params()) {
    for (int64_t i = 0; i < t.numel(); ++i) coords.emplace_back(name, i);
  }
  Rng rng = Rng::Keyed(seed, {0x66646368});  // "fdch"
  std::vector<size_t> order(coords.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.UniformInt(i));
    std::swap(order[i - 1], order[j]);
  }
  const size_t n_check =
      std::min<size_t>(static_cast<size_t>(std::max(max_coords, 0)),
                       coords.size());

  double worst = 0.0;
  for (size_t ci = 0; ci < n_check; ++ci) {
    const auto& [name, idx] = coords[order[ci]];
    Tensor p = params.Get(name);
    double& slot = p.mutable_values()[static_cast<size_t>(idx)];
    const double original = slot;

    slot = original + epsilon;
    const double plus = loss_builder().item();
    slot = original - epsilon;
    const double minus = loss_builder().item();
    slot = original;

    const double cd = (plus - minus) / (2.0 * epsilon);
    const double analytic = grads[name][static_cast<size_t>(idx)];
    const double denom =
        std::max({std::fabs(analytic), std::fabs(cd), 1e-8});
    worst = std::max(worst, std::fabs(analytic - cd) / denom);
  }
  return worst;
}

}  // namespace core
}  // namespace mpss
