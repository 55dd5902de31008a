// core/fdcheck.h

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

#ifndef MPSS_CORE_FDCHECK_H_
#define MPSS_CORE_FDCHECK_H_

#include <cstdint>
#include <functional>

#include "core/optim.h"
#include "core/tensor.h"

namespace mpss {
namespace core {

/// Central-difference verification of reverse-mode gradients.
///
/// `loss_builder` rebuilds the loss graph from the current parameter values
/// and must be deterministic; two initial forward passes are compared and a
/// disagreement is an error. Up to `max_coords` coordinates are sampled
/// across all parameters (seeded), each perturbed by +/- epsilon. Returns
///   max over coordinates of |analytic - cd| / max(|analytic|, |cd|, 1e-8).
double FiniteDiffCheck(const std::function<Tensor()>& loss_builder,
                       ParamStore& params, double epsilon,
                       int max_coords = 50, uint64_t seed = 0);

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_FDCHECK_H_
