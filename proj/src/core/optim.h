// core/optim.h

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

#ifndef MPSS_CORE_OPTIM_H_
#define MPSS_CORE_OPTIM_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/tensor.h"

namespace mpss {
namespace core {

/// Named parameters plus their Adam state. Parameters are leaf tensors with
/// requires_grad set; AdamStep mutates their values in place, so graphs built
/// afterwards see the updated weights. One shared step counter per store.
class ParamStore {
 public:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };

  /// Registers a parameter (name must be new); returns the stored tensor.
  Tensor Create(const std::string& name, const std::vector<int64_t>& shape,
                std::vector<double> values);
  /// Adopts an existing leaf tensor under `name`.
  void Adopt(const std::string& name, const Tensor& t);

  bool Has(const std::string& name) const;
  Tensor Get(const std::string& name) const;
  const std::map<std::string, Tensor>& params() const { return params_; }
  std::map<std::string, Tensor>& params() { return params_; }
  const Moments& moments(const std::string& name) const;

  int64_t step_count() const { return step_count_; }
  int64_t TotalParameters() const;

  friend void AdamStep(ParamStore& store,
                       const std::map<std::string, std::vector<double>>& grads,
                       double lr, double beta1, double beta2, double eps);
  friend void SaveCheckpoint(const std::string& path, const ParamStore& store,
                             const std::string& config_blob);
  friend void LoadCheckpoint(const std::string& path, ParamStore* store,
                             std::string* config_blob);

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, Moments> moments_;
  int64_t step_count_ = 0;
};

/// One Adam update with bias correction. Betas default to (0.9, 0.98) and
/// eps to 1e-8. Every parameter must have a matching gradient entry; extra
/// gradient keys are an error. lr may be zero (moments still advance).
void AdamStep(ParamStore& store,
              const std::map<std::string, std::vector<double>>& grads,
              double lr, double beta1 = 0.9, double beta2 = 0.98,
              double eps = 1e-8);

/// Piecewise-linear warmup/decay schedule: 0 at step 0, peak at warmup_steps,
/// 0 again at total_steps.
struct LrSchedule {
  double peak_lr = 0;
  int64_t warmup_steps = 0;
  int64_t total_steps = 0;

  LrSchedule() = default;
  LrSchedule(double peak, int64_t warmup, int64_t total);
};

double LrAt(const LrSchedule& schedule, int64_t step);

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_OPTIM_H_
