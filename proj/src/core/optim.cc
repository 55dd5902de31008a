// core/optim.cc

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

#include "core/optim.h"

#include <cmath>

namespace mpss {
namespace core {

Tensor ParamStore::Create(const std::string& name,
                          const std::vector<int64_t>& shape,
                          std::vector<double> values) {
  Tensor t = Tensor::FromValues(shape, std::move(values), /*requires_grad=*/true);
  Adopt(name, t);
  return t;
}

void ParamStore::Adopt(const std::string& name, const Tensor& t) {
  if (params_.count(name)) throw Error("parameter '" + name + "' already exists");
  if (!t.requires_grad()) throw Error("parameter '" + name + "' must require grad");
  params_[name] = t;
  Moments mo;
  mo.m.assign(static_cast<size_t>(t.numel()), 0.0);
  mo.v.assign(static_cast<size_t>(t.numel()), 0.0);
  moments_[name] = std::move(mo);
}

bool ParamStore::Has(const std::string& name) const {
  return params_.count(name) != 0;
}

Tensor ParamStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Moments& ParamStore::moments(const std::string& name) const {
  auto it = moments_.find(name);
  if (it == moments_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

int64_t ParamStore::TotalParameters() const {
  int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

void AdamStep(ParamStore& store,
              const std::map<std::string, std::vector<double>>& grads,
              double lr, double beta1, double beta2, double eps) {
  if (lr < 0) throw Error("adam: negative learning rate");
  for (const auto& [name, g] : grads) {
    if (!store.params_.count(name))
      throw Error("adam: gradient for unknown parameter '" + name + "'");
  }
  store.step_count_ += 1;
  const double t = static_cast<double>(store.step_count_);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, param] : store.params_) {
    auto git = grads.find(name);
    if (git == grads.end())
      throw Error("adam: missing gradient for parameter '" + name + "'");
    const std::vector<double>& g = git->second;
    auto& mo = store.moments_[name];
    auto& value = param.mutable_values();
    if (g.size() != value.size())
      throw Error("adam: gradient size mismatch for '" + name + "'");
    for (size_t i = 0; i < value.size(); ++i) {
      mo.m[i] = beta1 * mo.m[i] + (1.0 - beta1) * g[i];
      mo.v[i] = beta2 * mo.v[i] + (1.0 - beta2) * g[i] * g[i];
      const double mhat = mo.m[i] / bc1;
      const double vhat = mo.v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      if (!std::isfinite(value[i]))
        throw Error("adam: non-finite parameter value in '" + name + "'");
    }
  }
}

LrSchedule::LrSchedule(double peak, int64_t warmup, int64_t total)
    : peak_lr(peak), warmup_steps(warmup), total_steps(total) {
  if (peak <= 0) throw Error("lr schedule: peak_lr must be positive");
  if (warmup <= 0) throw Error("lr schedule: warmup_steps must be positive");
  if (total <= warmup)
    throw Error("lr schedule: total_steps must exceed warmup_steps");
}

double LrAt(const LrSchedule& schedule, int64_t step) {
  if (step < 0 || step > schedule.total_steps) {
    throw Error("lr schedule: step " + std::to_string(step) +
                " outside [0, " + std::to_string(schedule.total_steps) + "]");
  }
  if (step <= schedule.warmup_steps) {
    return schedule.peak_lr * static_cast<double>(step) /
           static_cast<double>(schedule.warmup_steps);
  }
  return schedule.peak_lr *
         static_cast<double>(schedule.total_steps - step) /
         static_cast<double>(schedule.total_steps - schedule.warmup_steps);
}

}  // namespace core
}  // namespace mpss
