// core/checkpoint.h

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

#ifndef MPSS_CORE_CHECKPOINT_H_
#define MPSS_CORE_CHECKPOINT_H_

#include <string>

#include "core/optim.h"

namespace mpss {
namespace core {

// Checkpoint byte layout (all integers and doubles little-endian):
//   magic    8 bytes "MPSSCKPT"
//   version  u32 (currently 1)
//   flags    u32 (reserved, 0)
//   step     u64 (shared Adam step count)
//   cfg_len  u64, followed by cfg_len bytes of config text (key=value lines)
//   n_params u64
//   for each parameter, in byte order as written (sorted by name):
//     name_len u32, name bytes
//     ndim     u32, ndim x i64 dimension sizes
//     numel x f64 parameter values
//     numel x f64 Adam first moment m
//     numel x f64 Adam second moment v

void SaveCheckpoint(const std::string& path, const ParamStore& store,
                    const std::string& config_blob);

/// Loads into an empty ParamStore; config text (possibly empty) is returned
/// through config_blob when non-null.
void LoadCheckpoint(const std::string& path, ParamStore* store,
                    std::string* config_blob);

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_CHECKPOINT_H_
