// labels/kmeans.h

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

#ifndef MPSS_LABELS_KMEANS_H_
#define MPSS_LABELS_KMEANS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "audio/features.h"

namespace mpss {
namespace labels {

/// k-means codebook over feature rows. feature_meta records what was
/// clustered ("mfcc" or "model-layer-<l>"); the on-disk format carries only
/// the centroid matrix.
struct Codebook {
  int64_t clusters = 0;  // C
  int64_t dim = 0;       // D
  std::vector<double> centroids;  // row-major, C x D
  std::string feature_meta;

  const double* Row(int64_t c) const { return &centroids[c * dim]; }
};

struct KmeansReport {
  int iterations = 0;
  double inertia = 0;                  // final sum of squared distances
  std::vector<double> inertia_trace;   // one entry per Lloyd iteration
  std::vector<int64_t> cluster_sizes;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment
/// reaches a fixpoint or max_iter. Deterministic given the seed. Empty
/// clusters are reseeded to the point farthest from its current centroid.
Codebook KmeansFit(const std::vector<double>& rows, int64_t n_rows,
                   int64_t dim, int64_t clusters, uint64_t seed,
                   int max_iter = 100, KmeansReport* report = nullptr);

/// Frame-wise nearest centroid by squared Euclidean distance; ties break
/// toward the lowest centroid index. Returns ids in [0, C).
std::vector<int64_t> AssignUnits(const audio::FeatureMatrix& features,
                                 const Codebook& codebook);

/// Majority-overlap purity of unit assignments against reference segment
/// ids: sum over clusters of their largest reference-class count, divided by
/// the total frame count.
double ClusterPurity(const std::vector<int64_t>& units,
                     const std::vector<int64_t>& reference);

// Codebook file: u32 C, u32 D header, then C*D little-endian float64.
void SaveCodebook(const std::string& path, const Codebook& cb);
Codebook LoadCodebook(const std::string& path);

}  // namespace labels
}  // namespace mpss

#endif  // MPSS_LABELS_KMEANS_H_
