// core/ops.h

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

#ifndef MPSS_CORE_OPS_H_
#define MPSS_CORE_OPS_H_

#include <cstdint>
#include <vector>

#include "core/tensor.h"

namespace mpss {
namespace core {

// Elementwise (shapes must match exactly; no implicit broadcasting).
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);

// 2-D linear algebra.
Tensor Matmul(const Tensor& a, const Tensor& b);    // (m,k)x(k,n) -> (m,n)
Tensor MatmulNT(const Tensor& a, const Tensor& b);  // (m,k)x(n,k)^T -> (m,n)
Tensor Transpose(const Tensor& a);

// Views as copies; gradients scatter back into the source.
Tensor SliceRows(const Tensor& a, int64_t start, int64_t len);
Tensor SliceCols(const Tensor& a, int64_t start, int64_t len);
Tensor ConcatRows(const std::vector<Tensor>& parts);
Tensor ConcatCols(const std::vector<Tensor>& parts);

// Nonlinearities.
Tensor Relu(const Tensor& a);
Tensor Gelu(const Tensor& a);  // exact erf form
Tensor TanhT(const Tensor& a);
Tensor SigmoidT(const Tensor& a);

// Row-wise normalizations over the last dimension of a 2-D tensor.
Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 double eps = 1e-5);
Tensor SoftmaxRows(const Tensor& x);
Tensor LogSoftmaxRows(const Tensor& x);

// (T,d) + (d,) with the bias added to every row.
Tensor AddRowBroadcast(const Tensor& x, const Tensor& bias);

/// Row gather: out[i] = table[ids[i]], ids in [0, table.rows()).
Tensor EmbeddingRows(const Tensor& table, const std::vector<int64_t>& ids);

Tensor SumAll(const Tensor& a);
Tensor MeanAll(const Tensor& a);

/// x scaled by the idx-th entry of vector w (gradient flows into both).
Tensor ScaleByEntry(const Tensor& x, const Tensor& w, int64_t idx);

/// Mean negative log-likelihood over selected rows:
///   -(1/|idx|) * sum_{t in idx} log_post[t, targets[t]]
/// The cross-entropy gather at the end of every classification path.
Tensor MaskedNll(const Tensor& log_post, const std::vector<int64_t>& targets,
                 const std::vector<int64_t>& indices);

/// 1-D strided convolution. x is (T_in, C_in), w is (C_out, k, C_in),
/// b is (C_out,). Output (T_out, C_out) with T_out = (T_in - k)/stride + 1.
Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
              int64_t stride);

/// Rows where mask[t] != 0 are replaced by `row` (shape (d,)); other rows
/// pass through. Gradient reaches `row` only through replaced rows.
Tensor RowsReplace(const Tensor& x, const std::vector<uint8_t>& mask,
                   const Tensor& row);

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_OPS_H_
