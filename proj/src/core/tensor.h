// core/tensor.h

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

#ifndef MPSS_CORE_TENSOR_H_
#define MPSS_CORE_TENSOR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpss {
namespace core {

/// Error type thrown by every module in this library. The C API maps it to a
/// status code; nothing else is ever thrown on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Dense double tensor with reverse-mode differentiation. A Tensor is a
/// value-semantic handle to a graph node; operations in ops.h record parents
/// and a backward closure on the result node. Graphs are rebuilt per forward
/// pass (dynamic tape) and freed when the last handle drops.
///
/// Values must be finite after every operation; ops check and throw Error on
/// NaN/Inf. One graph is confined to one thread; disjoint graphs may run
/// concurrently.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(const std::vector<int64_t>& shape,
                      bool requires_grad = false);
  static Tensor FromValues(const std::vector<int64_t>& shape,
                           std::vector<double> values,
                           bool requires_grad = false);
  static Tensor Scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int64_t>& shape() const;
  int64_t numel() const;
  int64_t dim(int i) const;
  /// Rows/cols of a 2-D tensor (throws otherwise).
  int64_t rows() const;
  int64_t cols() const;

  const std::vector<double>& values() const;
  std::vector<double>& mutable_values();
  /// Gradient accumulated by the last Backward() pass (empty if none).
  const std::vector<double>& grad() const;

  bool requires_grad() const;
  double item() const;  // scalar tensors only

  NodePtr node() const { return node_; }
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

struct Node {
  std::vector<int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated by Backward, same length as value
  bool requires_grad = false;
  uint64_t id = 0;  // creation order; descending id is a valid backward order
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;  // may be empty for leaves
};

/// Runs reverse-mode differentiation from a scalar root. Gradients of every
/// reachable grad-requiring node are (re)computed from scratch: each call
/// zero-initializes, seeds d(root)/d(root)=1 and accumulates exactly once per
/// node. Unreachable leaves keep an empty grad (callers treat that as zero).
void Backward(const Tensor& root);

/// Gradient of `root` w.r.t. each named parameter. Parameters not reachable
/// from the root get an all-zero gradient of matching shape.
std::map<std::string, std::vector<double>> Gradients(
    const Tensor& root, const std::map<std::string, Tensor>& params);

int64_t ShapeNumel(const std::vector<int64_t>& shape);
std::string ShapeToString(const std::vector<int64_t>& shape);

/// Next graph node id. Ids are globally monotone, so a node always outranks
/// the parents it was built from; Backward relies on that ordering.
uint64_t NextNodeId();

}  // namespace core
}  // namespace mpss

#endif  // MPSS_CORE_TENSOR_H_
