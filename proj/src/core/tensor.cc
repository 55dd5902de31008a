// core/tensor.cc

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

#include "core/tensor.h"

#include <algorithm>
#include <atomic>
#include <sstream>

namespace mpss {
namespace core {

namespace {
std::atomic<uint64_t> g_next_node_id{1};
}  // namespace

uint64_t NextNodeId() {
  return g_next_node_id.fetch_add(1, std::memory_order_relaxed);
}

int64_t ShapeNumel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw Error("negative dimension in shape " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

std::string ShapeToString(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor Tensor::Zeros(const std::vector<int64_t>& shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value.assign(static_cast<size_t>(ShapeNumel(shape)), 0.0);
  node->requires_grad = requires_grad;
  node->id = NextNodeId();
  return Tensor(std::move(node));
}

Tensor Tensor::FromValues(const std::vector<int64_t>& shape,
                          std::vector<double> values, bool requires_grad) {
  if (ShapeNumel(shape) != static_cast<int64_t>(values.size())) {
    throw Error("FromValues: shape " + ShapeToString(shape) + " expects " +
                std::to_string(ShapeNumel(shape)) + " values, got " +
                std::to_string(values.size()));
  }
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->id = NextNodeId();
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(double v, bool requires_grad) {
  return FromValues({}, {v}, requires_grad);
}

const std::vector<int64_t>& Tensor::shape() const {
  if (!node_) throw Error("shape() on undefined tensor");
  return node_->shape;
}

int64_t Tensor::numel() const {
  if (!node_) throw Error("numel() on undefined tensor");
  return static_cast<int64_t>(node_->value.size());
}

int64_t Tensor::dim(int i) const {
  const auto& s = shape();
  if (i < 0 || i >= static_cast<int>(s.size()))
    throw Error("dim index out of range");
  return s[i];
}

int64_t Tensor::rows() const {
  if (shape().size() != 2) throw Error("rows(): tensor is not 2-D");
  return shape()[0];
}

int64_t Tensor::cols() const {
  if (shape().size() != 2) throw Error("cols(): tensor is not 2-D");
  return shape()[1];
}

const std::vector<double>& Tensor::values() const {
  if (!node_) throw Error("values() on undefined tensor");
  return node_->value;
}

std::vector<double>& Tensor::mutable_values() {
  if (!node_) throw Error("mutable_values() on undefined tensor");
  return node_->value;
}

const std::vector<double>& Tensor::grad() const {
  if (!node_) throw Error("grad() on undefined tensor");
  return node_->grad;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

double Tensor::item() const {
  if (!node_ || node_->value.size() != 1)
    throw Error("item(): tensor is not scalar");
  return node_->value[0];
}

void Backward(const Tensor& root) {
  if (!root.defined()) throw Error("Backward: undefined root");
  if (root.numel() != 1) {
    throw Error("Backward: root must be scalar, got shape " +
                ShapeToString(root.shape()));
  }

  // Collect reachable nodes. Children always carry larger ids than their
  // parents (graphs are append-only), so descending id is a topological order
  // with every consumer processed before its producers.
  std::vector<Node*> reach;
  {
    std::vector<Node*> stack{root.node().get()};
    // Visited is tracked via grad.capacity trick-free: use a local set keyed
    // by pointer. Graphs are small enough that a sorted vector would also do.
    std::vector<Node*> seen;
    auto mark = [&seen](Node* n) {
      auto it = std::lower_bound(seen.begin(), seen.end(), n);
      if (it != seen.end() && *it == n) return false;
      seen.insert(it, n);
      return true;
    };
    mark(root.node().get());
    while (!stack.empty()) {
      Node* n = stack.back();
      stack.pop_back();
      reach.push_back(n);
      for (const auto& p : n->parents) {
        if (mark(p.get())) stack.push_back(p.get());
      }
    }
  }
  std::sort(reach.begin(), reach.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  for (Node* n : reach) {
    if (n->requires_grad) {
      n->grad.assign(n->value.size(), 0.0);
    } else {
      n->grad.clear();
    }
  }
  Node* r = root.node().get();
  if (!r->requires_grad) {
    // Constant root: every parameter is unreachable, nothing to accumulate.
    return;
  }
  r->grad.assign(1, 1.0);

  for (Node* n : reach) {
    if (n->requires_grad && n->backward) n->backward(*n);
  }
}

std::map<std::string, std::vector<double>> Gradients(
    const Tensor& root, const std::map<std::string, Tensor>& params) {
  Backward(root);
  std::map<std::string, std::vector<double>> grads;
  for (const auto& [name, p] : params) {
    if (p.grad().empty()) {
      grads[name].assign(static_cast<size_t>(p.numel()), 0.0);
    } else {
      grads[name] = p.grad();
    }
  }
  return grads;
}

}  // namespace core
}  // namespace mpss
