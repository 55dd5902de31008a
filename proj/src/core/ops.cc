// core/ops.cc

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

#include "core/ops.h"

#include <cmath>
#include <cstring>

namespace mpss {
namespace core {

namespace {

Tensor MakeNode(std::vector<int64_t> shape, std::vector<double> value,
                std::vector<NodePtr> parents,
                std::function<void(Node&)> backward, const char* op_name) {
  for (double v : value) {
    if (!std::isfinite(v)) {
      throw Error(std::string("non-finite result in op '") + op_name + "'");
    }
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  node->requires_grad = rg;
  node->parents = std::move(parents);
  if (rg) node->backward = std::move(backward);
  node->id = NextNodeId();
  return Tensor(std::move(node));
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(std::string(op) + ": shape mismatch " +
                ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  }
}

void Require2D(const Tensor& a, const char* op) {
  if (a.shape().size() != 2) {
    throw Error(std::string(op) + ": expected 2-D tensor, got " +
                ShapeToString(a.shape()));
  }
}

inline bool WantsGrad(const Node& n, int parent) {
  return n.parents[parent]->requires_grad;
}

inline std::vector<double>& GradOf(Node& n, int parent) {
  return n.parents[parent]->grad;
}

Tensor Elementwise(const Tensor& a, const Tensor& b, const char* name,
                   double (*fwd)(double, double),
                   void (*bwd)(double ga, double av, double bv, double* da,
                               double* db)) {
  RequireSameShape(a, b, name);
  const size_t n = a.values().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = fwd(a.values()[i], b.values()[i]);
  auto backward = [bwd](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    const size_t n2 = self.value.size();
    const bool wa = WantsGrad(self, 0), wb = WantsGrad(self, 1);
    for (size_t i = 0; i < n2; ++i) {
      double da = 0, db = 0;
      bwd(self.grad[i], av[i], bv[i], &da, &db);
      if (wa) GradOf(self, 0)[i] += da;
      if (wb) GradOf(self, 1)[i] += db;
    }
  };
  return MakeNode(a.shape(), std::move(out), {a.node(), b.node()},
                  std::move(backward), name);
}

Tensor Unary(const Tensor& a, const char* name, double (*fwd)(double),
             double (*dfd)(double)) {
  const size_t n = a.values().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = fwd(a.values()[i]);
  auto backward = [dfd](Node& self) {
    if (!WantsGrad(self, 0)) return;
    const auto& av = self.parents[0]->value;
    auto& ga = GradOf(self, 0);
    for (size_t i = 0; i < self.value.size(); ++i) {
      ga[i] += self.grad[i] * dfd(av[i]);
    }
  };
  return MakeNode(a.shape(), std::move(out), {a.node()}, std::move(backward),
                  name);
}

// Row-major (m,k)x(k,n) accumulation, ikj order for locality. C += A*B.
void GemmAcc(const double* a, const double* b, double* c, int64_t m, int64_t k,
             int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A * B^T where A is (m,k), B is (n,k).
void GemmNTAcc(const double* a, const double* b, double* c, int64_t m,
               int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C += A^T * B where A is (k,m), B is (k,n).
void GemmTNAcc(const double* a, const double* b, double* c, int64_t k,
               int64_t m, int64_t n) {
  for (int64_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (int64_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  return Elementwise(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double g, double, double, double* da, double* db) {
        *da = g;
        *db = g;
      });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  return Elementwise(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double g, double, double, double* da, double* db) {
        *da = g;
        *db = -g;
      });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  return Elementwise(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double g, double x, double y, double* da, double* db) {
        *da = g * y;
        *db = g * x;
      });
}

Tensor Scale(const Tensor& a, double c) {
  const size_t n = a.values().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = a.values()[i] * c;
  auto backward = [c](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (size_t i = 0; i < self.value.size(); ++i) ga[i] += self.grad[i] * c;
  };
  return MakeNode(a.shape(), std::move(out), {a.node()}, std::move(backward),
                  "scale");
}

Tensor AddScalar(const Tensor& a, double c) {
  const size_t n = a.values().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = a.values()[i] + c;
  auto backward = [](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (size_t i = 0; i < self.value.size(); ++i) ga[i] += self.grad[i];
  };
  return MakeNode(a.shape(), std::move(out), {a.node()}, std::move(backward),
                  "add_scalar");
}

Tensor Matmul(const Tensor& a, const Tensor& b) {
  Require2D(a, "matmul");
  Require2D(b, "matmul");
  const int64_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw Error("matmul: inner dimensions differ: " +
                ShapeToString(a.shape()) + " x " + ShapeToString(b.shape()));
  }
  std::vector<double> out(static_cast<size_t>(m * n), 0.0);
  GemmAcc(a.values().data(), b.values().data(), out.data(), m, k, n);
  auto backward = [m, k, n](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    if (WantsGrad(self, 0)) {
      // dA = dC * B^T
      GemmNTAcc(self.grad.data(), bv.data(), GradOf(self, 0).data(), m, n, k);
    }
    if (WantsGrad(self, 1)) {
      // dB = A^T * dC
      GemmTNAcc(av.data(), self.grad.data(), GradOf(self, 1).data(), m, k, n);
    }
  };
  return MakeNode({m, n}, std::move(out), {a.node(), b.node()},
                  std::move(backward), "matmul");
}

Tensor MatmulNT(const Tensor& a, const Tensor& b) {
  Require2D(a, "matmul_nt");
  Require2D(b, "matmul_nt");
  const int64_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw Error("matmul_nt: inner dimensions differ: " +
                ShapeToString(a.shape()) + " x " + ShapeToString(b.shape()) +
                "^T");
  }
  std::vector<double> out(static_cast<size_t>(m * n), 0.0);
  GemmNTAcc(a.values().data(), b.values().data(), out.data(), m, k, n);
  auto backward = [m, k, n](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    // C = A * B^T  =>  dA = dC * B,  dB = dC^T * A
    if (WantsGrad(self, 0)) {
      GemmAcc(self.grad.data(), bv.data(), GradOf(self, 0).data(), m, n, k);
    }
    if (WantsGrad(self, 1)) {
      GemmTNAcc(self.grad.data(), av.data(), GradOf(self, 1).data(), m, n, k);
    }
  };
  return MakeNode({m, n}, std::move(out), {a.node(), b.node()},
                  std::move(backward), "matmul_nt");
}

Tensor Transpose(const Tensor& a) {
  Require2D(a, "transpose");
  const int64_t m = a.rows(), n = a.cols();
  std::vector<double> out(static_cast<size_t>(m * n));
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j)
      out[static_cast<size_t>(j * m + i)] = a.values()[i * n + j];
  auto backward = [m, n](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (int64_t j = 0; j < n; ++j)
      for (int64_t i = 0; i < m; ++i) ga[i * n + j] += self.grad[j * m + i];
  };
  return MakeNode({n, m}, std::move(out), {a.node()}, std::move(backward),
                  "transpose");
}

Tensor SliceRows(const Tensor& a, int64_t start, int64_t len) {
  Require2D(a, "slice_rows");
  const int64_t m = a.rows(), n = a.cols();
  if (start < 0 || len < 0 || start + len > m) {
    throw Error("slice_rows: range [" + std::to_string(start) + ", " +
                std::to_string(start + len) + ") out of " + std::to_string(m) +
                " rows");
  }
  std::vector<double> out(a.values().begin() + start * n,
                          a.values().begin() + (start + len) * n);
  auto backward = [start, n](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    const size_t cnt = self.value.size();
    for (size_t i = 0; i < cnt; ++i) ga[start * n + i] += self.grad[i];
  };
  return MakeNode({len, n}, std::move(out), {a.node()}, std::move(backward),
                  "slice_rows");
}

Tensor SliceCols(const Tensor& a, int64_t start, int64_t len) {
  Require2D(a, "slice_cols");
  const int64_t m = a.rows(), n = a.cols();
  if (start < 0 || len < 0 || start + len > n) {
    throw Error("slice_cols: range [" + std::to_string(start) + ", " +
                std::to_string(start + len) + ") out of " + std::to_string(n) +
                " cols");
  }
  std::vector<double> out(static_cast<size_t>(m * len));
  for (int64_t i = 0; i < m; ++i) {
    std::memcpy(&out[i * len], &a.values()[i * n + start],
                sizeof(double) * static_cast<size_t>(len));
  }
  auto backward = [start, len, m, n](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < len; ++j)
        ga[i * n + start + j] += self.grad[i * len + j];
  };
  return MakeNode({m, len}, std::move(out), {a.node()}, std::move(backward),
                  "slice_cols");
}

Tensor ConcatRows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error("concat_rows: no inputs");
  const int64_t n = parts[0].cols();
  int64_t m = 0;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    Require2D(p, "concat_rows");
    if (p.cols() != n) throw Error("concat_rows: column counts differ");
    m += p.rows();
    parents.push_back(p.node());
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m * n));
  for (const auto& p : parts)
    out.insert(out.end(), p.values().begin(), p.values().end());
  auto backward = [](Node& self) {
    size_t off = 0;
    for (size_t pi = 0; pi < self.parents.size(); ++pi) {
      const size_t cnt = self.parents[pi]->value.size();
      if (self.parents[pi]->requires_grad) {
        auto& g = self.parents[pi]->grad;
        for (size_t i = 0; i < cnt; ++i) g[i] += self.grad[off + i];
      }
      off += cnt;
    }
  };
  return MakeNode({m, n}, std::move(out), std::move(parents),
                  std::move(backward), "concat_rows");
}

Tensor ConcatCols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  const int64_t m = parts[0].rows();
  int64_t n = 0;
  std::vector<NodePtr> parents;
  std::vector<int64_t> widths;
  for (const auto& p : parts) {
    Require2D(p, "concat_cols");
    if (p.rows() != m) throw Error("concat_cols: row counts differ");
    widths.push_back(p.cols());
    n += p.cols();
    parents.push_back(p.node());
  }
  std::vector<double> out(static_cast<size_t>(m * n));
  int64_t col = 0;
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    const int64_t w = widths[pi];
    for (int64_t i = 0; i < m; ++i) {
      std::memcpy(&out[i * n + col], &parts[pi].values()[i * w],
                  sizeof(double) * static_cast<size_t>(w));
    }
    col += w;
  }
  auto backward = [m, n, widths](Node& self) {
    int64_t col2 = 0;
    for (size_t pi = 0; pi < self.parents.size(); ++pi) {
      const int64_t w = widths[pi];
      if (self.parents[pi]->requires_grad) {
        auto& g = self.parents[pi]->grad;
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < w; ++j)
            g[i * w + j] += self.grad[i * n + col2 + j];
      }
      col2 += w;
    }
  };
  return MakeNode({m, n}, std::move(out), std::move(parents),
                  std::move(backward), "concat_cols");
}

Tensor Relu(const Tensor& a) {
  return Unary(
      a, "relu", [](double x) { return x > 0 ? x : 0.0; },
      [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Tensor Gelu(const Tensor& a) {
  return Unary(
      a, "gelu",
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); },
      [](double x) {
        const double phi = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        return phi + x * pdf;
      });
}

Tensor TanhT(const Tensor& a) {
  return Unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Tensor SigmoidT(const Tensor& a) {
  return Unary(
      a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double x) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 - s);
      });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 double eps) {
  Require2D(x, "layer_norm");
  const int64_t m = x.rows(), d = x.cols();
  if (gamma.numel() != d || beta.numel() != d) {
    throw Error("layer_norm: gamma/beta size must equal feature width " +
                std::to_string(d));
  }
  std::vector<double> out(static_cast<size_t>(m * d));
  std::vector<double> inv_std(static_cast<size_t>(m));
  std::vector<double> mean(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) {
    const double* row = &x.values()[i * d];
    double mu = 0;
    for (int64_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0;
    for (int64_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    mean[i] = mu;
    inv_std[i] = is;
    for (int64_t j = 0; j < d; ++j) {
      out[i * d + j] = (row[j] - mu) * is * gamma.values()[j] + beta.values()[j];
    }
  }
  auto backward = [m, d, mean, inv_std](Node& self) {
    const auto& xv = self.parents[0]->value;
    const auto& gv = self.parents[1]->value;
    const bool wx = WantsGrad(self, 0);
    const bool wg = WantsGrad(self, 1);
    const bool wb = WantsGrad(self, 2);
    for (int64_t i = 0; i < m; ++i) {
      const double* row = &xv[i * d];
      const double* go = &self.grad[i * d];
      const double mu = mean[i], is = inv_std[i];
      double sum_gxh = 0, sum_g = 0;
      for (int64_t j = 0; j < d; ++j) {
        const double xhat = (row[j] - mu) * is;
        const double gxh = go[j] * gv[j];  // dL/dxhat
        sum_gxh += gxh * xhat;
        sum_g += gxh;
        if (wg) GradOf(self, 1)[j] += go[j] * xhat;
        if (wb) GradOf(self, 2)[j] += go[j];
      }
      if (wx) {
        auto& gx = GradOf(self, 0);
        const double dinv = 1.0 / static_cast<double>(d);
        for (int64_t j = 0; j < d; ++j) {
          const double xhat = (row[j] - mu) * is;
          const double gxh = go[j] * gv[j];
          gx[i * d + j] += is * (gxh - dinv * sum_g - dinv * xhat * sum_gxh);
        }
      }
    }
  };
  return MakeNode({m, d}, std::move(out),
                  {x.node(), gamma.node(), beta.node()}, std::move(backward),
                  "layer_norm");
}

Tensor SoftmaxRows(const Tensor& x) {
  Require2D(x, "softmax");
  const int64_t m = x.rows(), d = x.cols();
  std::vector<double> out(static_cast<size_t>(m * d));
  for (int64_t i = 0; i < m; ++i) {
    const double* row = &x.values()[i * d];
    double mx = row[0];
    for (int64_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
    double z = 0;
    for (int64_t j = 0; j < d; ++j) {
      out[i * d + j] = std::exp(row[j] - mx);
      z += out[i * d + j];
    }
    for (int64_t j = 0; j < d; ++j) out[i * d + j] /= z;
  }
  auto backward = [m, d](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& gx = GradOf(self, 0);
    for (int64_t i = 0; i < m; ++i) {
      const double* s = &self.value[i * d];
      const double* go = &self.grad[i * d];
      double dot = 0;
      for (int64_t j = 0; j < d; ++j) dot += go[j] * s[j];
      for (int64_t j = 0; j < d; ++j) gx[i * d + j] += s[j] * (go[j] - dot);
    }
  };
  return MakeNode({m, d}, std::move(out), {x.node()}, std::move(backward),
                  "softmax");
}

Tensor LogSoftmaxRows(const Tensor& x) {
  Require2D(x, "log_softmax");
  const int64_t m = x.rows(), d = x.cols();
  std::vector<double> out(static_cast<size_t>(m * d));
  for (int64_t i = 0; i < m; ++i) {
    const double* row = &x.values()[i * d];
    double mx = row[0];
    for (int64_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
    double z = 0;
    for (int64_t j = 0; j < d; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (int64_t j = 0; j < d; ++j) out[i * d + j] = row[j] - lse;
  }
  auto backward = [m, d](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& gx = GradOf(self, 0);
    for (int64_t i = 0; i < m; ++i) {
      const double* y = &self.value[i * d];
      const double* go = &self.grad[i * d];
      double sum = 0;
      for (int64_t j = 0; j < d; ++j) sum += go[j];
      for (int64_t j = 0; j < d; ++j)
        gx[i * d + j] += go[j] - std::exp(y[j]) * sum;
    }
  };
  return MakeNode({m, d}, std::move(out), {x.node()}, std::move(backward),
                  "log_softmax");
}

Tensor AddRowBroadcast(const Tensor& x, const Tensor& bias) {
  Require2D(x, "add_row_broadcast");
  const int64_t m = x.rows(), d = x.cols();
  if (bias.numel() != d) {
    throw Error("add_row_broadcast: bias size " + std::to_string(bias.numel()) +
                " != row width " + std::to_string(d));
  }
  std::vector<double> out(static_cast<size_t>(m * d));
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < d; ++j)
      out[i * d + j] = x.values()[i * d + j] + bias.values()[j];
  auto backward = [m, d](Node& self) {
    if (WantsGrad(self, 0)) {
      auto& gx = GradOf(self, 0);
      for (size_t i = 0; i < self.value.size(); ++i) gx[i] += self.grad[i];
    }
    if (WantsGrad(self, 1)) {
      auto& gb = GradOf(self, 1);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < d; ++j) gb[j] += self.grad[i * d + j];
    }
  };
  return MakeNode({m, d}, std::move(out), {x.node(), bias.node()},
                  std::move(backward), "add_row_broadcast");
}

Tensor EmbeddingRows(const Tensor& table, const std::vector<int64_t>& ids) {
  Require2D(table, "embedding");
  const int64_t rows = table.rows(), d = table.cols();
  const int64_t n = static_cast<int64_t>(ids.size());
  std::vector<double> out(static_cast<size_t>(n * d));
  for (int64_t i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= rows) {
      throw Error("embedding: id " + std::to_string(ids[i]) +
                  " out of range [0, " + std::to_string(rows) + ")");
    }
    std::memcpy(&out[i * d], &table.values()[ids[i] * d],
                sizeof(double) * static_cast<size_t>(d));
  }
  auto backward = [ids, d](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& gt = GradOf(self, 0);
    for (size_t i = 0; i < ids.size(); ++i)
      for (int64_t j = 0; j < d; ++j)
        gt[ids[i] * d + j] += self.grad[i * d + j];
  };
  return MakeNode({n, d}, std::move(out), {table.node()}, std::move(backward),
                  "embedding");
}

Tensor SumAll(const Tensor& a) {
  double s = 0;
  for (double v : a.values()) s += v;
  auto backward = [](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[0];
  };
  return MakeNode({}, {s}, {a.node()}, std::move(backward), "sum");
}

Tensor MeanAll(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  if (n == 0) throw Error("mean: empty tensor");
  double s = 0;
  for (double v : a.values()) s += v;
  auto backward = [n](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& ga = GradOf(self, 0);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[0] / n;
  };
  return MakeNode({}, {s / n}, {a.node()}, std::move(backward), "mean");
}

Tensor ScaleByEntry(const Tensor& x, const Tensor& w, int64_t idx) {
  if (idx < 0 || idx >= w.numel()) {
    throw Error("scale_by_entry: index out of range");
  }
  const double c = w.values()[static_cast<size_t>(idx)];
  const size_t n = x.values().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = x.values()[i] * c;
  auto backward = [idx, c](Node& self) {
    const auto& xv = self.parents[0]->value;
    if (WantsGrad(self, 0)) {
      auto& gx = GradOf(self, 0);
      for (size_t i = 0; i < self.value.size(); ++i)
        gx[i] += self.grad[i] * c;
    }
    if (WantsGrad(self, 1)) {
      double acc = 0;
      for (size_t i = 0; i < self.value.size(); ++i)
        acc += self.grad[i] * xv[i];
      GradOf(self, 1)[static_cast<size_t>(idx)] += acc;
    }
  };
  return MakeNode(x.shape(), std::move(out), {x.node(), w.node()},
                  std::move(backward), "scale_by_entry");
}

Tensor MaskedNll(const Tensor& log_post, const std::vector<int64_t>& targets,
                 const std::vector<int64_t>& indices) {
  Require2D(log_post, "masked_nll");
  const int64_t t_len = log_post.rows(), vocab = log_post.cols();
  if (static_cast<int64_t>(targets.size()) != t_len) {
    throw Error("masked_nll: target length " + std::to_string(targets.size()) +
                " != posterior rows " + std::to_string(t_len));
  }
  if (indices.empty()) throw Error("masked_nll: empty mask");
  double acc = 0;
  for (int64_t t : indices) {
    if (t < 0 || t >= t_len) throw Error("masked_nll: mask index out of range");
    const int64_t z = targets[static_cast<size_t>(t)];
    if (z < 0 || z >= vocab) {
      throw Error("masked_nll: target id " + std::to_string(z) +
                  " outside vocab " + std::to_string(vocab));
    }
    acc -= log_post.values()[t * vocab + z];
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  auto backward = [targets, indices, vocab, inv](Node& self) {
    if (!WantsGrad(self, 0)) return;
    auto& g = GradOf(self, 0);
    const double go = self.grad[0] * inv;
    for (int64_t t : indices) {
      g[t * vocab + targets[static_cast<size_t>(t)]] -= go;
    }
  };
  return MakeNode({}, {acc * inv}, {log_post.node()}, std::move(backward),
                  "masked_nll");
}

Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
              int64_t stride) {
  Require2D(x, "conv1d");
  if (w.shape().size() != 3) {
    throw Error("conv1d: weight must be (C_out, k, C_in), got " +
                ShapeToString(w.shape()));
  }
  const int64_t t_in = x.rows(), c_in = x.cols();
  const int64_t c_out = w.dim(0), k = w.dim(1);
  if (w.dim(2) != c_in) {
    throw Error("conv1d: weight expects " + std::to_string(w.dim(2)) +
                " input channels, input has " + std::to_string(c_in));
  }
  if (b.numel() != c_out) throw Error("conv1d: bias size != C_out");
  if (stride <= 0) throw Error("conv1d: stride must be positive");
  if (t_in < k) {
    throw Error("conv1d: input length " + std::to_string(t_in) +
                " shorter than kernel " + std::to_string(k));
  }
  const int64_t t_out = (t_in - k) / stride + 1;
  std::vector<double> out(static_cast<size_t>(t_out * c_out));
  const double* xp = x.values().data();
  const double* wp = w.values().data();
  for (int64_t t = 0; t < t_out; ++t) {
    double* orow = &out[t * c_out];
    for (int64_t o = 0; o < c_out; ++o) {
      const double* wo = wp + o * k * c_in;
      double acc = b.values()[o];
      for (int64_t j = 0; j < k; ++j) {
        const double* xr = xp + (t * stride + j) * c_in;
        const double* wr = wo + j * c_in;
        for (int64_t c = 0; c < c_in; ++c) acc += xr[c] * wr[c];
      }
      orow[o] = acc;
    }
  }
  auto backward = [t_out, c_out, c_in, k, stride](Node& self) {
    const auto& xv = self.parents[0]->value;
    const auto& wv = self.parents[1]->value;
    const bool wx = WantsGrad(self, 0);
    const bool ww = WantsGrad(self, 1);
    const bool wb = WantsGrad(self, 2);
    for (int64_t t = 0; t < t_out; ++t) {
      const double* go = &self.grad[t * c_out];
      for (int64_t o = 0; o < c_out; ++o) {
        const double g = go[o];
        if (g == 0.0) continue;
        if (wb) GradOf(self, 2)[o] += g;
        const double* wo = &wv[o * k * c_in];
        for (int64_t j = 0; j < k; ++j) {
          const int64_t row = t * stride + j;
          const double* xr = &xv[row * c_in];
          if (wx) {
            auto& gx = GradOf(self, 0);
            const double* wr = wo + j * c_in;
            for (int64_t c = 0; c < c_in; ++c)
              gx[row * c_in + c] += g * wr[c];
          }
          if (ww) {
            auto& gw = GradOf(self, 1);
            double* gwr = &gw[o * k * c_in + j * c_in];
            for (int64_t c = 0; c < c_in; ++c) gwr[c] += g * xr[c];
          }
        }
      }
    }
  };
  return MakeNode({t_out, c_out}, std::move(out),
                  {x.node(), w.node(), b.node()}, std::move(backward),
                  "conv1d");
}

Tensor RowsReplace(const Tensor& x, const std::vector<uint8_t>& mask,
                   const Tensor& row) {
  Require2D(x, "rows_replace");
  const int64_t m = x.rows(), d = x.cols();
  if (static_cast<int64_t>(mask.size()) != m) {
    throw Error("rows_replace: mask length != row count");
  }
  if (row.numel() != d) {
    throw Error("rows_replace: replacement width " +
                std::to_string(row.numel()) + " != feature width " +
                std::to_string(d));
  }
  std::vector<double> out(static_cast<size_t>(m * d));
  for (int64_t i = 0; i < m; ++i) {
    if (mask[static_cast<size_t>(i)]) {
      std::memcpy(&out[i * d], row.values().data(),
                  sizeof(double) * static_cast<size_t>(d));
    } else {
      std::memcpy(&out[i * d], &x.values()[i * d],
                  sizeof(double) * static_cast<size_t>(d));
    }
  }
  auto backward = [mask, m, d](Node& self) {
    const bool wx = WantsGrad(self, 0);
    const bool wr = WantsGrad(self, 1);
    for (int64_t i = 0; i < m; ++i) {
      if (mask[static_cast<size_t>(i)]) {
        if (wr) {
          auto& gr = GradOf(self, 1);
          for (int64_t j = 0; j < d; ++j) gr[j] += self.grad[i * d + j];
        }
      } else if (wx) {
        auto& gx = GradOf(self, 0);
        for (int64_t j = 0; j < d; ++j)
          gx[i * d + j] += self.grad[i * d + j];
      }
    }
  };
  return MakeNode({m, d}, std::move(out), {x.node(), row.node()},
                  std::move(backward), "rows_replace");
}

}  // namespace core
}  // namespace mpss
