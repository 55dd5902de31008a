// tests/unit/core_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "core/checkpoint.h"
#include "core/fdcheck.h"
#include "core/ops.h"
#include "core/optim.h"
#include "core/rng.h"
#include "core/tensor.h"

using namespace mpss::core;

TEST_CASE("softmax of uniform logits is uniform") {
  Tensor x = Tensor::FromValues({1, 3}, {0, 0, 0});
  Tensor s = SoftmaxRows(x);
  for (int j = 0; j < 3; ++j) CHECK(s.values()[j] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("log_softmax equals x - logsumexp") {
  // logsumexp([0,0]) = ln 2
  Tensor x = Tensor::FromValues({1, 2}, {0, 0});
  Tensor ls = LogSoftmaxRows(x);
  CHECK(ls.values()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(ls.values()[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("softmax rows always normalize") {
  Rng rng = Rng::Keyed(7, {1});
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> vals(24);
    for (auto& v : vals) v = rng.Uniform(-8, 8);
    Tensor s = SoftmaxRows(Tensor::FromValues({4, 6}, vals));
    for (int i = 0; i < 4; ++i) {
      double sum = 0;
      for (int j = 0; j < 6; ++j) {
        double p = s.values()[i * 6 + j];
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        sum += p;
      }
      CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("matmul against identity") {
  Tensor eye = Tensor::FromValues({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor a = Tensor::FromValues({3, 3}, {3, 1, 4, 1, 5, 9, 2, 6, 5});
  Tensor c = Matmul(eye, a);
  for (int i = 0; i < 9; ++i) CHECK(c.values()[i] == a.values()[i]);
}

TEST_CASE("backward of sum(w*w)") {
  ParamStore store;
  Tensor w = store.Create("w", {2}, {1, 2});
  Tensor loss = SumAll(Mul(w, w));
  auto grads = Gradients(loss, store.params());
  CHECK(grads["w"][0] == doctest::Approx(2.0));
  CHECK(grads["w"][1] == doctest::Approx(4.0));
}

TEST_CASE("constant root leaves all gradients zero") {
  ParamStore store;
  store.Create("w", {3}, {1, 2, 3});
  Tensor c = Tensor::Scalar(5.0);
  auto grads = Gradients(c, store.params());
  for (double g : grads["w"]) CHECK(g == 0.0);
}

TEST_CASE("softmax cross-entropy gradient is p minus onehot") {
  ParamStore store;
  Tensor logits = store.Create("logits", {1, 4}, {0.3, -1.2, 0.7, 0.1});
  const int target = 2;
  Tensor lp = LogSoftmaxRows(logits);
  Tensor loss = MaskedNll(lp, {target}, {0});
  auto grads = Gradients(loss, store.params());
  Tensor p = SoftmaxRows(logits);
  for (int j = 0; j < 4; ++j) {
    double expect = p.values()[j] - (j == target ? 1.0 : 0.0);
    CHECK(grads["logits"][j] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("backward is linear over loss sums") {
  ParamStore store;
  Tensor w = store.Create("w", {3}, {0.5, -1.0, 2.0});
  auto loss_a = [&] { return SumAll(Mul(w, w)); };
  auto loss_b = [&] { return SumAll(Gelu(w)); };
  auto ga = Gradients(loss_a(), store.params());
  auto gb = Gradients(loss_b(), store.params());
  auto gsum = Gradients(Add(loss_a(), loss_b()), store.params());
  for (int i = 0; i < 3; ++i) {
    CHECK(std::fabs(gsum["w"][i] - (ga["w"][i] + gb["w"][i])) < 1e-12);
  }
}

TEST_CASE("backward rejects non-scalar roots") {
  Tensor w = Tensor::FromValues({2}, {1, 2}, true);
  CHECK_THROWS_AS(Backward(Mul(w, w)), Error);
}

TEST_CASE("gradients accumulate once through shared subexpressions") {
  ParamStore store;
  Tensor w = store.Create("w", {1}, {3.0});
  Tensor y = Mul(w, w);          // w^2
  Tensor loss = SumAll(Add(y, y));  // 2 w^2, dL/dw = 4w = 12
  auto grads = Gradients(loss, store.params());
  CHECK(grads["w"][0] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("non-finite op results are rejected") {
  Tensor big = Tensor::FromValues({1}, {1e308});
  CHECK_THROWS_AS(Mul(big, big), Error);
}

TEST_CASE("adam first step follows the scalar recurrence") {
  ParamStore store;
  store.Create("p", {1}, {1.0});
  std::map<std::string, std::vector<double>> grads{{"p", {1.0}}};
  const double lr = 0.1;
  AdamStep(store, grads, lr);
  // m_hat = v_hat = 1 after bias correction, so delta = -lr / (1 + eps).
  const double expect = 1.0 - lr / (1.0 + 1e-8);
  CHECK(store.Get("p").values()[0] == doctest::Approx(expect).epsilon(1e-14));
  CHECK(store.step_count() == 1);
}

TEST_CASE("adam with zero lr still advances moments") {
  ParamStore store;
  store.Create("p", {1}, {2.5});
  AdamStep(store, {{"p", {0.7}}}, 0.0);
  CHECK(store.Get("p").values()[0] == 2.5);
  CHECK(store.moments("p").m[0] == doctest::Approx(0.07).epsilon(1e-14));
  CHECK(store.moments("p").v[0] == doctest::Approx(0.02 * 0.49).epsilon(1e-12));
}

TEST_CASE("adam update ignores gradient map insertion order") {
  auto run = [](bool reversed) {
    ParamStore store;
    store.Create("a", {1}, {1.0});
    store.Create("b", {1}, {2.0});
    std::map<std::string, std::vector<double>> grads;
    if (reversed) {
      grads.emplace("b", std::vector<double>{0.2});
      grads.emplace("a", std::vector<double>{0.1});
    } else {
      grads.emplace("a", std::vector<double>{0.1});
      grads.emplace("b", std::vector<double>{0.2});
    }
    AdamStep(store, grads, 1e-3);
    return std::make_pair(store.Get("a").values()[0], store.Get("b").values()[0]);
  };
  auto [a1, b1] = run(false);
  auto [a2, b2] = run(true);
  CHECK(a1 == a2);  // bitwise
  CHECK(b1 == b2);
}

TEST_CASE("adam requires every gradient key") {
  ParamStore store;
  store.Create("a", {1}, {1.0});
  store.Create("b", {1}, {1.0});
  std::map<std::string, std::vector<double>> grads{{"a", {1.0}}};
  CHECK_THROWS_AS(AdamStep(store, grads, 1e-3), Error);
}

TEST_CASE("lr schedule endpoints and midpoint") {
  LrSchedule sched(4e-4, 100, 300);
  CHECK(LrAt(sched, 0) == 0.0);
  CHECK(LrAt(sched, 100) == doctest::Approx(4e-4));
  CHECK(LrAt(sched, 200) == doctest::Approx(2e-4));
  CHECK(LrAt(sched, 300) == 0.0);
  CHECK_THROWS_AS(LrAt(sched, 301), Error);
  CHECK_THROWS_AS(LrAt(sched, -1), Error);
}

TEST_CASE("lr schedule is continuous step to step") {
  LrSchedule sched(3e-3, 37, 211);
  const double bound = sched.peak_lr / std::min<int64_t>(37, 211 - 37);
  for (int64_t s = 0; s < 211; ++s) {
    CHECK(std::fabs(LrAt(sched, s + 1) - LrAt(sched, s)) <= bound + 1e-15);
  }
}

TEST_CASE("finite differences on a quadratic are near exact") {
  ParamStore store;
  Tensor w = store.Create("w", {4}, {0.1, -0.4, 0.9, 0.3});
  auto builder = [&] { return SumAll(Mul(w, w)); };
  double err = FiniteDiffCheck(builder, store, 1e-5, 50, 1);
  CHECK(err < 1e-8);
}

TEST_CASE("finite_diff_check validates epsilon") {
  ParamStore store;
  Tensor w = store.Create("w", {1}, {1.0});
  auto builder = [&] { return SumAll(Mul(w, w)); };
  CHECK_THROWS_AS(FiniteDiffCheck(builder, store, 0.0), Error);
}

TEST_CASE("finite differences through a small composite graph") {
  ParamStore store;
  Rng rng = Rng::Keyed(3, {9});
  std::vector<double> wv(12), bv(3), xv(8);
  for (auto& v : wv) v = rng.Uniform(-1, 1);
  for (auto& v : bv) v = rng.Uniform(-1, 1);
  for (auto& v : xv) v = rng.Uniform(-1, 1);
  Tensor w = store.Create("w", {4, 3}, wv);
  Tensor b = store.Create("b", {3}, bv);
  Tensor g = store.Create("ln_g", {3}, {1, 1, 1});
  Tensor be = store.Create("ln_b", {3}, {0, 0, 0});
  Tensor x = Tensor::FromValues({2, 4}, xv);
  auto builder = [&] {
    Tensor h = AddRowBroadcast(Matmul(x, w), b);
    h = LayerNorm(Gelu(h), g, be);
    Tensor lp = LogSoftmaxRows(h);
    return MaskedNll(lp, {2, 0}, {0, 1});
  };
  double err = FiniteDiffCheck(builder, store, 1e-5, 50, 2);
  CHECK(err < 1e-6);
}

TEST_CASE("conv1d output length and gradient") {
  ParamStore store;
  Rng rng = Rng::Keyed(11, {4});
  std::vector<double> wv(2 * 3 * 2), bv(2), xv(9 * 2);
  for (auto& v : wv) v = rng.Uniform(-1, 1);
  for (auto& v : bv) v = rng.Uniform(-1, 1);
  for (auto& v : xv) v = rng.Uniform(-1, 1);
  Tensor w = store.Create("w", {2, 3, 2}, wv);  // (C_out, k, C_in)
  Tensor b = store.Create("b", {2}, bv);
  Tensor x = Tensor::FromValues({9, 2}, xv);
  Tensor y = Conv1d(x, w, b, 2);
  CHECK(y.rows() == 4);  // (9 - 3)/2 + 1
  CHECK(y.cols() == 2);
  auto builder = [&] { return MeanAll(TanhT(Conv1d(x, w, b, 2))); };
  CHECK(FiniteDiffCheck(builder, store, 1e-5, 50, 3) < 1e-6);
}

TEST_CASE("slices, concat and transpose round trip") {
  Tensor a = Tensor::FromValues({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor left = SliceCols(a, 0, 2);
  Tensor right = SliceCols(a, 2, 2);
  Tensor back = ConcatCols({left, right});
  CHECK(back.values() == a.values());
  Tensor tt = Transpose(Transpose(a));
  CHECK(tt.values() == a.values());
  Tensor top = SliceRows(a, 0, 1);
  Tensor bottom = SliceRows(a, 1, 1);
  CHECK(ConcatRows({top, bottom}).values() == a.values());
}

TEST_CASE("embedding rows gather and scatter gradients") {
  ParamStore store;
  Tensor table = store.Create("emb", {3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor out = EmbeddingRows(table, {2, 0, 2});
  CHECK(out.values() == std::vector<double>{5, 6, 1, 2, 5, 6});
  auto grads = Gradients(SumAll(out), store.params());
  CHECK(grads["emb"] == std::vector<double>{1, 1, 0, 0, 2, 2});
}

TEST_CASE("rows_replace routes gradients by mask") {
  ParamStore store;
  Tensor x = store.Create("x", {3, 2}, {1, 1, 2, 2, 3, 3});
  Tensor r = store.Create("r", {2}, {10, 20});
  std::vector<uint8_t> mask{0, 1, 0};
  Tensor y = RowsReplace(x, mask, r);
  CHECK(y.values() == std::vector<double>{1, 1, 10, 20, 3, 3});
  auto grads = Gradients(SumAll(y), store.params());
  CHECK(grads["x"] == std::vector<double>{1, 1, 0, 0, 1, 1});
  CHECK(grads["r"] == std::vector<double>{1, 1});
}

TEST_CASE("checkpoint round trips parameters, moments, step and config") {
  namespace fs = std::filesystem;
  ParamStore store;
  store.Create("a.w", {2, 2}, {1.5, -2.25, 0.125, 9.0});
  store.Create("b", {3}, {0.1, 0.2, 0.3});
  AdamStep(store, {{"a.w", {1, 2, 3, 4}}, {"b", {5, 6, 7}}}, 1e-3);
  const std::string path =
      (fs::temp_directory_path() / "mpss_ckpt_test.bin").string();
  SaveCheckpoint(path, store, "k=v\nseed=42\n");

  ParamStore loaded;
  std::string cfg;
  LoadCheckpoint(path, &loaded, &cfg);
  CHECK(cfg == "k=v\nseed=42\n");
  CHECK(loaded.step_count() == 1);
  CHECK(loaded.Get("a.w").values() == store.Get("a.w").values());
  CHECK(loaded.Get("b").values() == store.Get("b").values());
  CHECK(loaded.moments("a.w").m == store.moments("a.w").m);
  CHECK(loaded.moments("a.w").v == store.moments("a.w").v);
  fs::remove(path);
}

TEST_CASE("keyed rng streams are stable and independent of call order") {
  Rng a = Rng::Keyed(42, {1, 2});
  Rng b = Rng::Keyed(42, {1, 3});
  Rng a2 = Rng::Keyed(42, {1, 2});
  CHECK(a.NextU64() == a2.NextU64());
  CHECK(a.NextU64() != b.NextU64());
  Rng u = Rng::Keyed(0, {0});
  for (int i = 0; i < 1000; ++i) {
    double d = u.NextDouble();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}
