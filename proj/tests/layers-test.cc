// tests/layers-test.cc

// Copyright 2026  The SpeechSplit C++ Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "speechsplit/layers.h"

using namespace speechsplit;

namespace {

Matd random_mat(int r, int c, Rng& rng) {
  Matd m(r, c);
  for (auto& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Scalar test loss: weighted sum of the outputs, so dL/dy is the weight
// matrix itself.
struct WeightedSum {
  Matd w;
  double loss(const Matd& y) const {
    double acc = 0.0;
    for (size_t i = 0; i < y.data.size(); ++i) acc += y.data[i] * w.data[i];
    return acc;
  }
};

// Central-difference check of every parameter and the input gradient.
template <typename Forward>
void check_param_gradients(ParamStore<double>& params, Matd& x,
                           const Forward& forward, double tol = 1e-6) {
  Rng rng(1234);
  Matd y0 = forward(x);
  WeightedSum ws{random_mat(y0.rows, y0.cols, rng)};

  ParamStore<double> grads = params.zeros_like();
  Matd dx = forward.backward(x, ws.w, &grads);

  const double h = 1e-5;
  for (size_t ti = 0; ti < params.tensors.size(); ++ti) {
    auto& tensor = params.tensors[ti];
    size_t stride = std::max<size_t>(1, tensor.size() / 25);
    for (size_t j = 0; j < tensor.size(); j += stride) {
      double saved = tensor.v[j];
      tensor.v[j] = saved + h;
      double lp = ws.loss(forward(x));
      tensor.v[j] = saved - h;
      double lm = ws.loss(forward(x));
      tensor.v[j] = saved;
      double numeric = (lp - lm) / (2.0 * h);
      double analytic = grads.tensors[ti].v[j];
      CHECK(std::fabs(numeric - analytic) <=
            tol * std::max(1.0, std::fabs(numeric) + std::fabs(analytic)));
    }
  }
  size_t stride = std::max<size_t>(1, x.data.size() / 40);
  for (size_t j = 0; j < x.data.size(); j += stride) {
    double saved = x.data[j];
    x.data[j] = saved + h;
    double lp = ws.loss(forward(x));
    x.data[j] = saved - h;
    double lm = ws.loss(forward(x));
    x.data[j] = saved;
    double numeric = (lp - lm) / (2.0 * h);
    double analytic = dx.data[j];
    CHECK(std::fabs(numeric - analytic) <=
          tol * std::max(1.0, std::fabs(numeric) + std::fabs(analytic)));
  }
}

}  // namespace

TEST_CASE("conv1d matches a direct convolution with replicated edges") {
  Rng rng(5);
  ParamStore<double> params;
  Conv1d<double> conv;
  conv.build(params, "conv", 3, 4, 5, rng);
  Matd x = random_mat(9, 3, rng);
  Matd y = conv.forward(params, x, nullptr);
  REQUIRE(y.rows == 9);
  REQUIRE(y.cols == 4);
  const auto& w = params[conv.w];
  const auto& b = params[conv.b];
  for (int t = 0; t < 9; ++t) {
    for (int o = 0; o < 4; ++o) {
      double acc = b.v[static_cast<size_t>(o)];
      for (int dt = 0; dt < 5; ++dt) {
        int src = std::clamp(t - 2 + dt, 0, 8);
        for (int c = 0; c < 3; ++c)
          acc += w.v[static_cast<size_t>(o) * 15 + dt * 3 + c] * x.at(src, c);
      }
      CHECK(y.at(t, o) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv1d gradients agree with central differences") {
  Rng rng(7);
  ParamStore<double> params;
  Conv1d<double> conv;
  conv.build(params, "conv", 3, 5, 5, rng);
  Matd x = random_mat(11, 3, rng);

  struct F {
    const Conv1d<double>& conv;
    ParamStore<double>& params;
    Matd operator()(const Matd& x) const { return conv.forward(params, x, nullptr); }
    Matd backward(const Matd& x, const Matd& dy, ParamStore<double>* g) const {
      ConvCtx<double> ctx;
      conv.forward(params, x, &ctx);
      return conv.backward(params, dy, ctx, g);
    }
  } f{conv, params};
  check_param_gradients(params, x, f);
}

TEST_CASE("group norm normalizes each frame's groups") {
  Rng rng(11);
  ParamStore<double> params;
  GroupNorm<double> gn;
  gn.build(params, "gn", 8, 2, 1e-5);
  gn.init(params);
  Matd x = random_mat(6, 8, rng);
  GroupNormCtx<double> ctx;
  Matd y = gn.forward(params, x, &ctx);
  for (int t = 0; t < 6; ++t) {
    for (int g = 0; g < 2; ++g) {
      double mean = 0, var = 0;
      for (int c = 0; c < 4; ++c) mean += y.at(t, g * 4 + c);
      mean /= 4;
      for (int c = 0; c < 4; ++c) {
        double d = y.at(t, g * 4 + c) - mean;
        var += d * d;
      }
      var /= 4;
      CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
}

TEST_CASE("group norm survives an all-zero input") {
  ParamStore<double> params;
  GroupNorm<double> gn;
  gn.build(params, "gn", 8, 4, 1e-5);
  gn.init(params);
  Matd x(5, 8);
  Matd y = gn.forward(params, x, nullptr);
  CHECK(y.all_finite());
}

TEST_CASE("group norm gradients agree with central differences") {
  Rng rng(13);
  ParamStore<double> params;
  GroupNorm<double> gn;
  gn.build(params, "gn", 6, 3, 1e-5);
  gn.init(params);
  // Nudge gamma/beta off their init so their gradients are generic.
  for (auto& v : params[gn.gamma].v) v = 1.0 + 0.3 * rng.uniform(-1, 1);
  for (auto& v : params[gn.beta].v) v = 0.2 * rng.uniform(-1, 1);
  Matd x = random_mat(7, 6, rng);

  struct F {
    const GroupNorm<double>& gn;
    ParamStore<double>& params;
    Matd operator()(const Matd& x) const { return gn.forward(params, x, nullptr); }
    Matd backward(const Matd& x, const Matd& dy, ParamStore<double>* g) const {
      GroupNormCtx<double> ctx;
      gn.forward(params, x, &ctx);
      return gn.backward(params, dy, ctx, g);
    }
  } f{gn, params};
  check_param_gradients(params, x, f, 1e-5);
}

TEST_CASE("bilstm forward is deterministic and shaped T x 2H") {
  Rng rng(17);
  ParamStore<double> params;
  BiLstm<double> lstm;
  lstm.build(params, "lstm", 4, 3, rng);
  Matd x = random_mat(9, 4, rng);
  Matd y1 = lstm.forward(params, x, nullptr);
  Matd y2 = lstm.forward(params, x, nullptr);
  REQUIRE(y1.rows == 9);
  REQUIRE(y1.cols == 6);
  CHECK(std::memcmp(y1.data.data(), y2.data.data(),
                    sizeof(double) * y1.size()) == 0);
}

TEST_CASE("bilstm forget bias starts at one") {
  Rng rng(19);
  ParamStore<double> params;
  BiLstm<double> lstm;
  lstm.build(params, "lstm", 2, 4, rng);
  const auto& b = params[lstm.b_f];
  for (int j = 4; j < 8; ++j) CHECK(b.v[static_cast<size_t>(j)] == 1.0);
  for (int j = 0; j < 4; ++j) CHECK(b.v[static_cast<size_t>(j)] == 0.0);
}

TEST_CASE("bilstm gradients agree with central differences") {
  Rng rng(23);
  ParamStore<double> params;
  BiLstm<double> lstm;
  lstm.build(params, "lstm", 3, 2, rng);
  Matd x = random_mat(6, 3, rng);

  struct F {
    const BiLstm<double>& lstm;
    ParamStore<double>& params;
    Matd operator()(const Matd& x) const { return lstm.forward(params, x, nullptr); }
    Matd backward(const Matd& x, const Matd& dy, ParamStore<double>* g) const {
      BiLstmCtx<double> ctx;
      lstm.forward(params, x, &ctx);
      return lstm.backward(params, dy, ctx, g);
    }
  } f{lstm, params};
  check_param_gradients(params, x, f, 1e-5);
}

TEST_CASE("linear gradients agree with central differences") {
  Rng rng(29);
  ParamStore<double> params;
  Linear<double> lin;
  lin.build(params, "lin", 5, 3, rng);
  Matd x = random_mat(7, 5, rng);

  struct F {
    const Linear<double>& lin;
    ParamStore<double>& params;
    Matd operator()(const Matd& x) const { return lin.forward(params, x, nullptr); }
    Matd backward(const Matd& x, const Matd& dy, ParamStore<double>* g) const {
      LinearCtx<double> ctx;
      lin.forward(params, x, &ctx);
      return lin.backward(params, dy, ctx, g);
    }
  } f{lin, params};
  check_param_gradients(params, x, f);
}

TEST_CASE("relu and its backward mask") {
  Matd x(1, 4);
  x.data = {-1.0, 0.0, 2.0, -0.5};
  Matd y = relu(x);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0, 0.0});
  Matd dy(1, 4);
  dy.data = {1.0, 1.0, 1.0, 1.0};
  Matd dx = relu_backward(dy, y);
  CHECK(dx.data == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("param store cast and accumulate") {
  ParamStore<float> store;
  int a = store.add("a", {2, 2});
  store[a].v = {1.0f, 2.0f, 3.0f, 4.0f};
  ParamStore<double> d = store.cast<double>();
  CHECK(d[0].v[3] == 4.0);
  ParamStore<float> z = store.zeros_like();
  CHECK(z.total_params() == 4);
  z.accumulate(store);
  z.accumulate(store);
  CHECK(z[0].v[0] == 2.0f);
}
