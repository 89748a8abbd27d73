#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "evlogic/adam.hpp"
#include "evlogic/gradcheck.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/rng.hpp"
#include "evlogic/tensor.hpp"
#include "oracles.hpp"

using namespace evlogic;

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: gumbel of u = 1/e is zero") {
  // -log(-log(1/e)) = -log(1) = 0
  REQUIRE(-std::log(-std::log(1.0 / std::exp(1.0))) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("rng: gumbel sample mean approaches the Euler-Mascheroni constant") {
  Rng rng(42);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.gumbel();
  REQUIRE(sum / n == Catch::Approx(0.5772156649).margin(0.02));
}

TEST_CASE("rng: uniform stays in the open unit interval") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("mlp_forward: zero net maps everything to zero") {
  Mlp net(4, 8, 3);
  const Vec out = mlp_forward(net, Vec(4, 1.5));
  for (double x : out.data) REQUIRE(x == 0.0);
}

TEST_CASE("mlp_forward: single-unit net passes the bias path") {
  // f(x) = w2 * tanh(w1 x + b1) + b2 with w1 = 0: output = w2 tanh(b1) + b2
  Mlp net(1, 1, 1);
  net.b1[0] = 0.7;
  net.w2(0, 0) = 2.0;
  net.b2[0] = 0.25;
  const Vec out = mlp_forward(net, Vec::of({0.0}));
  REQUIRE(out[0] == Catch::Approx(2.0 * std::tanh(0.7) + 0.25).epsilon(1e-12));
}

TEST_CASE("mlp_forward: seed-42 net matches straight-line recomputation") {
  Rng rng(42);
  Mlp net(5, 7, 2);
  net.init(rng, 0.8);
  for (double& b : net.b1.data) b = rng.normal();
  for (double& b : net.b2.data) b = rng.normal();
  std::vector<double> input = {0.3, -1.2, 0.05, 2.0, -0.7};
  const Vec out = mlp_forward(net, Vec::of(input));
  const auto expected = oracles::mlp_by_hand(net, input);
  REQUIRE(out.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("mlp_forward: shape mismatch is rejected") {
  Mlp net(4, 8, 3);
  REQUIRE_THROWS_AS(mlp_forward(net, Vec(5)), std::invalid_argument);
}

TEST_CASE("mlp_backward: zero upstream gives zero gradients") {
  Rng rng(1);
  Mlp net(3, 4, 2);
  net.init(rng, 0.5);
  MlpCache cache;
  mlp_forward(net, Vec::of({0.1, 0.2, 0.3}), &cache);
  MlpGrads grads(net);
  const Vec dinput = mlp_backward(net, cache, Vec(2), grads);
  for (double x : grads.w1.data) REQUIRE(x == 0.0);
  for (double x : grads.w2.data) REQUIRE(x == 0.0);
  for (double x : dinput.data) REQUIRE(x == 0.0);
}

TEST_CASE("mlp_backward: single-weight analytic gradient") {
  // f(w) = tanh(w x): df/dw = (1 - tanh^2(w x)) x, read from w1's slot
  Mlp net(1, 1, 1);
  net.w1(0, 0) = 0.8;
  net.w2(0, 0) = 1.0;
  const double x = 1.7;
  MlpCache cache;
  mlp_forward(net, Vec::of({x}), &cache);
  MlpGrads grads(net);
  mlp_backward(net, cache, Vec::of({1.0}), grads);
  const double t = std::tanh(0.8 * x);
  REQUIRE(grads.w1(0, 0) == Catch::Approx((1.0 - t * t) * x).epsilon(1e-12));
}

TEST_CASE("mlp_backward: every gradient matches central finite differences") {
  Rng rng(11);
  Mlp net(4, 6, 3);
  net.init(rng, 0.6);
  for (double& b : net.b1.data) b = 0.3 * rng.normal();
  Vec input(4);
  for (double& x : input.data) x = rng.normal();
  Vec upstream(3);
  for (double& x : upstream.data) x = rng.normal();

  MlpCache cache;
  mlp_forward(net, input, &cache);
  MlpGrads grads(net);
  mlp_backward(net, cache, upstream, grads);

  std::vector<ParamView> params, analytic;
  net.collect_params("net", params);
  MlpGrads* gp = &grads;
  analytic.push_back(view_of("net.w1", gp->w1));
  analytic.push_back(view_of("net.b1", gp->b1));
  analytic.push_back(view_of("net.w2", gp->w2));
  analytic.push_back(view_of("net.b2", gp->b2));

  auto f = [&]() {
    const Vec out = mlp_forward(net, input);
    return dot(out, upstream);
  };
  const auto report = finite_diff_check(f, params, analytic, 1e-5);
  REQUIRE(report.ok);
  REQUIRE(report.max_rel_error <= 1e-5);
}

TEST_CASE("finite_diff_check: quadratic is exact up to rounding") {
  Vec p = Vec::of({1.3, -0.4});
  Vec g(2);
  std::vector<ParamView> params = {view_of("p", p)};
  auto f = [&]() { return 3.0 * p[0] * p[0] + 0.5 * p[1] * p[1] + p[0] * p[1]; };
  g[0] = 6.0 * p[0] + p[1];
  g[1] = p[1] + p[0];
  std::vector<ParamView> analytic = {view_of("g", g)};
  const auto report = finite_diff_check(f, params, analytic, 1e-3);
  REQUIRE(report.ok);
  REQUIRE(report.max_rel_error <= 1e-6);
}

TEST_CASE("finite_diff_check: constant function reports zero error") {
  Vec p = Vec::of({2.0});
  Vec g(1);  // analytic gradient zero
  std::vector<ParamView> params = {view_of("p", p)};
  std::vector<ParamView> analytic = {view_of("g", g)};
  const auto report = finite_diff_check([]() { return 5.0; }, params, analytic, 1e-5);
  REQUIRE(report.ok);
  REQUIRE(report.max_rel_error == 0.0);
}

TEST_CASE("finite_diff_check: non-finite objective names the parameter") {
  Vec p = Vec::of({0.0});
  Vec g(1);
  std::vector<ParamView> params = {view_of("p", p)};
  std::vector<ParamView> analytic = {view_of("g", g)};
  const auto report =
      finite_diff_check([&]() { return 1.0 / p[0]; }, params, analytic, 1e-5);
  REQUIRE_FALSE(report.ok);
  REQUIRE(report.fault == "p[0]");
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  AdamOpt opt(AdamConfig{});
  Vec p = Vec::of({1.0, -2.0});
  Vec g(2);
  opt.step({view_of("p", p)}, {view_of("g", g)});
  REQUIRE(p[0] == 1.0);
  REQUIRE(p[1] == -2.0);
  REQUIRE(opt.step_count() == 1);
}

TEST_CASE("adam: first step moves by about the learning rate") {
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  AdamOpt opt(cfg);
  Vec p = Vec::of({0.0});
  Vec g = Vec::of({1.0});
  opt.step({view_of("p", p)}, {view_of("g", g)});
  // bias-corrected first step: lr * g / (|g| + eps) ~ lr
  REQUIRE(std::fabs(p[0] + cfg.learning_rate) <= 1e-6);
}

TEST_CASE("adam: identical parameters with identical gradients stay identical") {
  AdamOpt opt(AdamConfig{});
  Vec p = Vec::of({0.5, 0.5});
  for (int i = 0; i < 10; ++i) {
    Vec g = Vec::of({0.3 + 0.01 * i, 0.3 + 0.01 * i});
    opt.step({view_of("p", p)}, {view_of("g", g)});
    REQUIRE(p[0] == p[1]);
  }
}

TEST_CASE("adam: non-finite gradients refuse the step") {
  AdamOpt opt(AdamConfig{});
  Vec p = Vec::of({1.0});
  Vec g = Vec::of({std::numeric_limits<double>::quiet_NaN()});
  REQUIRE_THROWS_AS(opt.step({view_of("p", p)}, {view_of("g", g)}),
                    std::runtime_error);
  REQUIRE(p[0] == 1.0);
}
