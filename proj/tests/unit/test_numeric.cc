#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "spanparse/autodiff.h"
#include "spanparse/errors.h"
#include "spanparse/grad_check.h"
#include "spanparse/params.h"
#include "spanparse/tensor.h"

using namespace spanparse;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Tensor t(r, c);
  for (double& v : t.values()) v = d(rng);
  return t;
}

}  // namespace

TEST(Ops, ReluForward) {
  Graph g;
  Var x = g.constant(Tensor::row({-1.0, 0.0, 2.0}));
  EXPECT_EQ(g.value(ops::relu(g, x)).values(), (std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(Ops, SoftmaxSymmetric) {
  Graph g;
  Var x = g.constant(Tensor::row({0.0, 0.0}));
  const Tensor& y = g.value(ops::softmax_rows(g, x));
  EXPECT_DOUBLE_EQ(y[0], 0.5);
  EXPECT_DOUBLE_EQ(y[1], 0.5);
}

TEST(Ops, SoftmaxSumsToOneOnExtremeInputs) {
  std::mt19937_64 rng(1);
  Graph g;
  Tensor t = random_tensor(50, 7, rng);
  for (double& v : t.values()) v *= 300.0;
  const Tensor& y = g.value(ops::softmax_rows(g, g.constant(t)));
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) {
      EXPECT_GE(y(r, c), 0.0);
      s += y(r, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Ops, LayerNormConstantRowIsZero) {
  Graph g;
  Var x = g.constant(Tensor::row({3.0, 3.0, 3.0, 3.0}));
  const Tensor& y = g.value(ops::layer_norm(g, x, Var{}, Var{}));
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Ops, LayerNormMomentsBeforeAffine) {
  std::mt19937_64 rng(2);
  Graph g;
  const Tensor& y = g.value(ops::layer_norm(g, g.constant(random_tensor(20, 16, rng)), Var{}, Var{}));
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) mean += y(r, c);
    mean /= static_cast<double>(y.cols());
    for (std::size_t c = 0; c < y.cols(); ++c) var += (y(r, c) - mean) * (y(r, c) - mean);
    var /= static_cast<double>(y.cols());
    EXPECT_LE(std::abs(mean), 1e-6);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(Ops, ShapeMismatchNamesBothShapes) {
  Graph g;
  Var a = g.constant(Tensor(2, 3));
  Var b = g.constant(Tensor(4, 5));
  try {
    ops::matmul(g, a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
  EXPECT_THROW(ops::add(g, a, b), ShapeError);
}

TEST(Ops, MatmulMatchesHandProduct) {
  Graph g;
  Var a = g.constant(Tensor(2, 2, {1, 2, 3, 4}));
  Var b = g.constant(Tensor(2, 2, {5, 6, 7, 8}));
  EXPECT_EQ(g.value(ops::matmul(g, a, b)).values(), (std::vector<double>{19, 22, 43, 50}));
  EXPECT_EQ(g.value(ops::matmul_nt(g, a, b)).values(), (std::vector<double>{17, 23, 39, 53}));
}

TEST(GradCheck, QuadraticExact) {
  ParamRegistry params;
  std::mt19937_64 rng(3);
  const Parameter& w = params.add("w", random_tensor(3, 4, rng));
  const auto res = grad_check([&](Graph& g) { return ops::sum_squares(g, g.param(w)); }, params);
  EXPECT_LT(res.max_rel_error, 1e-9);
  EXPECT_EQ(res.coords_checked, 12u);
}

TEST(GradCheck, EveryOpOnRandomInputs) {
  std::mt19937_64 rng(4);
  ParamRegistry params;
  const Parameter& a = params.add("a", random_tensor(4, 5, rng));
  const Parameter& b = params.add("b", random_tensor(3, 5, rng));
  const Parameter& c = params.add("c", random_tensor(5, 3, rng));
  const Parameter& row = params.add("row", random_tensor(1, 5, rng));
  const Parameter& gamma = params.add("gamma", random_tensor(1, 5, rng));
  const Parameter& beta = params.add("beta", random_tensor(1, 5, rng));
  const Parameter& table = params.add("table", random_tensor(6, 5, rng));
  const Tensor coef = random_tensor(4, 3, rng);
  auto f = [&](Graph& g) {
    Var x = ops::add_row(g, g.param(a), g.param(row));
    x = ops::layer_norm(g, x, g.param(gamma), g.param(beta));
    const int ids[] = {0, 5, 2, 2};
    x = ops::add(g, x, ops::gather_rows(g, g.param(table), ids));
    Var y = ops::matmul_nt(g, x, g.param(b));          // 4x3
    Var z = ops::matmul(g, x, g.param(c));             // 4x3
    Var s = ops::softmax_rows(g, ops::scale(g, z, 0.7));
    Var sp = ops::softplus(g, ops::sub(g, y, s));
    const Var parts[] = {sp, ops::slice_cols(g, z, 1, 2)};
    Var cat = ops::concat_cols(g, parts);             // 4x5
    const std::pair<int, int> spans[] = {{0, 2}, {1, 3}, {0, 3}};
    Var d = ops::span_diff(g, cat, spans);             // 3x5
    Var total = ops::add(g, ops::sum(g, ops::slice_rows(g, d, 1, 2)), ops::sum_squares(g, d));
    return ops::add(g, total, ops::weighted_sum(g, y, coef, 0.25));
  };
  const auto res = grad_check(f, params);
  EXPECT_LT(res.max_rel_error, 1e-6) << res.worst_param << "[" << res.worst_index << "]";
}

TEST(GradCheck, ReluAwayFromKink) {
  ParamRegistry params;
  const Parameter& w = params.add("w", Tensor::row({-1.5, -0.3, 0.4, 2.0}));
  const auto res = grad_check([&](Graph& g) { return ops::sum_squares(g, ops::relu(g, g.param(w))); }, params);
  EXPECT_LT(res.max_rel_error, 1e-8);
}

TEST(GradCheck, NonFiniteIsError) {
  ParamRegistry params;
  const Parameter& w = params.add("w", Tensor::row({1.0}));
  auto f = [&](Graph& g) { return ops::scale(g, g.param(w), std::numeric_limits<double>::infinity()); };
  EXPECT_THROW(grad_check(f, params), NumericError);
}

TEST(GradCheck, RestoresValues) {
  std::mt19937_64 rng(5);
  ParamRegistry params;
  const Parameter& w = params.add("w", random_tensor(2, 2, rng));
  const Tensor before = w.value;
  grad_check([&](Graph& g) { return ops::sum_squares(g, g.param(w)); }, params);
  EXPECT_EQ(w.value, before);
}

TEST(Autodiff, UnregisteredTensorGetsNoParameterGradient) {
  ParamRegistry params;
  const Parameter& w = params.add("w", Tensor::row({1.0, 2.0}));
  Graph g;
  Var frozen = g.constant(Tensor::row({3.0, 4.0}));
  Var loss = ops::sum(g, ops::add(g, g.param(w), frozen));
  g.backward(loss);
  Gradients grads(params.size());
  g.collect_param_grads(grads);
  ASSERT_TRUE(grads.has(0));
  EXPECT_EQ(grads.at(0).values(), (std::vector<double>{1.0, 1.0}));
  EXPECT_FALSE(g.requires_grad(frozen));
}

TEST(Params, DuplicateNameRejected) {
  ParamRegistry params;
  params.add("w", Tensor(1, 1));
  EXPECT_THROW(params.add("w", Tensor(1, 1)), std::invalid_argument);
}

TEST(Params, GlorotWithinLimit) {
  Initializer init(7);
  const Tensor t = init.glorot(30, 20);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double v : t.values()) EXPECT_LE(std::abs(v), limit);
}

TEST(Checkpoint, BitExactRoundTrip) {
  std::mt19937_64 rng(6);
  ParamRegistry params;
  params.add("encoder.w", random_tensor(3, 7, rng));
  params.add("head.b", random_tensor(1, 4, rng));
  params.add("empty", Tensor(0, 4));
  const auto path = (std::filesystem::temp_directory_path() / "spanparse_ckpt_test.bin").string();
  save_checkpoint(path, params);

  ParamRegistry other;
  other.add("encoder.w", Tensor(3, 7));
  other.add("head.b", Tensor(1, 4));
  other.add("empty", Tensor(0, 4));
  load_checkpoint(path, other);
  for (std::size_t k = 0; k < params.size(); ++k) EXPECT_EQ(other[k].value, params[k].value);

  ParamRegistry wrong;
  wrong.add("encoder.w", Tensor(7, 3));
  wrong.add("head.b", Tensor(1, 4));
  wrong.add("empty", Tensor(0, 4));
  EXPECT_THROW(load_checkpoint(path, wrong), DataError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsGarbage) {
  const auto path = (std::filesystem::temp_directory_path() / "spanparse_garbage.bin").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(read_checkpoint(path), DataError);
  std::filesystem::remove(path);
}
