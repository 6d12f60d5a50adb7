#include <gtest/gtest.h>

#include "ctxrec/catnet/attention.hpp"
#include "oracles.hpp"

namespace ctxrec::catnet {
namespace {

Eigen::MatrixXd random_matrix(int r, int c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

TEST(Attention, IdenticalFeaturesGiveUniformAlpha) {
  Rng rng(1);
  const auto params = AttentionParams::random(6, 3, 4, rng);
  Eigen::MatrixXd features(3, 6);
  for (int i = 0; i < 6; ++i) features.col(i) << 0.3, -1.2, 2.0;
  const auto s = attend(features, Eigen::VectorXd::Zero(4), params);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.alpha(i), 1.0 / 6.0, 1e-15);
}

TEST(Attention, ZeroGateGivesHalf) {
  Rng rng(2);
  auto params = AttentionParams::random(5, 3, 4, rng);
  params.gate.setZero();
  const auto s = attend(random_matrix(3, 5, rng), random_matrix(4, 1, rng), params);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(s.beta(i), 0.5);
}

TEST(Attention, GistMatchesBruteForceSum) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int l = 4, d = 3, n = 2;
    const auto params = AttentionParams{random_matrix(1, n, rng), random_matrix(1, d, rng), random_matrix(l, n, rng)};
    const Eigen::MatrixXd features = random_matrix(d, l, rng) * 3.0;
    const Eigen::VectorXd h = random_matrix(n, 1, rng);
    Eigen::VectorXd alpha, beta;
    const Eigen::VectorXd want =
        oracle::attention_gist(features, h, params.hidden_proj, params.feature_proj, params.gate, &alpha, &beta);
    const auto s = attend(features, h, params);
    EXPECT_LE((s.gist - want).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((s.alpha - alpha).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s.beta - beta).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(s.alpha.sum(), 1.0, 1e-12);
  }
}

TEST(Attention, UniformAblationIsPlainMean) {
  Rng rng(4);
  const auto params = AttentionParams::random(4, 2, 3, rng);
  const Eigen::MatrixXd features = random_matrix(2, 4, rng);
  const auto s = attend(features, random_matrix(3, 1, rng), params, true);
  EXPECT_LE((s.gist - features.rowwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE((s.beta.array() == 1.0).all());
}

TEST(Attention, SoftmaxStableForLargeLogits) {
  Eigen::VectorXd x(3);
  x << 1000.0, 1000.0, -1000.0;
  const auto p = softmax(x);
  EXPECT_NEAR(p(0), 0.5, 1e-15);
  EXPECT_NEAR(p(2), 0.0, 1e-15);
}

TEST(Attention, BackwardMatchesFiniteDifferences) {
  Rng rng(5);
  const int l = 5, d = 3, n = 4;
  const auto params = AttentionParams{random_matrix(1, n, rng), random_matrix(1, d, rng), random_matrix(l, n, rng)};
  const Eigen::MatrixXd features = random_matrix(d, l, rng);
  const Eigen::VectorXd h = random_matrix(n, 1, rng);
  const Eigen::VectorXd w = random_matrix(d, 1, rng);
  auto objective = [&](const Eigen::MatrixXd& f, const Eigen::VectorXd& hh, const AttentionParams& p) {
    return w.dot(attend(f, hh, p).gist);
  };
  const auto state = attend(features, h, params);
  auto grad = AttentionParams::zeros(l, d, n);
  Eigen::MatrixXd d_features = Eigen::MatrixXd::Zero(d, l);
  Eigen::VectorXd d_h = Eigen::VectorXd::Zero(n);
  attend_backward(features, h, params, state, w, false, grad, d_features, d_h);

  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    Eigen::MatrixXd up = features, dn = features;
    up.data()[i] += eps;
    dn.data()[i] -= eps;
    EXPECT_NEAR(d_features.data()[i], (objective(up, h, params) - objective(dn, h, params)) / (2 * eps), 1e-8);
  }
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    Eigen::VectorXd up = h, dn = h;
    up(i) += eps;
    dn(i) -= eps;
    EXPECT_NEAR(d_h(i), (objective(features, up, params) - objective(features, dn, params)) / (2 * eps), 1e-8);
  }
  for (Eigen::Index i = 0; i < params.gate.size(); ++i) {
    AttentionParams up = params, dn = params;
    up.gate.data()[i] += eps;
    dn.gate.data()[i] -= eps;
    EXPECT_NEAR(grad.gate.data()[i], (objective(features, h, up) - objective(features, h, dn)) / (2 * eps), 1e-8);
  }
  // A constant shift of every e_i cancels under softmax.
  EXPECT_LE(grad.hidden_proj.cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace ctxrec::catnet
