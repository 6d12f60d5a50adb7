#include <gtest/gtest.h>

#include "ctxrec/catnet/backbone.hpp"
#include "oracles.hpp"

namespace ctxrec::catnet {
namespace {

BackboneSpec two_stride_spec() {
  BackboneSpec s;
  s.name = "two_stride";
  s.layers = {{LayerKind::Conv, 6, 3, 2, 1}, {LayerKind::Relu, 0, 0, 0, 0}, {LayerKind::Conv, 8, 3, 2, 1},
              {LayerKind::Relu, 0, 0, 0, 0}};
  return s;
}

Tensor random_tensor(int c, int h, int w, Rng& rng) {
  Tensor t(c, h, w);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = rng.uniform(-0.5, 0.5);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) { return (a.data - b.data).cwiseAbs().maxCoeff(); }

TEST(Backbone, FeatureShape) {
  Rng rng(1);
  const Backbone bb(two_stride_spec(), 3);
  const auto w = bb.init_weights(rng);
  const auto f = extract_features(bb, w, random_tensor(3, 16, 16, rng));
  EXPECT_EQ(f.width, 4);
  EXPECT_EQ(f.height, 4);
  EXPECT_EQ(f.features.rows(), 8);
  EXPECT_EQ(f.features.cols(), 16);
}

TEST(Backbone, ConfigResolvesSameShape) {
  ModelConfig c;
  c.input_size = 16;
  c.backbone = two_stride_spec();
  c.classes = {"a", "b"};
  c.resolve();
  EXPECT_EQ(c.feature_width, 4);
  EXPECT_EQ(c.locations(), 16);
  EXPECT_EQ(c.feature_channels, 8);
  c.input_size = 0;
  EXPECT_THROW(c.resolve(), std::invalid_argument);
}

TEST(Backbone, Deterministic) {
  Rng rng(2);
  const Backbone bb(BackboneSpec::toy(), 3);
  const auto w = bb.init_weights(rng);
  const Tensor in = random_tensor(3, 24, 24, rng);
  EXPECT_EQ(bb.forward(in, w).data, bb.forward(in, w).data);
}

TEST(Backbone, MatchesDirectConvolution) {
  Rng rng(3);
  BackboneSpec pooled;
  pooled.layers = {{LayerKind::Conv, 5, 3, 1, 1}, {LayerKind::Relu, 0, 0, 0, 0}, {LayerKind::MaxPool, 0, 2, 2, 0},
                   {LayerKind::Conv, 4, 5, 2, 2}, {LayerKind::Relu, 0, 0, 0, 0}};
  for (const auto& spec : {BackboneSpec::toy(), two_stride_spec(), pooled}) {
    for (int channels : {3, 4}) {
      const Backbone bb(spec, channels);
      const auto w = bb.init_weights(rng);
      const Tensor in = random_tensor(channels, 20, 20, rng);
      EXPECT_LE(max_abs_diff(bb.forward(in, w), oracle::backbone_forward(spec, in, w)), 1e-12);
    }
  }
}

TEST(Backbone, TranslationEquivariantAtInterior) {
  // Total stride 4: shifting the input right by 4 px moves every interior
  // feature one location right.
  Rng rng(4);
  const Backbone bb(two_stride_spec(), 3);
  const auto w = bb.init_weights(rng);
  const Tensor in = random_tensor(3, 32, 32, rng);
  Tensor shifted = random_tensor(3, 32, 32, rng);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 4; x < 32; ++x) shifted.at(c, y, x) = in.at(c, y, x - 4);
    }
  }
  const Tensor a = bb.forward(in, w);
  const Tensor b = bb.forward(shifted, w);
  ASSERT_EQ(a.width, 8);
  for (int c = 0; c < a.channels; ++c) {
    for (int y = 0; y < a.height; ++y) {
      for (int x = 1; x <= 6; ++x) EXPECT_NEAR(b.at(c, y, x + 1), a.at(c, y, x), 1e-12);
    }
  }
}

TEST(Backbone, BackwardMatchesFiniteDifferences) {
  Rng rng(5);
  BackboneSpec spec;
  spec.layers = {{LayerKind::Conv, 3, 3, 1, 1}, {LayerKind::Relu, 0, 0, 0, 0}, {LayerKind::MaxPool, 0, 2, 2, 0},
                 {LayerKind::Conv, 2, 3, 2, 1}};
  const Backbone bb(spec, 3);
  auto w = bb.init_weights(rng);
  const Tensor in = random_tensor(3, 8, 8, rng);
  Backbone::Cache cache;
  const Tensor out = bb.forward(in, w, &cache);
  Tensor g(out.channels, out.height, out.width);
  for (Eigen::Index i = 0; i < g.data.size(); ++i) g.data.data()[i] = rng.uniform(-1, 1);
  auto grads = bb.zero_weights();
  bb.backward(cache, g, w, grads);
  auto objective = [&] { return (bb.forward(in, w).data.array() * g.data.array()).sum(); };
  const double eps = 1e-6;
  for (std::size_t layer = 0; layer < w.size(); ++layer) {
    for (Eigen::Index i = 0; i < w[layer].weight.size(); ++i) {
      const double saved = w[layer].weight.data()[i];
      w[layer].weight.data()[i] = saved + eps;
      const double up = objective();
      w[layer].weight.data()[i] = saved - eps;
      const double dn = objective();
      w[layer].weight.data()[i] = saved;
      EXPECT_NEAR(grads[layer].weight.data()[i], (up - dn) / (2 * eps), 1e-7);
    }
  }
}

TEST(Tensor, PixelScaling) {
  Image img(2, 1, 3, 0);
  img.at(1, 0, 2) = 255;
  const Tensor t = image_to_tensor(img);
  EXPECT_DOUBLE_EQ(t.at(0, 0, 0), -0.5);
  EXPECT_DOUBLE_EQ(t.at(2, 0, 1), 0.5);
}

}  // namespace
}  // namespace ctxrec::catnet
