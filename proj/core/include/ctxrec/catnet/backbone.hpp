#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ctxrec/catnet/config.hpp"
#include "ctxrec/catnet/tensor.hpp"
#include "ctxrec/rng.hpp"

namespace ctxrec::catnet {

struct ConvWeights {
  Eigen::MatrixXd weight;  // out x (in * k * k), column index (c * k + ky) * k + kx
  Eigen::MatrixXd bias;    // out x 1
};

/// Feed-forward convolutional feature extractor. Stateless: weights are passed
/// in, so the same instance serves both streams with shared parameters.
class Backbone {
 public:
  Backbone() = default;
  Backbone(BackboneSpec spec, int input_channels);

  struct Cache {
    std::vector<Tensor> inputs;                  // input of every layer
    std::vector<std::vector<int>> pool_argmax;   // per layer, empty unless MaxPool
  };

  [[nodiscard]] Tensor forward(const Tensor& input, std::span<const ConvWeights> weights,
                               Cache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grads`. Input gradient is not needed.
  void backward(const Cache& cache, const Tensor& grad_out, std::span<const ConvWeights> weights,
                std::span<ConvWeights> grads) const;

  [[nodiscard]] std::vector<ConvWeights> init_weights(Rng& rng) const;
  [[nodiscard]] std::vector<ConvWeights> zero_weights() const;
  [[nodiscard]] const BackboneSpec& spec() const { return spec_; }

 private:
  BackboneSpec spec_;
  std::vector<int> conv_in_channels_;  // per conv layer
};

/// Spatial feature map: column i is the D-dimensional feature a_i.
struct FeatureMap {
  Eigen::MatrixXd features;  // D x L
  int height = 0;
  int width = 0;
};

[[nodiscard]] FeatureMap extract_features(const Backbone& backbone, std::span<const ConvWeights> weights,
                                          const Tensor& stream_input);

}  // namespace ctxrec::catnet
