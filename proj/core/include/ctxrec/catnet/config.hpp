#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace ctxrec::catnet {

enum class LayerKind { Conv, Relu, MaxPool };

/// One backbone layer. Conv uses all fields; MaxPool uses kernel/stride.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct BackboneSpec {
  std::string name = "toy";
  std::vector<LayerSpec> layers;

  /// Small all-convolutional stack: three stride-2 convs with ReLU between.
  static BackboneSpec toy(int width = 8, int depth_out = 16);
  /// The 13 conv layers of VGG16 up to conv5_3 (last conv layer, no final pool).
  static BackboneSpec vgg16();

  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

struct Ablation {
  bool single_stream = false;      // context stream only
  bool binary_mask_input = false;  // object stream replaced by a mask channel on the context input
  bool no_attention = false;       // alpha = 1/L, beta = 1
  bool no_recurrence = false;      // state reset before every step

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct ModelConfig {
  int input_size = 400;  // square stream inputs
  BackboneSpec backbone = BackboneSpec::vgg16();
  int hidden = 512;  // recurrent state size n
  std::vector<std::string> classes;  // C labels, C >= 2
  int steps = 8;                     // T_m
  int ms_per_step = 25;
  int box_line_width = 2;
  Ablation ablation;

  // Derived from backbone and input_size by resolve().
  int feature_channels = 0;  // D
  int feature_width = 0;     // W
  int feature_height = 0;    // H

  [[nodiscard]] int locations() const { return feature_width * feature_height; }  // L
  [[nodiscard]] int num_classes() const { return static_cast<int>(classes.size()); }
  [[nodiscard]] bool two_streams() const { return !ablation.single_stream && !ablation.binary_mask_input; }
  [[nodiscard]] int input_channels() const { return ablation.binary_mask_input ? 4 : 3; }

  /// Fills D, W, H from the backbone and checks every invariant.
  void resolve();

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

[[nodiscard]] nlohmann::json to_json(const ModelConfig& config);
[[nodiscard]] ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace ctxrec::catnet
