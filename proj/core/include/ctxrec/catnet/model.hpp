#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxrec/catnet/attention.hpp"
#include "ctxrec/catnet/backbone.hpp"
#include "ctxrec/catnet/classifier.hpp"
#include "ctxrec/catnet/config.hpp"
#include "ctxrec/catnet/lstm.hpp"
#include "ctxrec/catnet/preprocess.hpp"

namespace ctxrec::catnet {

/// Every learnable tensor of a CATNet. The object-stream attention is absent
/// for single-stream ablations.
struct Parameters {
  std::vector<ConvWeights> backbone;
  AttentionParams context_attention;
  std::optional<AttentionParams> object_attention;
  LstmParams lstm;
  ClassifierHead head;

  /// Calls f(name, matrix) for every tensor in a fixed order. Names are stable
  /// and used as checkpoint keys.
  template <typename F>
  void visit(F&& f) {
    for (std::size_t i = 0; i < backbone.size(); ++i) {
      f("backbone." + std::to_string(i) + ".weight", backbone[i].weight);
      f("backbone." + std::to_string(i) + ".bias", backbone[i].bias);
    }
    visit_attention("attention.context", context_attention, f);
    if (object_attention) visit_attention("attention.object", *object_attention, f);
    f(std::string("lstm.weight"), lstm.weight);
    f(std::string("lstm.bias"), lstm.bias);
    f(std::string("head.weight"), head.weight);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<Parameters*>(this)->visit([&](const std::string& name, Eigen::MatrixXd& m) {
      f(name, static_cast<const Eigen::MatrixXd&>(m));
    });
  }

  void set_zero();
  [[nodiscard]] std::size_t count() const;

 private:
  template <typename F>
  static void visit_attention(const std::string& prefix, AttentionParams& a, F& f) {
    f(prefix + ".A_h", a.hidden_proj);
    f(prefix + ".A_a", a.feature_proj);
    f(prefix + ".W_beta", a.gate);
  }
};

/// Per-step model inputs. Distinct frames are stored once; `step_frames[t]`
/// indexes the frame fed to both streams at step t.
struct ScheduledInput {
  std::vector<StreamInput> frames;
  std::vector<int> step_frames;

  static ScheduledInput repeat(StreamInput frame, int steps);
};

struct StepOutput {
  Prediction prediction;
  AttentionState context;
  std::optional<AttentionState> object;
};

struct ForwardResult {
  std::vector<StepOutput> steps;

  [[nodiscard]] std::vector<int> labels() const;
};

class CatNet {
 public:
  /// Resolves the config and draws initial weights from `seed`.
  CatNet(ModelConfig config, std::uint64_t seed);
  CatNet(ModelConfig config, Parameters params);

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] const Backbone& backbone() const { return backbone_; }
  [[nodiscard]] Parameters& params() { return params_; }
  [[nodiscard]] const Parameters& params() const { return params_; }

  /// Parameters of the same shapes, all zero.
  [[nodiscard]] Parameters zero_like() const;

  [[nodiscard]] ForwardResult forward(const ScheduledInput& input) const;

  /// Summed per-step cross entropy against `label`; accumulates the gradient
  /// of that loss into `grad` by backpropagation through time.
  double loss_and_gradient(const ScheduledInput& input, int label, Parameters& grad) const;

  /// Loss only; same value as loss_and_gradient.
  [[nodiscard]] double loss(const ScheduledInput& input, int label) const;

 private:
  void check_input(const ScheduledInput& input) const;

  ModelConfig config_;
  Backbone backbone_;
  Parameters params_;
};

/// Builds a parameter set with shapes implied by a resolved config.
[[nodiscard]] Parameters init_parameters(const ModelConfig& config, const Backbone& backbone, Rng& rng);
[[nodiscard]] Parameters zero_parameters(const ModelConfig& config, const Backbone& backbone);

}  // namespace ctxrec::catnet
