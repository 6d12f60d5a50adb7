#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ctxrec/catnet/model.hpp"

namespace ctxrec::catnet {

/// Adam with global-norm gradient clipping. Defaults are repo conventions.
struct TrainConfig {
  int iterations = 2000;
  int batch_size = 8;
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
  std::uint64_t seed = 1;
  int log_every = 100;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

[[nodiscard]] nlohmann::json to_json(const TrainConfig& c);
[[nodiscard]] TrainConfig train_config_from_json(const nlohmann::json& j);

/// One full-context training image.
struct TrainingExample {
  Image image;
  Rect bbox;
  int label = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int iteration, double last_finite_loss);
  int iteration;
  double last_finite_loss;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean per-example loss of every iteration's batch
};

using ProgressFn = std::function<void(int iteration, double batch_loss)>;

class AdamOptimizer {
 public:
  AdamOptimizer(const CatNet& model, const TrainConfig& config);
  /// Applies one update from a batch-mean gradient (clipped in place).
  void step(Parameters& params, Parameters& grad);

 private:
  TrainConfig config_;
  Parameters m_;
  Parameters v_;
  int t_ = 0;
};

/// Samples batches uniformly with replacement under config.seed; every example
/// is presented for config.steps steps with the same label.
TrainResult train(CatNet& model, const std::vector<TrainingExample>& data, const TrainConfig& config,
                  const ProgressFn& progress = {});

[[nodiscard]] double global_norm(const Parameters& p);

}  // namespace ctxrec::catnet
