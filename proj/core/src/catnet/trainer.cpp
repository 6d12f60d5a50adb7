#include "ctxrec/catnet/trainer.hpp"

#include <cmath>
#include <sstream>

#include "ctxrec/catnet/preprocess.hpp"

namespace ctxrec::catnet {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return {{"iterations", c.iterations}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},           {"beta2", c.beta2},           {"epsilon", c.epsilon},
          {"clip_norm", c.clip_norm},   {"seed", c.seed},             {"log_every", c.log_every}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.iterations = j.value("iterations", c.iterations);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.seed = j.value("seed", c.seed);
  c.log_every = j.value("log_every", c.log_every);
  if (c.iterations < 0 || c.batch_size < 1 || c.learning_rate <= 0.0) {
    throw std::invalid_argument("invalid training config");
  }
  return c;
}

namespace {

std::string diverged_message(int iteration, double last) {
  std::ostringstream os;
  os << "training diverged at iteration " << iteration << " (last finite batch loss " << last << ")";
  return os.str();
}

std::vector<Eigen::MatrixXd*> tensors(Parameters& p) {
  std::vector<Eigen::MatrixXd*> out;
  p.visit([&](const std::string&, Eigen::MatrixXd& m) { out.push_back(&m); });
  return out;
}

}  // namespace

TrainingDiverged::TrainingDiverged(int it, double last)
    : std::runtime_error(diverged_message(it, last)), iteration(it), last_finite_loss(last) {}

double global_norm(const Parameters& p) {
  double sq = 0.0;
  p.visit([&](const std::string&, const Eigen::MatrixXd& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

AdamOptimizer::AdamOptimizer(const CatNet& model, const TrainConfig& config)
    : config_(config), m_(model.zero_like()), v_(model.zero_like()) {}

void AdamOptimizer::step(Parameters& params, Parameters& grad) {
  if (config_.clip_norm > 0.0) {
    const double norm = global_norm(grad);
    if (norm > config_.clip_norm) {
      const double scale = config_.clip_norm / norm;
      grad.visit([&](const std::string&, Eigen::MatrixXd& g) { g *= scale; });
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, t_);
  const double c2 = 1.0 - std::pow(config_.beta2, t_);
  auto p = tensors(params), g = tensors(grad), m = tensors(m_), v = tensors(v_);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i]->array() = config_.beta1 * m[i]->array() + (1.0 - config_.beta1) * g[i]->array();
    v[i]->array() = config_.beta2 * v[i]->array() + (1.0 - config_.beta2) * g[i]->array().square();
    p[i]->array() -= config_.learning_rate * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + config_.epsilon);
  }
}

TrainResult train(CatNet& model, const std::vector<TrainingExample>& data, const TrainConfig& config,
                  const ProgressFn& progress) {
  if (data.empty()) throw std::invalid_argument("training set is empty");
  const ModelConfig& mc = model.config();
  for (const auto& ex : data) {
    if (ex.label < 0 || ex.label >= mc.num_classes()) throw std::invalid_argument("training label out of range");
  }
  Rng rng(config.seed);
  AdamOptimizer adam(model, config);
  Parameters grad = model.zero_like();
  TrainResult result;
  double last_finite = std::nan("");
  for (int it = 0; it < config.iterations; ++it) {
    grad.set_zero();
    double batch_loss = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      const TrainingExample& ex = data[rng.below(data.size())];
      const ScheduledInput input = ScheduledInput::repeat(preprocess_streams(ex.image, ex.bbox, mc), mc.steps);
      batch_loss += model.loss_and_gradient(input, ex.label, grad);
    }
    batch_loss /= config.batch_size;
    if (!std::isfinite(batch_loss)) throw TrainingDiverged(it, last_finite);
    grad.visit([&](const std::string&, Eigen::MatrixXd& g) { g /= config.batch_size; });
    if (!std::isfinite(global_norm(grad))) throw TrainingDiverged(it, last_finite);
    adam.step(model.params(), grad);
    last_finite = batch_loss;
    result.loss_curve.push_back(batch_loss);
    if (progress && config.log_every > 0 && (it % config.log_every == 0 || it + 1 == config.iterations)) {
      progress(it, batch_loss);
    }
  }
  return result;
}

}  // namespace ctxrec::catnet
