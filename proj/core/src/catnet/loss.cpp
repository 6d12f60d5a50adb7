#include "ctxrec/catnet/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace ctxrec::catnet {

double step_loss(const Eigen::VectorXd& probabilities, int label) {
  if (label < 0 || label >= probabilities.size()) throw std::invalid_argument("label out of range");
  return -std::log(std::max(probabilities(label), kLogClamp));
}

Eigen::VectorXd step_loss_logit_grad(const Eigen::VectorXd& probabilities, int label) {
  if (probabilities(label) < kLogClamp) return Eigen::VectorXd::Zero(probabilities.size());
  Eigen::VectorXd g = probabilities;
  g(label) -= 1.0;
  return g;
}

double training_loss(std::span<const Eigen::VectorXd> step_probabilities, int label) {
  double total = 0.0;
  for (const auto& p : step_probabilities) total += step_loss(p, label);
  return total;
}

}  // namespace ctxrec::catnet
