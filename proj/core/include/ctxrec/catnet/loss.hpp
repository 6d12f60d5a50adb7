#pragma once

#include <Eigen/Dense>

#include <span>

namespace ctxrec::catnet {

inline constexpr double kLogClamp = 1e-12;

/// -log(max(p[label], 1e-12)).
[[nodiscard]] double step_loss(const Eigen::VectorXd& probabilities, int label);

/// Gradient of step_loss w.r.t. the softmax logits: p - onehot(label), or zero
/// when the clamp is active.
[[nodiscard]] Eigen::VectorXd step_loss_logit_grad(const Eigen::VectorXd& probabilities, int label);

/// Sum over steps of the per-step cross entropy against one true label.
[[nodiscard]] double training_loss(std::span<const Eigen::VectorXd> step_probabilities, int label);

}  // namespace ctxrec::catnet
