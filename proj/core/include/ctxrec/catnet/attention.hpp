#pragma once

#include <Eigen/Dense>

#include "ctxrec/rng.hpp"

namespace ctxrec::catnet {

/// Soft-attention weights for one stream. The context and object streams each
/// own a separate instance.
struct AttentionParams {
  Eigen::MatrixXd hidden_proj;   // 1 x n   (A_h)
  Eigen::MatrixXd feature_proj;  // 1 x D   (A_a)
  Eigen::MatrixXd gate;          // L x n   (W_beta)

  static AttentionParams random(int locations, int feature_dim, int hidden, Rng& rng);
  static AttentionParams zeros(int locations, int feature_dim, int hidden);
};

struct AttentionState {
  Eigen::VectorXd alpha;  // L, softmax over locations
  Eigen::VectorXd beta;   // L, per-location gate in (0, 1)
  Eigen::VectorXd gist;   // D, sum_i beta_i alpha_i a_i
};

/// e_i = A_h h + A_a a_i, alpha = softmax(e), beta = sigmoid(W_beta h),
/// gist = sum_i beta_i alpha_i a_i. `features` is D x L. With `uniform` set
/// (no-attention ablation) alpha = 1/L and beta = 1 exactly.
[[nodiscard]] AttentionState attend(const Eigen::MatrixXd& features, const Eigen::VectorXd& h_prev,
                                    const AttentionParams& params, bool uniform = false);

/// Back-propagates d(loss)/d(gist); accumulates into grad, d_features and d_h_prev.
void attend_backward(const Eigen::MatrixXd& features, const Eigen::VectorXd& h_prev, const AttentionParams& params,
                     const AttentionState& state, const Eigen::VectorXd& d_gist, bool uniform, AttentionParams& grad,
                     Eigen::MatrixXd& d_features, Eigen::VectorXd& d_h_prev);

[[nodiscard]] Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
[[nodiscard]] Eigen::VectorXd sigmoid(const Eigen::VectorXd& x);

}  // namespace ctxrec::catnet
