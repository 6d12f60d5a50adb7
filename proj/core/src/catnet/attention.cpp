#include "ctxrec/catnet/attention.hpp"

#include <cmath>

namespace ctxrec::catnet {

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

}  // namespace

AttentionParams AttentionParams::random(int locations, int feature_dim, int hidden, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  return {uniform_matrix(1, hidden, s, rng), uniform_matrix(1, feature_dim, 1.0 / std::sqrt(feature_dim), rng),
          uniform_matrix(locations, hidden, s, rng)};
}

AttentionParams AttentionParams::zeros(int locations, int feature_dim, int hidden) {
  return {Eigen::MatrixXd::Zero(1, hidden), Eigen::MatrixXd::Zero(1, feature_dim),
          Eigen::MatrixXd::Zero(locations, hidden)};
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) { return (1.0 + (-x.array()).exp()).inverse(); }

AttentionState attend(const Eigen::MatrixXd& features, const Eigen::VectorXd& h_prev, const AttentionParams& params,
                      bool uniform) {
  const Eigen::Index locations = features.cols();
  AttentionState s;
  if (uniform) {
    s.alpha = Eigen::VectorXd::Constant(locations, 1.0 / static_cast<double>(locations));
    s.beta = Eigen::VectorXd::Ones(locations);
  } else {
    const double hidden_term = (params.hidden_proj * h_prev)(0);
    const Eigen::VectorXd e = (params.feature_proj * features).transpose().array() + hidden_term;
    s.alpha = softmax(e);
    s.beta = sigmoid(params.gate * h_prev);
  }
  s.gist = features * s.beta.cwiseProduct(s.alpha);
  return s;
}

void attend_backward(const Eigen::MatrixXd& features, const Eigen::VectorXd& h_prev, const AttentionParams& params,
                     const AttentionState& state, const Eigen::VectorXd& d_gist, bool uniform, AttentionParams& grad,
                     Eigen::MatrixXd& d_features, Eigen::VectorXd& d_h_prev) {
  const Eigen::VectorXd weights = state.beta.cwiseProduct(state.alpha);
  d_features.noalias() += d_gist * weights.transpose();
  if (uniform) return;

  const Eigen::VectorXd d_weights = features.transpose() * d_gist;  // L
  const Eigen::VectorXd d_alpha = d_weights.cwiseProduct(state.beta);
  const Eigen::VectorXd d_beta = d_weights.cwiseProduct(state.alpha);

  // softmax Jacobian: de = alpha * (d_alpha - <alpha, d_alpha>)
  const double inner = state.alpha.dot(d_alpha);
  const Eigen::VectorXd d_e = state.alpha.array() * (d_alpha.array() - inner);

  grad.feature_proj.noalias() += (features * d_e).transpose();
  d_features.noalias() += params.feature_proj.transpose() * d_e.transpose();
  const double d_hidden_term = d_e.sum();
  grad.hidden_proj.noalias() += d_hidden_term * h_prev.transpose();
  d_h_prev.noalias() += params.hidden_proj.transpose() * d_hidden_term;

  const Eigen::VectorXd d_gate_pre = d_beta.array() * state.beta.array() * (1.0 - state.beta.array());
  grad.gate.noalias() += d_gate_pre * h_prev.transpose();
  d_h_prev.noalias() += params.gate.transpose() * d_gate_pre;
}

}  // namespace ctxrec::catnet
