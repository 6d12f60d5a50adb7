#pragma once

#include <Eigen/Dense>

#include "ctxrec/rng.hpp"

namespace ctxrec::catnet {

/// Gate rows are stacked [input; forget; output; candidate], each n wide.
/// Columns are [x (2D) | h_prev (n)].
struct LstmParams {
  Eigen::MatrixXd weight;  // 4n x (input + n)
  Eigen::MatrixXd bias;    // 4n x 1

  static LstmParams random(int input, int hidden, Rng& rng);
  static LstmParams zeros(int input, int hidden);
};

struct RecurrentState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static RecurrentState zeros(int hidden) { return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)}; }
};

/// Everything one step needs for its backward pass.
struct LstmStep {
  Eigen::VectorXd x;
  RecurrentState prev;
  Eigen::VectorXd input_gate, forget_gate, output_gate, candidate;
  Eigen::VectorXd tanh_c;
  RecurrentState next;
};

[[nodiscard]] LstmStep lstm_step(const Eigen::VectorXd& x, const RecurrentState& prev, const LstmParams& params);

struct LstmGrads {
  Eigen::VectorXd d_x;
  Eigen::VectorXd d_h_prev;
  Eigen::VectorXd d_c_prev;
};

/// d_h and d_c are the loss gradients w.r.t. this step's outputs h_t, c_t.
[[nodiscard]] LstmGrads lstm_backward(const LstmStep& step, const LstmParams& params, const Eigen::VectorXd& d_h,
                                      const Eigen::VectorXd& d_c, LstmParams& grad);

}  // namespace ctxrec::catnet
