#include "ctxrec/catnet/lstm.hpp"

#include <cmath>

#include "ctxrec/catnet/attention.hpp"

namespace ctxrec::catnet {

LstmParams LstmParams::random(int input, int hidden, Rng& rng) {
  LstmParams p = zeros(input, hidden);
  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight.data()[i] = rng.uniform(-s, s);
  p.bias.middleRows(hidden, hidden).setOnes();  // forget-gate bias
  return p;
}

LstmParams LstmParams::zeros(int input, int hidden) {
  return {Eigen::MatrixXd::Zero(4 * hidden, input + hidden), Eigen::MatrixXd::Zero(4 * hidden, 1)};
}

LstmStep lstm_step(const Eigen::VectorXd& x, const RecurrentState& prev, const LstmParams& params) {
  const Eigen::Index n = prev.h.size();
  const Eigen::Index in = x.size();
  LstmStep s;
  s.x = x;
  s.prev = prev;
  const Eigen::VectorXd pre = params.weight.leftCols(in) * x + params.weight.rightCols(n) * prev.h + params.bias.col(0);
  s.input_gate = sigmoid(pre.segment(0, n));
  s.forget_gate = sigmoid(pre.segment(n, n));
  s.output_gate = sigmoid(pre.segment(2 * n, n));
  s.candidate = pre.segment(3 * n, n).array().tanh();
  s.next.c = s.forget_gate.cwiseProduct(prev.c) + s.input_gate.cwiseProduct(s.candidate);
  s.tanh_c = s.next.c.array().tanh();
  s.next.h = s.output_gate.cwiseProduct(s.tanh_c);
  return s;
}

LstmGrads lstm_backward(const LstmStep& s, const LstmParams& params, const Eigen::VectorXd& d_h,
                        const Eigen::VectorXd& d_c, LstmParams& grad) {
  const Eigen::Index n = s.prev.h.size();
  const Eigen::Index in = s.x.size();

  const Eigen::VectorXd d_o = d_h.cwiseProduct(s.tanh_c);
  const Eigen::VectorXd d_c_total = d_c + d_h.cwiseProduct(s.output_gate).cwiseProduct(
                                              (1.0 - s.tanh_c.array().square()).matrix());
  const Eigen::VectorXd d_f = d_c_total.cwiseProduct(s.prev.c);
  const Eigen::VectorXd d_i = d_c_total.cwiseProduct(s.candidate);
  const Eigen::VectorXd d_g = d_c_total.cwiseProduct(s.input_gate);

  Eigen::VectorXd d_pre(4 * n);
  d_pre.segment(0, n) = d_i.array() * s.input_gate.array() * (1.0 - s.input_gate.array());
  d_pre.segment(n, n) = d_f.array() * s.forget_gate.array() * (1.0 - s.forget_gate.array());
  d_pre.segment(2 * n, n) = d_o.array() * s.output_gate.array() * (1.0 - s.output_gate.array());
  d_pre.segment(3 * n, n) = d_g.array() * (1.0 - s.candidate.array().square());

  grad.weight.leftCols(in).noalias() += d_pre * s.x.transpose();
  grad.weight.rightCols(n).noalias() += d_pre * s.prev.h.transpose();
  grad.bias.col(0) += d_pre;

  LstmGrads out;
  out.d_x = params.weight.leftCols(in).transpose() * d_pre;
  out.d_h_prev = params.weight.rightCols(n).transpose() * d_pre;
  out.d_c_prev = d_c_total.cwiseProduct(s.forget_gate);
  return out;
}

}  // namespace ctxrec::catnet
