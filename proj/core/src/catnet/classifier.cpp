#include "ctxrec/catnet/classifier.hpp"

#include <cmath>

#include "ctxrec/catnet/attention.hpp"

namespace ctxrec::catnet {

ClassifierHead ClassifierHead::random(int classes, int hidden, Rng& rng) {
  ClassifierHead head = zeros(classes, hidden);
  const double s = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index i = 0; i < head.weight.size(); ++i) head.weight.data()[i] = rng.uniform(-s, s);
  return head;
}

ClassifierHead ClassifierHead::zeros(int classes, int hidden) { return {Eigen::MatrixXd::Zero(classes, hidden)}; }

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

Prediction classify(const Eigen::VectorXd& h, const ClassifierHead& head) {
  Prediction p;
  p.probabilities = softmax(head.weight * h);
  p.label = argmax_lowest(p.probabilities);
  return p;
}

}  // namespace ctxrec::catnet
