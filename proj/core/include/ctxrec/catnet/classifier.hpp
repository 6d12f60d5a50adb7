#pragma once

#include <Eigen/Dense>

#include "ctxrec/rng.hpp"

namespace ctxrec::catnet {

struct ClassifierHead {
  Eigen::MatrixXd weight;  // C x n   (L_h)

  static ClassifierHead random(int classes, int hidden, Rng& rng);
  static ClassifierHead zeros(int classes, int hidden);
};

struct Prediction {
  Eigen::VectorXd probabilities;  // C, sums to 1
  int label = 0;                  // argmax, ties to the lowest index
};

[[nodiscard]] Prediction classify(const Eigen::VectorXd& h, const ClassifierHead& head);

/// Argmax with ties resolved to the lowest index.
[[nodiscard]] int argmax_lowest(const Eigen::VectorXd& v);

}  // namespace ctxrec::catnet
