#pragma once

#include <Eigen/Dense>

#include "ctxrec/image.hpp"

namespace ctxrec::catnet {

/// Channel-major activation: `data` is channels x (height * width), column
/// index y * width + x. A backbone output read column-wise is the list of L
/// feature vectors a_1..a_L of dimension D.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  Eigen::MatrixXd data;

  Tensor() = default;
  Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(Eigen::MatrixXd::Zero(c, h * w)) {}

  [[nodiscard]] int locations() const { return height * width; }
  [[nodiscard]] double& at(int c, int y, int x) { return data(c, y * width + x); }
  [[nodiscard]] double at(int c, int y, int x) const { return data(c, y * width + x); }
};

/// Maps 8-bit pixels to [-0.5, 0.5].
[[nodiscard]] Tensor image_to_tensor(const Image& image);

/// Stacks extra channels (e.g. a location mask) under an image tensor.
[[nodiscard]] Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace ctxrec::catnet
