#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "ctxrec/catnet/backbone.hpp"
#include "ctxrec/catnet/config.hpp"
#include "ctxrec/catnet/tensor.hpp"
#include "ctxrec/image.hpp"

// Deliberately naive reference implementations. None of them call into the
// library code they check.
namespace ctxrec::oracle {

/// Dense 2-D Gaussian weights exp(-(dx^2 + dy^2) / 2 sigma^2) over a
/// (2r+1)^2 window, r = ceil(3 sigma), mirror boundaries.
[[nodiscard]] ImageF dense_gaussian_blur(const ImageF& image, double sigma);

/// |F(u, v)| of one channel via a direct O(N^2)-per-axis DFT.
[[nodiscard]] std::vector<double> dft_amplitude(const ImageF& image, int channel);

/// SHA-256 of every jigsaw piece's pixel block, in raster piece order.
[[nodiscard]] std::vector<std::string> piece_hashes(const Image& image, int grid);

/// Sum_i beta_i alpha_i a_i with alpha = softmax(e), e_i = A_h.h + A_a.a_i,
/// beta = sigmoid(W_beta h), written as explicit loops.
[[nodiscard]] Eigen::VectorXd attention_gist(const Eigen::MatrixXd& features, const Eigen::VectorXd& h,
                                             const Eigen::MatrixXd& a_h, const Eigen::MatrixXd& a_a,
                                             const Eigen::MatrixXd& w_beta, Eigen::VectorXd* alpha = nullptr,
                                             Eigen::VectorXd* beta = nullptr);

/// One LSTM step from scalar gate equations.
void lstm_step(const Eigen::MatrixXd& weight, const Eigen::VectorXd& bias, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev, Eigen::VectorXd& h, Eigen::VectorXd& c);

/// Direct-loop convolution with zero padding; weight layout matches ConvWeights.
[[nodiscard]] catnet::Tensor conv2d(const catnet::Tensor& input, const Eigen::MatrixXd& weight,
                                    const Eigen::MatrixXd& bias, int kernel, int stride, int pad);

/// Runs a conv/relu/maxpool stack with the loops above.
[[nodiscard]] catnet::Tensor backbone_forward(const catnet::BackboneSpec& spec, const catnet::Tensor& input,
                                              std::span<const catnet::ConvWeights> weights);

/// Two-sided p of the rank-sum statistic by enumerating every assignment of
/// the pooled midranks to group x.
[[nodiscard]] double ranksum_exhaustive_p(std::span<const double> x, std::span<const double> y);

[[nodiscard]] double pearson_direct(std::span<const double> x, std::span<const double> y);

/// Between/within mean squares from their textbook definitions.
[[nodiscard]] double anova_f_direct(const std::vector<std::vector<double>>& groups);

/// Pooled-variance two-sample t statistic.
[[nodiscard]] double pooled_t(std::span<const double> x, std::span<const double> y);

}  // namespace ctxrec::oracle
