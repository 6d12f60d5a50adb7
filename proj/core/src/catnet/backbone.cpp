#include "ctxrec/catnet/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxrec::catnet {

namespace {

constexpr Eigen::Index kChunkElements = Eigen::Index{1} << 21;

int out_extent(int in, const LayerSpec& l) { return (in + 2 * l.pad - l.kernel) / l.stride + 1; }

// Unfolds the receptive fields of output positions [p0, p1) into columns.
void im2col(const Tensor& in, const LayerSpec& l, int out_w, int p0, int p1, Eigen::MatrixXd& cols) {
  const int k = l.kernel;
  cols.resize(static_cast<Eigen::Index>(in.channels) * k * k, p1 - p0);
  for (int p = p0; p < p1; ++p) {
    const int oy = p / out_w;
    const int ox = p % out_w;
    const int base_y = oy * l.stride - l.pad;
    const int base_x = ox * l.stride - l.pad;
    Eigen::Index row = 0;
    for (int c = 0; c < in.channels; ++c) {
      for (int ky = 0; ky < k; ++ky) {
        const int iy = base_y + ky;
        for (int kx = 0; kx < k; ++kx, ++row) {
          const int ix = base_x + kx;
          cols(row, p - p0) = (iy >= 0 && iy < in.height && ix >= 0 && ix < in.width) ? in.at(c, iy, ix) : 0.0;
        }
      }
    }
  }
}

void col2im_add(const Eigen::MatrixXd& dcols, const LayerSpec& l, int out_w, int p0, int p1, Tensor& din) {
  const int k = l.kernel;
  for (int p = p0; p < p1; ++p) {
    const int oy = p / out_w;
    const int ox = p % out_w;
    const int base_y = oy * l.stride - l.pad;
    const int base_x = ox * l.stride - l.pad;
    Eigen::Index row = 0;
    for (int c = 0; c < din.channels; ++c) {
      for (int ky = 0; ky < k; ++ky) {
        const int iy = base_y + ky;
        for (int kx = 0; kx < k; ++kx, ++row) {
          const int ix = base_x + kx;
          if (iy >= 0 && iy < din.height && ix >= 0 && ix < din.width) din.at(c, iy, ix) += dcols(row, p - p0);
        }
      }
    }
  }
}

int chunk_positions(const Tensor& in, const LayerSpec& l) {
  const Eigen::Index rows = static_cast<Eigen::Index>(in.channels) * l.kernel * l.kernel;
  return static_cast<int>(std::max<Eigen::Index>(1, kChunkElements / std::max<Eigen::Index>(rows, 1)));
}

Tensor conv_forward(const Tensor& in, const ConvWeights& w, const LayerSpec& l) {
  const int oh = out_extent(in.height, l);
  const int ow = out_extent(in.width, l);
  Tensor out(l.out_channels, oh, ow);
  const int total = oh * ow;
  const int step = chunk_positions(in, l);
  Eigen::MatrixXd cols;
  for (int p0 = 0; p0 < total; p0 += step) {
    const int p1 = std::min(total, p0 + step);
    im2col(in, l, ow, p0, p1, cols);
    out.data.middleCols(p0, p1 - p0).noalias() = w.weight * cols;
  }
  out.data.colwise() += w.bias.col(0);
  return out;
}

void conv_backward(const Tensor& in, const Tensor& dout, const ConvWeights& w, const LayerSpec& l, ConvWeights& grad,
                   Tensor* din) {
  const int total = dout.height * dout.width;
  const int step = chunk_positions(in, l);
  Eigen::MatrixXd cols;
  Eigen::MatrixXd dcols;
  for (int p0 = 0; p0 < total; p0 += step) {
    const int p1 = std::min(total, p0 + step);
    im2col(in, l, dout.width, p0, p1, cols);
    const auto dblock = dout.data.middleCols(p0, p1 - p0);
    grad.weight.noalias() += dblock * cols.transpose();
    if (din) {
      dcols.noalias() = w.weight.transpose() * dblock;
      col2im_add(dcols, l, dout.width, p0, p1, *din);
    }
  }
  grad.bias.col(0) += dout.data.rowwise().sum();
}

Tensor maxpool_forward(const Tensor& in, const LayerSpec& l, std::vector<int>* argmax) {
  const int oh = (in.height - l.kernel) / l.stride + 1;
  const int ow = (in.width - l.kernel) / l.stride + 1;
  Tensor out(in.channels, oh, ow);
  if (argmax) argmax->assign(static_cast<std::size_t>(in.channels) * oh * ow, 0);
  for (int c = 0; c < in.channels; ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int ky = 0; ky < l.kernel; ++ky) {
          for (int kx = 0; kx < l.kernel; ++kx) {
            const int iy = oy * l.stride + ky;
            const int ix = ox * l.stride + kx;
            const double v = in.at(c, iy, ix);
            if (v > best) {
              best = v;
              best_idx = iy * in.width + ix;
            }
          }
        }
        out.at(c, oy, ox) = best;
        if (argmax) (*argmax)[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] = best_idx;
      }
    }
  }
  return out;
}

}  // namespace

Backbone::Backbone(BackboneSpec spec, int input_channels) : spec_(std::move(spec)) {
  int channels = input_channels;
  for (const auto& l : spec_.layers) {
    if (l.kind == LayerKind::Conv) {
      conv_in_channels_.push_back(channels);
      channels = l.out_channels;
    }
  }
}

std::vector<ConvWeights> Backbone::init_weights(Rng& rng) const {
  std::vector<ConvWeights> out;
  std::size_t conv = 0;
  for (const auto& l : spec_.layers) {
    if (l.kind != LayerKind::Conv) continue;
    const int fan_in = conv_in_channels_[conv++] * l.kernel * l.kernel;
    const double stddev = std::sqrt(2.0 / fan_in);
    ConvWeights w{Eigen::MatrixXd(l.out_channels, fan_in), Eigen::MatrixXd::Zero(l.out_channels, 1)};
    for (Eigen::Index i = 0; i < w.weight.size(); ++i) w.weight.data()[i] = stddev * rng.normal();
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<ConvWeights> Backbone::zero_weights() const {
  std::vector<ConvWeights> out;
  std::size_t conv = 0;
  for (const auto& l : spec_.layers) {
    if (l.kind != LayerKind::Conv) continue;
    const int fan_in = conv_in_channels_[conv++] * l.kernel * l.kernel;
    out.push_back({Eigen::MatrixXd::Zero(l.out_channels, fan_in), Eigen::MatrixXd::Zero(l.out_channels, 1)});
  }
  return out;
}

Tensor Backbone::forward(const Tensor& input, std::span<const ConvWeights> weights, Cache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->pool_argmax.assign(spec_.layers.size(), {});
  }
  Tensor x = input;
  std::size_t conv = 0;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    if (cache) cache->inputs.push_back(x);
    switch (l.kind) {
      case LayerKind::Conv: {
        const auto& w = weights[conv++];
        if (w.weight.cols() != static_cast<Eigen::Index>(x.channels) * l.kernel * l.kernel) {
          throw std::invalid_argument("backbone weight shape does not match input channels");
        }
        x = conv_forward(x, w, l);
        break;
      }
      case LayerKind::Relu:
        x.data = x.data.cwiseMax(0.0);
        break;
      case LayerKind::MaxPool:
        x = maxpool_forward(x, l, cache ? &cache->pool_argmax[i] : nullptr);
        break;
    }
  }
  return x;
}

void Backbone::backward(const Cache& cache, const Tensor& grad_out, std::span<const ConvWeights> weights,
                        std::span<ConvWeights> grads) const {
  Tensor grad = grad_out;
  std::size_t conv = weights.size();
  for (std::size_t idx = spec_.layers.size(); idx-- > 0;) {
    const auto& l = spec_.layers[idx];
    const Tensor& in = cache.inputs[idx];
    switch (l.kind) {
      case LayerKind::Conv: {
        --conv;
        if (conv == 0) {
          conv_backward(in, grad, weights[conv], l, grads[conv], nullptr);
        } else {
          Tensor din(in.channels, in.height, in.width);
          conv_backward(in, grad, weights[conv], l, grads[conv], &din);
          grad = std::move(din);
        }
        break;
      }
      case LayerKind::Relu:
        grad.data = (in.data.array() > 0.0).select(grad.data, 0.0);
        break;
      case LayerKind::MaxPool: {
        Tensor din(in.channels, in.height, in.width);
        const auto& argmax = cache.pool_argmax[idx];
        for (int c = 0; c < grad.channels; ++c) {
          for (int p = 0; p < grad.locations(); ++p) {
            din.data(c, argmax[static_cast<std::size_t>(c) * grad.locations() + p]) += grad.data(c, p);
          }
        }
        grad = std::move(din);
        break;
      }
    }
    if (conv == 0 && l.kind == LayerKind::Conv) break;
  }
}

FeatureMap extract_features(const Backbone& backbone, std::span<const ConvWeights> weights, const Tensor& stream_input) {
  Tensor out = backbone.forward(stream_input, weights);
  return {std::move(out.data), out.height, out.width};
}

}  // namespace ctxrec::catnet
