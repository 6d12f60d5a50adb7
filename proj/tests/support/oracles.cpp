#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ctxrec/digest.hpp"

namespace ctxrec::oracle {

namespace {

int mirror(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

ImageF dense_gaussian_blur(const ImageF& image, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  double z = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) z += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  }
  ImageF out(image.width(), image.height(), image.channels());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) / z;
            acc += w * image.at(mirror(x + dx, image.width()), mirror(y + dy, image.height()), c);
          }
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

std::vector<double> dft_amplitude(const ImageF& image, int channel) {
  const int w = image.width();
  const int h = image.height();
  using cd = std::complex<double>;
  std::vector<cd> rows(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int u = 0; u < w; ++u) {
      cd acc = 0.0;
      for (int x = 0; x < w; ++x) {
        acc += image.at(x, y, channel) * std::polar(1.0, -2.0 * std::numbers::pi * u * x / w);
      }
      rows[static_cast<std::size_t>(y) * w + u] = acc;
    }
  }
  std::vector<double> amp(static_cast<std::size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      cd acc = 0.0;
      for (int y = 0; y < h; ++y) {
        acc += rows[static_cast<std::size_t>(y) * w + u] * std::polar(1.0, -2.0 * std::numbers::pi * v * y / h);
      }
      amp[static_cast<std::size_t>(v) * w + u] = std::abs(acc);
    }
  }
  return amp;
}

std::vector<std::string> piece_hashes(const Image& image, int grid) {
  std::vector<std::string> out;
  const int pw = image.width() / grid;
  const int ph = image.height() / grid;
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      const int x0 = c * pw;
      const int y0 = r * ph;
      const int x1 = c == grid - 1 ? image.width() : x0 + pw;
      const int y1 = r == grid - 1 ? image.height() : y0 + ph;
      std::string bytes = std::to_string(x1 - x0) + "x" + std::to_string(y1 - y0) + ":";
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          for (int ch = 0; ch < image.channels(); ++ch) bytes.push_back(static_cast<char>(image.at(x, y, ch)));
        }
      }
      out.push_back(sha256_hex(bytes));
    }
  }
  return out;
}

Eigen::VectorXd attention_gist(const Eigen::MatrixXd& features, const Eigen::VectorXd& h, const Eigen::MatrixXd& a_h,
                               const Eigen::MatrixXd& a_a, const Eigen::MatrixXd& w_beta, Eigen::VectorXd* alpha_out,
                               Eigen::VectorXd* beta_out) {
  const int d = static_cast<int>(features.rows());
  const int l = static_cast<int>(features.cols());
  const int n = static_cast<int>(h.size());
  std::vector<double> e(l), alpha(l), beta(l);
  double hidden = 0.0;
  for (int k = 0; k < n; ++k) hidden += a_h(0, k) * h(k);
  double emax = -INFINITY;
  for (int i = 0; i < l; ++i) {
    double s = hidden;
    for (int j = 0; j < d; ++j) s += a_a(0, j) * features(j, i);
    e[i] = s;
    emax = std::max(emax, s);
  }
  double z = 0.0;
  for (int i = 0; i < l; ++i) z += std::exp(e[i] - emax);
  for (int i = 0; i < l; ++i) {
    alpha[i] = std::exp(e[i] - emax) / z;
    double g = 0.0;
    for (int k = 0; k < n; ++k) g += w_beta(i, k) * h(k);
    beta[i] = sigmoid(g);
  }
  Eigen::VectorXd gist = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < d; ++j) gist(j) += beta[i] * alpha[i] * features(j, i);
  }
  if (alpha_out) *alpha_out = Eigen::Map<Eigen::VectorXd>(alpha.data(), l);
  if (beta_out) *beta_out = Eigen::Map<Eigen::VectorXd>(beta.data(), l);
  return gist;
}

void lstm_step(const Eigen::MatrixXd& weight, const Eigen::VectorXd& bias, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev, Eigen::VectorXd& h, Eigen::VectorXd& c) {
  const int n = static_cast<int>(h_prev.size());
  const int in = static_cast<int>(x.size());
  auto pre = [&](int row) {
    double s = bias(row);
    for (int k = 0; k < in; ++k) s += weight(row, k) * x(k);
    for (int k = 0; k < n; ++k) s += weight(row, in + k) * h_prev(k);
    return s;
  };
  h.resize(n);
  c.resize(n);
  for (int k = 0; k < n; ++k) {
    const double i = sigmoid(pre(k));
    const double f = sigmoid(pre(n + k));
    const double o = sigmoid(pre(2 * n + k));
    const double g = std::tanh(pre(3 * n + k));
    c(k) = f * c_prev(k) + i * g;
    h(k) = o * std::tanh(c(k));
  }
}

catnet::Tensor conv2d(const catnet::Tensor& input, const Eigen::MatrixXd& weight, const Eigen::MatrixXd& bias,
                      int kernel, int stride, int pad) {
  const int out_c = static_cast<int>(weight.rows());
  const int oh = (input.height + 2 * pad - kernel) / stride + 1;
  const int ow = (input.width + 2 * pad - kernel) / stride + 1;
  catnet::Tensor out(out_c, oh, ow);
  for (int o = 0; o < out_c; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = bias(o, 0);
        for (int c = 0; c < input.channels; ++c) {
          for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
              const int iy = y * stride - pad + ky;
              const int ix = x * stride - pad + kx;
              if (iy < 0 || ix < 0 || iy >= input.height || ix >= input.width) continue;
              acc += weight(o, (c * kernel + ky) * kernel + kx) * input.at(c, iy, ix);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

catnet::Tensor backbone_forward(const catnet::BackboneSpec& spec, const catnet::Tensor& input,
                                std::span<const catnet::ConvWeights> weights) {
  catnet::Tensor t = input;
  std::size_t conv = 0;
  for (const auto& layer : spec.layers) {
    switch (layer.kind) {
      case catnet::LayerKind::Conv:
        t = conv2d(t, weights[conv].weight, weights[conv].bias, layer.kernel, layer.stride, layer.pad);
        ++conv;
        break;
      case catnet::LayerKind::Relu:
        for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = std::max(0.0, t.data.data()[i]);
        break;
      case catnet::LayerKind::MaxPool: {
        const int oh = (t.height - layer.kernel) / layer.stride + 1;
        const int ow = (t.width - layer.kernel) / layer.stride + 1;
        catnet::Tensor p(t.channels, oh, ow);
        for (int c = 0; c < t.channels; ++c) {
          for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
              double m = -INFINITY;
              for (int ky = 0; ky < layer.kernel; ++ky) {
                for (int kx = 0; kx < layer.kernel; ++kx) {
                  m = std::max(m, t.at(c, y * layer.stride + ky, x * layer.stride + kx));
                }
              }
              p.at(c, y, x) = m;
            }
          }
        }
        t = std::move(p);
        break;
      }
    }
  }
  return t;
}

double ranksum_exhaustive_p(std::span<const double> x, std::span<const double> y) {
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t n = pooled.size();
  const std::size_t nx = x.size();
  // Midranks by counting: rank = #smaller + (#equal + 1) / 2.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) ++less;
      if (pooled[j] == pooled[i]) ++equal;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double w_obs = 0.0;
  for (std::size_t i = 0; i < nx; ++i) w_obs += rank[i];
  const double expected = nx * (n + 1.0) / 2.0;
  const double obs_dev = std::abs(w_obs - expected);
  std::size_t total = 0, extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != nx) continue;
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) w += rank[i];
    }
    ++total;
    if (std::abs(w - expected) >= obs_dev - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double pearson_direct(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

double anova_f_direct(const std::vector<std::vector<double>>& groups) {
  double grand = 0.0;
  std::size_t total = 0;
  for (const auto& g : groups) {
    for (double v : g) grand += v;
    total += g.size();
  }
  grand /= static_cast<double>(total);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double v : g) ssw += (v - mean) * (v - mean);
  }
  const double k = static_cast<double>(groups.size());
  return (ssb / (k - 1.0)) / (ssw / (static_cast<double>(total) - k));
}

double pooled_t(std::span<const double> x, std::span<const double> y) {
  auto mean = [](std::span<const double> v) {
    double s = 0;
    for (double a : v) s += a;
    return s / static_cast<double>(v.size());
  };
  const double mx = mean(x), my = mean(y);
  double ss = 0;
  for (double a : x) ss += (a - mx) * (a - mx);
  for (double a : y) ss += (a - my) * (a - my);
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  const double sp2 = ss / (nx + ny - 2.0);
  return (mx - my) / std::sqrt(sp2 * (1.0 / nx + 1.0 / ny));
}

}  // namespace ctxrec::oracle
