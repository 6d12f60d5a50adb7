#include "gradcheck.hpp"

#include <cmath>

#include "ctxrec/rng.hpp"

namespace ctxrec::testing {

using catnet::CatNet;
using catnet::Parameters;

std::vector<GroupCheck> gradient_check(const CatNet& model, const catnet::ScheduledInput& input, int label, double h,
                                       double tol, double zero_threshold) {
  Parameters grad = model.zero_like();
  (void)model.loss_and_gradient(input, label, grad);

  std::vector<std::pair<std::string, Eigen::MatrixXd>> analytic;
  grad.visit([&](const std::string& name, const Eigen::MatrixXd& m) { analytic.emplace_back(name, m); });

  CatNet probe = model;
  std::vector<Eigen::MatrixXd*> slots;
  probe.params().visit([&](const std::string&, Eigen::MatrixXd& m) { slots.push_back(&m); });

  std::vector<GroupCheck> out;
  for (std::size_t g = 0; g < slots.size(); ++g) {
    Eigen::MatrixXd& w = *slots[g];
    Eigen::MatrixXd numeric(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + h;
      const double up = probe.loss(input, label);
      w.data()[i] = saved - h;
      const double down = probe.loss(input, label);
      w.data()[i] = saved;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    GroupCheck c;
    c.name = analytic[g].first;
    c.analytic_norm = analytic[g].second.norm();
    c.numeric_norm = numeric.norm();
    const double scale = std::max(c.analytic_norm, c.numeric_norm);
    c.rel_error = scale > 0.0 ? (analytic[g].second - numeric).norm() / scale : 0.0;
    c.vanishing = c.analytic_norm < zero_threshold && c.numeric_norm < zero_threshold;
    c.pass = c.vanishing || c.rel_error < tol;
    out.push_back(c);
  }
  return out;
}

catnet::ModelConfig gradcheck_config(const catnet::Ablation& ablation, int steps) {
  catnet::ModelConfig c;
  c.input_size = 8;
  c.backbone.name = "gradcheck";
  c.backbone.layers = {{catnet::LayerKind::Conv, 4, 3, 2, 1},
                       {catnet::LayerKind::Relu, 0, 0, 0, 0},
                       {catnet::LayerKind::Conv, 3, 3, 2, 1}};
  c.hidden = 4;
  c.classes = {"a", "b", "c"};
  c.steps = steps;
  c.box_line_width = 1;
  c.ablation = ablation;
  c.resolve();
  return c;
}

catnet::ScheduledInput random_schedule(const catnet::ModelConfig& config, int frames, std::uint64_t seed) {
  Rng rng(seed);
  auto random_tensor = [&](int channels) {
    catnet::Tensor t(channels, config.input_size, config.input_size);
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = rng.uniform(-0.5, 0.5);
    return t;
  };
  catnet::ScheduledInput s;
  for (int f = 0; f < frames; ++f) {
    catnet::StreamInput in;
    in.context = random_tensor(config.input_channels());
    if (config.two_streams()) in.object = random_tensor(3);
    s.frames.push_back(std::move(in));
  }
  for (int t = 0; t < config.steps; ++t) s.step_frames.push_back(t * frames / config.steps);
  return s;
}

}  // namespace ctxrec::testing
