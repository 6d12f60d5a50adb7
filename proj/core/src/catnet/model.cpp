#include "ctxrec/catnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctxrec/catnet/loss.hpp"

namespace ctxrec::catnet {

void Parameters::set_zero() {
  visit([](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

ScheduledInput ScheduledInput::repeat(StreamInput frame, int steps) {
  ScheduledInput s;
  s.frames.push_back(std::move(frame));
  s.step_frames.assign(static_cast<std::size_t>(steps), 0);
  return s;
}

std::vector<int> ForwardResult::labels() const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.prediction.label);
  return out;
}

Parameters init_parameters(const ModelConfig& config, const Backbone& backbone, Rng& rng) {
  Parameters p;
  const int streams = config.two_streams() ? 2 : 1;
  p.backbone = backbone.init_weights(rng);
  p.context_attention = AttentionParams::random(config.locations(), config.feature_channels, config.hidden, rng);
  if (streams == 2) {
    p.object_attention = AttentionParams::random(config.locations(), config.feature_channels, config.hidden, rng);
  }
  p.lstm = LstmParams::random(streams * config.feature_channels, config.hidden, rng);
  p.head = ClassifierHead::random(config.num_classes(), config.hidden, rng);
  return p;
}

Parameters zero_parameters(const ModelConfig& config, const Backbone& backbone) {
  Parameters p;
  const int streams = config.two_streams() ? 2 : 1;
  p.backbone = backbone.zero_weights();
  p.context_attention = AttentionParams::zeros(config.locations(), config.feature_channels, config.hidden);
  if (streams == 2) {
    p.object_attention = AttentionParams::zeros(config.locations(), config.feature_channels, config.hidden);
  }
  p.lstm = LstmParams::zeros(streams * config.feature_channels, config.hidden);
  p.head = ClassifierHead::zeros(config.num_classes(), config.hidden);
  return p;
}

namespace {

ModelConfig resolved(ModelConfig config) {
  config.resolve();
  return config;
}

void check_shapes(const Parameters& expected, const Parameters& actual) {
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> want;
  expected.visit([&](const std::string& name, const Eigen::MatrixXd& m) { want.push_back({name, {m.rows(), m.cols()}}); });
  std::size_t i = 0;
  bool ok = true;
  actual.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
    if (i >= want.size() || want[i].first != name || want[i].second.first != m.rows() ||
        want[i].second.second != m.cols()) {
      ok = false;
    }
    ++i;
  });
  if (!ok || i != want.size()) throw std::invalid_argument("parameters do not match the model config");
}

}  // namespace

CatNet::CatNet(ModelConfig config, std::uint64_t seed)
    : config_(resolved(std::move(config))), backbone_(config_.backbone, config_.input_channels()) {
  Rng rng(seed);
  params_ = init_parameters(config_, backbone_, rng);
}

CatNet::CatNet(ModelConfig config, Parameters params)
    : config_(resolved(std::move(config))), backbone_(config_.backbone, config_.input_channels()),
      params_(std::move(params)) {
  check_shapes(zero_parameters(config_, backbone_), params_);
}

Parameters CatNet::zero_like() const { return zero_parameters(config_, backbone_); }

void CatNet::check_input(const ScheduledInput& input) const {
  if (input.step_frames.empty()) throw std::invalid_argument("schedule must have at least one step");
  for (int f : input.step_frames) {
    if (f < 0 || static_cast<std::size_t>(f) >= input.frames.size()) {
      throw std::invalid_argument("schedule references a missing frame");
    }
  }
  for (const auto& frame : input.frames) {
    if (frame.context.channels != config_.input_channels() || frame.context.height != config_.input_size ||
        frame.context.width != config_.input_size) {
      throw std::invalid_argument("context input does not match the model config");
    }
    if (config_.two_streams() && (frame.object.channels != 3 || frame.object.height != config_.input_size ||
                                  frame.object.width != config_.input_size)) {
      throw std::invalid_argument("object input does not match the model config");
    }
  }
}

namespace {

struct StreamTrace {
  Backbone::Cache cache;
  Eigen::MatrixXd features;
};

struct StepTrace {
  int frame = 0;
  Eigen::VectorXd h_prev;
  AttentionState context;
  std::optional<AttentionState> object;
  LstmStep lstm;
  Prediction prediction;
};

}  // namespace

ForwardResult CatNet::forward(const ScheduledInput& input) const {
  check_input(input);
  const bool two = config_.two_streams();
  const bool uniform = config_.ablation.no_attention;
  const int d = config_.feature_channels;

  std::vector<Eigen::MatrixXd> ctx_features, obj_features;
  for (const auto& frame : input.frames) {
    ctx_features.push_back(backbone_.forward(frame.context, params_.backbone).data);
    if (two) obj_features.push_back(backbone_.forward(frame.object, params_.backbone).data);
  }

  ForwardResult result;
  RecurrentState state = RecurrentState::zeros(config_.hidden);
  for (int f : input.step_frames) {
    if (config_.ablation.no_recurrence) state = RecurrentState::zeros(config_.hidden);
    StepOutput out;
    out.context = attend(ctx_features[f], state.h, params_.context_attention, uniform);
    Eigen::VectorXd z(two ? 2 * d : d);
    z.head(d) = out.context.gist;
    if (two) {
      out.object = attend(obj_features[f], state.h, *params_.object_attention, uniform);
      z.tail(d) = out.object->gist;
    }
    LstmStep step = lstm_step(z, state, params_.lstm);
    state = step.next;
    out.prediction = classify(state.h, params_.head);
    result.steps.push_back(std::move(out));
  }
  return result;
}

double CatNet::loss(const ScheduledInput& input, int label) const {
  const ForwardResult r = forward(input);
  std::vector<Eigen::VectorXd> probs;
  for (const auto& s : r.steps) probs.push_back(s.prediction.probabilities);
  return training_loss(probs, label);
}

double CatNet::loss_and_gradient(const ScheduledInput& input, int label, Parameters& grad) const {
  check_input(input);
  if (label < 0 || label >= config_.num_classes()) throw std::invalid_argument("label out of range");
  const bool two = config_.two_streams();
  const bool uniform = config_.ablation.no_attention;
  const bool reset = config_.ablation.no_recurrence;
  const int d = config_.feature_channels;
  const int n = config_.hidden;

  std::vector<StreamTrace> ctx(input.frames.size()), obj(two ? input.frames.size() : 0);
  for (std::size_t i = 0; i < input.frames.size(); ++i) {
    ctx[i].features = backbone_.forward(input.frames[i].context, params_.backbone, &ctx[i].cache).data;
    if (two) obj[i].features = backbone_.forward(input.frames[i].object, params_.backbone, &obj[i].cache).data;
  }

  std::vector<StepTrace> trace;
  trace.reserve(input.step_frames.size());
  RecurrentState state = RecurrentState::zeros(n);
  double total = 0.0;
  for (int f : input.step_frames) {
    if (reset) state = RecurrentState::zeros(n);
    StepTrace t;
    t.frame = f;
    t.h_prev = state.h;
    t.context = attend(ctx[f].features, state.h, params_.context_attention, uniform);
    Eigen::VectorXd z(two ? 2 * d : d);
    z.head(d) = t.context.gist;
    if (two) {
      t.object = attend(obj[f].features, state.h, *params_.object_attention, uniform);
      z.tail(d) = t.object->gist;
    }
    t.lstm = lstm_step(z, state, params_.lstm);
    state = t.lstm.next;
    t.prediction = classify(state.h, params_.head);
    total += step_loss(t.prediction.probabilities, label);
    trace.push_back(std::move(t));
  }

  std::vector<Eigen::MatrixXd> d_ctx(ctx.size()), d_obj(obj.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) d_ctx[i] = Eigen::MatrixXd::Zero(ctx[i].features.rows(), ctx[i].features.cols());
  for (std::size_t i = 0; i < obj.size(); ++i) d_obj[i] = Eigen::MatrixXd::Zero(obj[i].features.rows(), obj[i].features.cols());

  Eigen::VectorXd d_h_next = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d_c_next = Eigen::VectorXd::Zero(n);
  for (std::size_t k = trace.size(); k-- > 0;) {
    const StepTrace& t = trace[k];
    const Eigen::VectorXd d_logits = step_loss_logit_grad(t.prediction.probabilities, label);
    grad.head.weight.noalias() += d_logits * t.lstm.next.h.transpose();
    const Eigen::VectorXd d_h = params_.head.weight.transpose() * d_logits + d_h_next;
    const LstmGrads g = lstm_backward(t.lstm, params_.lstm, d_h, d_c_next, grad.lstm);

    Eigen::VectorXd d_h_prev = g.d_h_prev;
    attend_backward(ctx[t.frame].features, t.h_prev, params_.context_attention, t.context, g.d_x.head(d), uniform,
                    grad.context_attention, d_ctx[t.frame], d_h_prev);
    if (two) {
      attend_backward(obj[t.frame].features, t.h_prev, *params_.object_attention, *t.object, g.d_x.tail(d), uniform,
                      *grad.object_attention, d_obj[t.frame], d_h_prev);
    }
    if (reset) {
      d_h_next.setZero();
      d_c_next.setZero();
    } else {
      d_h_next = d_h_prev;
      d_c_next = g.d_c_prev;
    }
  }

  auto backprop = [&](const StreamTrace& s, Eigen::MatrixXd& d_features) {
    Tensor g(d, config_.feature_height, config_.feature_width);
    g.data = std::move(d_features);
    backbone_.backward(s.cache, g, params_.backbone, grad.backbone);
  };
  for (std::size_t i = 0; i < ctx.size(); ++i) backprop(ctx[i], d_ctx[i]);
  for (std::size_t i = 0; i < obj.size(); ++i) backprop(obj[i], d_obj[i]);
  return total;
}

}  // namespace ctxrec::catnet
