#include "ctxrec/catnet/evaluate.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ctxrec/eval/csv.hpp"

namespace ctxrec::catnet {

int rank_of(const Eigen::VectorXd& probabilities, int label) {
  int rank = 1;
  for (Eigen::Index c = 0; c < probabilities.size(); ++c) {
    if (c == label) continue;
    const double p = probabilities(c);
    if (p > probabilities(label) || (p == probabilities(label) && c < label)) ++rank;
  }
  return rank;
}

namespace {

struct TrialOutcome {
  std::vector<EvalRow> rows;
  std::optional<EvalSkip> skip;
};

nlohmann::json attention_json(const ForwardResult& r, const ModelConfig& config) {
  nlohmann::json steps = nlohmann::json::array();
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  for (const auto& s : r.steps) {
    nlohmann::json j = {{"context_alpha", vec(s.context.alpha)}, {"context_beta", vec(s.context.beta)}};
    if (s.object) {
      j["object_alpha"] = vec(s.object->alpha);
      j["object_beta"] = vec(s.object->beta);
    }
    steps.push_back(std::move(j));
  }
  return {{"feature_width", config.feature_width}, {"feature_height", config.feature_height}, {"steps", steps}};
}

TrialOutcome evaluate_trial(const CatNet& model, const stimulus::TrialSpec& trial,
                            const std::map<std::string, int>& label_index, const std::filesystem::path& root,
                            const EvalOptions& options) {
  TrialOutcome out;
  auto it = label_index.find(trial.target.category);
  if (it == label_index.end()) {
    out.skip = EvalSkip{trial.trial_id, "category '" + trial.target.category + "' not in the model label set"};
    return out;
  }
  const int label = it->second;
  ForwardResult r;
  try {
    r = model.forward(schedule_inputs(trial, model.config(), directory_loader(trial, root), options.horizon));
  } catch (const std::exception& e) {
    out.skip = EvalSkip{trial.trial_id, e.what()};
    return out;
  }
  const auto condition = stimulus::condition_values(trial);
  const auto& classes = model.config().classes;
  for (std::size_t t = 0; t < r.steps.size(); ++t) {
    const Prediction& p = r.steps[t].prediction;
    EvalRow row;
    row.trial_id = trial.trial_id;
    row.condition = condition;
    row.step = static_cast<int>(t) + 1;
    row.readout = t + 1 == r.steps.size();
    row.predicted_label = classes[p.label];
    row.correct = p.label == label;
    row.true_rank = rank_of(p.probabilities, label);
    row.predicted_probability = p.probabilities(p.label);
    out.rows.push_back(std::move(row));
  }
  if (!options.attention_dir.empty()) {
    std::filesystem::create_directories(options.attention_dir);
    std::ofstream f(options.attention_dir / (trial.trial_id + ".attention.json"));
    f << attention_json(r, model.config()).dump() << '\n';
  }
  return out;
}

}  // namespace

EvalResult evaluate_manifest(const CatNet& model, const stimulus::Manifest& manifest,
                             const std::filesystem::path& root, const EvalOptions& options) {
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < model.config().classes.size(); ++i) {
    label_index.emplace(model.config().classes[i], static_cast<int>(i));
  }
  std::vector<TrialOutcome> outcomes(manifest.entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      outcomes[i] = evaluate_trial(model, manifest.entries[i], label_index, root, options);
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  EvalResult result;
  for (auto& o : outcomes) {
    if (o.skip) result.skipped.push_back(std::move(*o.skip));
    for (auto& row : o.rows) result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<std::string> results_csv_header() {
  std::vector<std::string> h{"trial_id"};
  const auto& cond = stimulus::condition_columns();
  h.insert(h.end(), cond.begin(), cond.end());
  h.insert(h.end(), {"step", "readout", "predicted_label", "correct", "true_rank", "predicted_probability"});
  return h;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
  eval::CsvTable table;
  table.header = results_csv_header();
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.trial_id};
    fields.insert(fields.end(), r.condition.begin(), r.condition.end());
    std::ostringstream prob;
    prob.precision(17);
    prob << r.predicted_probability;
    fields.insert(fields.end(), {std::to_string(r.step), r.readout ? "1" : "0", r.predicted_label,
                                 r.correct ? "1" : "0", std::to_string(r.true_rank), prob.str()});
    table.rows.push_back(std::move(fields));
  }
  eval::write_csv(path, table);
}

}  // namespace ctxrec::catnet
