#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctxrec/catnet/model.hpp"
#include "ctxrec/catnet/schedule.hpp"
#include "ctxrec/stimulus/trial.hpp"

namespace ctxrec::catnet {

struct EvalOptions {
  int horizon = kDefaultHorizon;
  unsigned threads = 1;
  /// When set, per-trial attention maps are dumped here as JSON.
  std::filesystem::path attention_dir;
};

/// One model prediction at one step of one trial.
struct EvalRow {
  std::string trial_id;
  std::vector<std::string> condition;  // stimulus::condition_values order
  int step = 0;                        // 1-based
  bool readout = false;                // final step of the schedule
  std::string predicted_label;
  bool correct = false;
  int true_rank = 0;  // 1-based rank of the true class by probability
  double predicted_probability = 0.0;
};

struct EvalSkip {
  std::string trial_id;
  std::string reason;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  std::vector<EvalSkip> skipped;
};

/// Runs every manifest trial through its input schedule. Trials whose category
/// is outside the model's label set, or whose schedule exceeds the horizon,
/// are skipped with a reason.
[[nodiscard]] EvalResult evaluate_manifest(const CatNet& model, const stimulus::Manifest& manifest,
                                           const std::filesystem::path& root, const EvalOptions& options = {});

/// Rank of `label` when classes are sorted by descending probability, ties
/// broken by lower index first.
[[nodiscard]] int rank_of(const Eigen::VectorXd& probabilities, int label);

[[nodiscard]] std::vector<std::string> results_csv_header();
void write_results_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);

}  // namespace ctxrec::catnet
