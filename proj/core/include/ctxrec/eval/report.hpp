#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxrec/eval/csv.hpp"
#include "ctxrec/eval/scoring.hpp"

namespace ctxrec::eval {

/// One scored response from a human subject or a model.
struct ResponseRecord {
  std::string trial_id;
  std::string responder;  // subject id or model name
  std::string answer;     // raw free-form answer or predicted label
  bool correct = false;
  std::map<std::string, std::string> fields;  // condition columns
};

struct ConditionReport {
  std::string key;
  std::size_t n = 0;
  double accuracy = 0.0;
  double sem = 0.0;
  bool single_observation = false;  // n == 1, sem reported as 0
};

/// Grouping columns used when none are given: condition, timing and size bin.
[[nodiscard]] const std::vector<std::string>& default_grouping();

/// "col=value|col=value" over the grouping columns; missing columns read as "".
[[nodiscard]] std::string group_key(const ResponseRecord& r, const std::vector<std::string>& grouping);

/// Per-group n, accuracy and Bernoulli SEM, sorted by key. Empty groups never appear.
[[nodiscard]] std::vector<ConditionReport> condition_report(const std::vector<ResponseRecord>& records,
                                                            const std::vector<std::string>& grouping = default_grouping());

/// Readout-step rows of a model results CSV (all rows if there is no readout column).
[[nodiscard]] std::vector<ResponseRecord> load_model_results(const CsvTable& table, const std::string& model = "catnet");

/// Response export rows scored against the key. Throws UnknownTrial for
/// trials missing from the key.
[[nodiscard]] std::vector<ResponseRecord> load_human_results(const CsvTable& table, const AnswerKey& key);

struct ComparisonRow {
  std::string key;
  std::optional<ConditionReport> human;
  std::optional<ConditionReport> model;
};

struct Summary {
  std::vector<ComparisonRow> conditions;
  std::map<std::string, double> human_block_accuracy;  // by block
  std::map<std::string, double> model_block_accuracy;
  std::optional<double> correlation;  // across conditions present on both sides
  std::string correlation_note;       // reason when undefined
  std::size_t paired_conditions = 0;
};

[[nodiscard]] Summary summarize(const std::vector<ResponseRecord>& human, const std::vector<ResponseRecord>& model,
                                const std::vector<std::string>& grouping = default_grouping());

/// Writes human_conditions.csv, model_conditions.csv, comparison.csv and
/// summary.md (accuracy block followed by the correlation block).
void write_report(const std::filesystem::path& dir, const std::vector<ResponseRecord>& human,
                  const std::vector<ResponseRecord>& model,
                  const std::vector<std::string>& grouping = default_grouping());

}  // namespace ctxrec::eval
