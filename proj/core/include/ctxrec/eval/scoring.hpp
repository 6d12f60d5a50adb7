#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ctxrec/eval/normalize.hpp"

namespace ctxrec::eval {

class UnknownTrial : public std::out_of_range {
 public:
  explicit UnknownTrial(const std::string& trial_id) : std::out_of_range("no answer key for trial " + trial_id) {}
};

/// Acceptable answers per trial. Entries may also be keyed per target image as
/// "image:<id>", which every trial of that image falls back to.
class AnswerKey {
 public:
  AnswerKey() = default;
  explicit AnswerKey(const SynonymTable& synonyms) : synonyms_(&synonyms) {}

  /// Answers are normalized on insertion. Empty sets are rejected.
  void add(const std::string& key, std::span<const std::string> answers);

  /// JSON object {"<trial_id>" | "image:<id>": ["answer", ...]}.
  static AnswerKey load(const std::filesystem::path& path, const SynonymTable& synonyms = SynonymTable::builtin());
  static AnswerKey parse(std::string_view json_text, const SynonymTable& synonyms = SynonymTable::builtin());

  /// Throws UnknownTrial when neither the trial nor its image has an entry.
  [[nodiscard]] const std::set<std::string>& answers(const std::string& trial_id,
                                                     std::int64_t image_id = -1) const;
  [[nodiscard]] bool contains(const std::string& trial_id, std::int64_t image_id = -1) const;
  [[nodiscard]] const SynonymTable& synonyms() const { return *synonyms_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  const SynonymTable* synonyms_ = &SynonymTable::builtin();
  std::map<std::string, std::set<std::string>> entries_;
};

[[nodiscard]] std::string image_key(std::int64_t image_id);

/// True iff normalize_answer(raw) is one of the (already normalized) answers.
[[nodiscard]] bool score_freeform(std::string_view raw, const std::set<std::string>& answers,
                                  const SynonymTable& synonyms = SynonymTable::builtin());

/// Looks the trial up in the key; throws UnknownTrial when absent.
[[nodiscard]] bool score_freeform(std::string_view raw, const AnswerKey& key, const std::string& trial_id,
                                  std::int64_t image_id = -1);

/// Fraction of trials whose true label is among the k most probable classes.
/// Ties rank the lower class index first.
[[nodiscard]] double topk_accuracy(std::span<const Eigen::VectorXd> probabilities, std::span<const int> labels,
                                   int k);

/// Same, from precomputed 1-based ranks of the true class.
[[nodiscard]] double topk_accuracy_from_ranks(std::span<const int> true_ranks, int k);

}  // namespace ctxrec::eval
