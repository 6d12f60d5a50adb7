#include "ctxrec/eval/scoring.hpp"

#include <nlohmann/json.hpp>

#include "ctxrec/digest.hpp"

namespace ctxrec::eval {

std::string image_key(std::int64_t image_id) { return "image:" + std::to_string(image_id); }

void AnswerKey::add(const std::string& key, std::span<const std::string> answers) {
  std::set<std::string> normalized;
  for (const auto& a : answers) {
    std::string n = normalize_answer(a, *synonyms_);
    if (!n.empty()) normalized.insert(std::move(n));
  }
  if (normalized.empty()) throw std::invalid_argument("answer key entry '" + key + "' is empty");
  entries_[key].merge(normalized);
}

AnswerKey AnswerKey::parse(std::string_view json_text, const SynonymTable& synonyms) {
  const auto doc = nlohmann::json::parse(json_text);
  if (!doc.is_object()) throw std::invalid_argument("answer key must be a JSON object");
  AnswerKey key(synonyms);
  for (const auto& [k, v] : doc.items()) {
    const auto answers = v.is_string() ? std::vector<std::string>{v.get<std::string>()} : v.get<std::vector<std::string>>();
    key.add(k, answers);
  }
  return key;
}

AnswerKey AnswerKey::load(const std::filesystem::path& path, const SynonymTable& synonyms) {
  return parse(read_file(path), synonyms);
}

bool AnswerKey::contains(const std::string& trial_id, std::int64_t image_id) const {
  return entries_.contains(trial_id) || (image_id >= 0 && entries_.contains(image_key(image_id)));
}

const std::set<std::string>& AnswerKey::answers(const std::string& trial_id, std::int64_t image_id) const {
  if (auto it = entries_.find(trial_id); it != entries_.end()) return it->second;
  if (image_id >= 0) {
    if (auto it = entries_.find(image_key(image_id)); it != entries_.end()) return it->second;
  }
  throw UnknownTrial(trial_id);
}

bool score_freeform(std::string_view raw, const std::set<std::string>& answers, const SynonymTable& synonyms) {
  if (answers.empty()) throw std::invalid_argument("answer set is empty");
  return answers.contains(normalize_answer(raw, synonyms));
}

bool score_freeform(std::string_view raw, const AnswerKey& key, const std::string& trial_id, std::int64_t image_id) {
  return score_freeform(raw, key.answers(trial_id, image_id), key.synonyms());
}

double topk_accuracy_from_ranks(std::span<const int> true_ranks, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (true_ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (int r : true_ranks) hits += r <= k ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(true_ranks.size());
}

double topk_accuracy(std::span<const Eigen::VectorXd> probabilities, std::span<const int> labels, int k) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("probabilities and labels differ in length");
  std::vector<int> ranks;
  ranks.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& p = probabilities[i];
    const int y = labels[i];
    if (y < 0 || y >= p.size()) throw std::invalid_argument("label out of range");
    int rank = 1;
    for (Eigen::Index c = 0; c < p.size(); ++c) {
      if (c != y && (p(c) > p(y) || (p(c) == p(y) && c < y))) ++rank;
    }
    ranks.push_back(rank);
  }
  return topk_accuracy_from_ranks(ranks, k);
}

}  // namespace ctxrec::eval
