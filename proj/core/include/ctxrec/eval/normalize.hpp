#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace ctxrec::eval {

/// Variant -> canonical answer table loaded from a two-column TSV file.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::string> entries);

  /// Keys and values are normalized on load; '#' starts a comment line.
  static SynonymTable load(const std::filesystem::path& tsv);
  static SynonymTable parse(std::string_view tsv_text);
  /// The repo's shipped table (installed copy, else the source tree copy).
  static const SynonymTable& builtin();

  [[nodiscard]] const std::string* find(const std::string& key) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;
};

/// Lowercase, trim, collapse internal whitespace. No plural or synonym rules.
[[nodiscard]] std::string canonical_spacing(std::string_view raw);

/// Strips a regular English plural from the last word: -ies -> -y,
/// -ches/-shes/-sses/-xes/-zes -> drop "es", other -s -> drop "s" (except
/// -ss, -us, -is and words of three letters or fewer).
[[nodiscard]] std::string singularize(std::string_view word);

/// canonical_spacing, then synonym lookup; if no synonym matches, the last
/// word is singularized and looked up again.
[[nodiscard]] std::string normalize_answer(std::string_view raw, const SynonymTable& synonyms);
[[nodiscard]] std::string normalize_answer(std::string_view raw);

}  // namespace ctxrec::eval
