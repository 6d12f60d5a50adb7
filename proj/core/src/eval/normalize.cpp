#include "ctxrec/eval/normalize.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "ctxrec/digest.hpp"

namespace ctxrec::eval {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string canonical_spacing(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string singularize(std::string_view word) {
  std::string w(word);
  if (w.size() <= 3) return w;
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view suffix : {"ches", "shes", "sses", "xes", "zes"}) {
    if (ends_with(w, suffix)) return w.substr(0, w.size() - 2);
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

SynonymTable::SynonymTable(std::map<std::string, std::string> entries) {
  for (auto& [k, v] : entries) entries_[canonical_spacing(k)] = canonical_spacing(v);
}

SynonymTable SynonymTable::parse(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (canonical_spacing(line).empty() || canonical_spacing(line)[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("synonym line " + std::to_string(number) + " has no tab separator");
    }
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return SynonymTable(std::move(entries));
}

SynonymTable SynonymTable::load(const std::filesystem::path& tsv) { return parse(read_file(tsv)); }

const SynonymTable& SynonymTable::builtin() {
  static const SynonymTable table = [] {
    for (const char* candidate : {CTXREC_INSTALLED_SYNONYMS, CTXREC_SOURCE_SYNONYMS}) {
      if (std::filesystem::exists(candidate)) return load(candidate);
    }
    return SynonymTable{};
  }();
  return table;
}

const std::string* SynonymTable::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string normalize_answer(std::string_view raw, const SynonymTable& synonyms) {
  std::string s = canonical_spacing(raw);
  if (const auto* hit = synonyms.find(s)) return *hit;
  const auto space = s.rfind(' ');
  const std::string head = space == std::string::npos ? std::string() : s.substr(0, space + 1);
  const std::string singular = head + singularize(space == std::string::npos ? s : s.substr(space + 1));
  if (const auto* hit = synonyms.find(singular)) return *hit;
  return singular;
}

std::string normalize_answer(std::string_view raw) { return normalize_answer(raw, SynonymTable::builtin()); }

}  // namespace ctxrec::eval
