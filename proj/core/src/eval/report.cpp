#include "ctxrec/eval/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ctxrec/eval/stats.hpp"

namespace ctxrec::eval {

const std::vector<std::string>& default_grouping() {
  static const std::vector<std::string> g{"condition_key", "timing", "size_bin"};
  return g;
}

std::string group_key(const ResponseRecord& r, const std::vector<std::string>& grouping) {
  std::string key;
  for (const auto& col : grouping) {
    if (!key.empty()) key += '|';
    auto it = r.fields.find(col);
    key += col + "=" + (it == r.fields.end() ? std::string() : it->second);
  }
  return key;
}

std::vector<ConditionReport> condition_report(const std::vector<ResponseRecord>& records,
                                              const std::vector<std::string>& grouping) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // key -> (n, correct)
  for (const auto& r : records) {
    auto& c = counts[group_key(r, grouping)];
    ++c.first;
    c.second += r.correct ? 1 : 0;
  }
  std::vector<ConditionReport> out;
  for (const auto& [key, c] : counts) {
    ConditionReport rep;
    rep.key = key;
    rep.n = c.first;
    rep.accuracy = static_cast<double>(c.second) / static_cast<double>(c.first);
    rep.sem = sem_binary(rep.accuracy, rep.n);
    rep.single_observation = rep.n == 1;
    out.push_back(rep);
  }
  return out;
}

namespace {

std::map<std::string, std::string> row_fields(const CsvTable& t, std::size_t row) {
  std::map<std::string, std::string> f;
  for (std::size_t c = 0; c < t.header.size(); ++c) f[t.header[c]] = t.rows[row][c];
  return f;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::map<std::string, double> block_accuracy(const std::vector<ResponseRecord>& records) {
  std::map<std::string, std::pair<double, double>> acc;
  for (const auto& r : records) {
    auto it = r.fields.find("block");
    auto& a = acc[it == r.fields.end() ? std::string() : it->second];
    a.first += r.correct ? 1.0 : 0.0;
    a.second += 1.0;
  }
  std::map<std::string, double> out;
  for (const auto& [k, a] : acc) out[k] = a.first / a.second;
  return out;
}

void write_conditions(const std::filesystem::path& path, const std::vector<ConditionReport>& reports) {
  CsvTable t;
  t.header = {"condition", "n", "accuracy", "sem", "single_observation"};
  for (const auto& r : reports) {
    t.rows.push_back({r.key, std::to_string(r.n), fmt(r.accuracy), fmt(r.sem), r.single_observation ? "1" : "0"});
  }
  write_csv(path, t);
}

}  // namespace

std::vector<ResponseRecord> load_model_results(const CsvTable& table, const std::string& model) {
  const bool has_readout = table.has_column("readout");
  const std::size_t trial = table.column("trial_id");
  const std::size_t label = table.column("predicted_label");
  const std::size_t correct = table.column("correct");
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (has_readout && table.cell(i, "readout") != "1") continue;
    ResponseRecord r;
    r.trial_id = table.rows[i][trial];
    r.responder = model;
    r.answer = table.rows[i][label];
    r.correct = table.rows[i][correct] == "1";
    r.fields = row_fields(table, i);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResponseRecord> load_human_results(const CsvTable& table, const AnswerKey& key) {
  const std::size_t trial = table.column("trial_id");
  const std::size_t answer = table.column("raw_answer");
  const bool has_subject = table.has_column("subject_id");
  const bool has_image = table.has_column("image_id");
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    ResponseRecord r;
    r.trial_id = table.rows[i][trial];
    r.responder = has_subject ? table.cell(i, "subject_id") : std::string();
    r.answer = table.rows[i][answer];
    std::int64_t image_id = -1;
    if (has_image && !table.cell(i, "image_id").empty()) image_id = std::stoll(table.cell(i, "image_id"));
    r.correct = score_freeform(r.answer, key, r.trial_id, image_id);
    r.fields = row_fields(table, i);
    out.push_back(std::move(r));
  }
  return out;
}

Summary summarize(const std::vector<ResponseRecord>& human, const std::vector<ResponseRecord>& model,
                  const std::vector<std::string>& grouping) {
  Summary s;
  std::map<std::string, ComparisonRow> rows;
  for (auto& r : condition_report(human, grouping)) rows[r.key].human = r;
  for (auto& r : condition_report(model, grouping)) rows[r.key].model = r;
  std::vector<double> hx, my;
  for (auto& [key, row] : rows) {
    row.key = key;
    if (row.human && row.model) {
      hx.push_back(row.human->accuracy);
      my.push_back(row.model->accuracy);
    }
    s.conditions.push_back(row);
  }
  s.paired_conditions = hx.size();
  s.human_block_accuracy = block_accuracy(human);
  s.model_block_accuracy = block_accuracy(model);
  try {
    s.correlation = pearson(hx, my);
  } catch (const std::exception& e) {
    s.correlation_note = e.what();
  }
  return s;
}

void write_report(const std::filesystem::path& dir, const std::vector<ResponseRecord>& human,
                  const std::vector<ResponseRecord>& model, const std::vector<std::string>& grouping) {
  std::filesystem::create_directories(dir);
  write_conditions(dir / "human_conditions.csv", condition_report(human, grouping));
  write_conditions(dir / "model_conditions.csv", condition_report(model, grouping));
  const Summary s = summarize(human, model, grouping);

  CsvTable cmp;
  cmp.header = {"condition", "human_n", "human_accuracy", "human_sem", "model_n", "model_accuracy", "model_sem"};
  for (const auto& row : s.conditions) {
    auto cells = [](const std::optional<ConditionReport>& r) -> std::vector<std::string> {
      if (!r) return {"0", "", ""};
      return {std::to_string(r->n), fmt(r->accuracy), fmt(r->sem)};
    };
    std::vector<std::string> fields{row.key};
    for (auto& c : cells(row.human)) fields.push_back(c);
    for (auto& c : cells(row.model)) fields.push_back(c);
    cmp.rows.push_back(std::move(fields));
  }
  write_csv(dir / "comparison.csv", cmp);

  std::ofstream md(dir / "summary.md");
  md << "# Accuracy\n\n| block | human | model |\n|---|---|---|\n";
  std::map<std::string, std::pair<std::string, std::string>> blocks;
  for (const auto& [b, a] : s.human_block_accuracy) blocks[b].first = fmt(a);
  for (const auto& [b, a] : s.model_block_accuracy) blocks[b].second = fmt(a);
  for (const auto& [b, a] : blocks) md << "| " << b << " | " << a.first << " | " << a.second << " |\n";
  md << "\n# Human-model correlation\n\n| model | r | paired conditions |\n|---|---|---|\n";
  md << "| catnet | " << (s.correlation ? fmt(*s.correlation) : "undefined (" + s.correlation_note + ")") << " | "
     << s.paired_conditions << " |\n";
}

}  // namespace ctxrec::eval
