#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "ctxrec/catnet/checkpoint.hpp"
#include "ctxrec/catnet/evaluate.hpp"
#include "ctxrec/catnet/synthetic.hpp"
#include "ctxrec/catnet/trainer.hpp"
#include "ctxrec/digest.hpp"
#include "ctxrec/eval/report.hpp"
#include "ctxrec/image_io.hpp"
#include "ctxrec/service/http_api.hpp"
#include "ctxrec/stimulus/compose.hpp"

namespace ctxrec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

// ---------------------------------------------------------------- generate

void add_generate(CLI::App& app) {
  struct Opts {
    fs::path annotations, images, out;
    std::string experiments = "A1,A2,B1,B2,B3,B4,B5,C1,C2,C3";
    std::string sizes = "S1,S2,S4,S8";
    std::string categories;
    std::uint64_t seed = 0;
    int targets = 0;
    std::string metric = "geometric_mean";
    bool exclude_border = false;
    unsigned threads = 1;
    int mask_ms = 500;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("generate", "Select targets and render every experiment condition");
  cmd->add_option("--annotations", o->annotations, "COCO instance annotation file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--images", o->images, "Image root directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--experiments", o->experiments, "Comma-separated blocks (A1,A2,B1..B5,C1..C3)");
  cmd->add_option("--seed", o->seed, "Master seed");
  cmd->add_option("--sizes", o->sizes, "Comma-separated size bins");
  cmd->add_option("--categories", o->categories, "Comma-separated label set (default: all in the file)");
  cmd->add_option("--targets", o->targets, "Total targets (default: one per size x category cell)");
  cmd->add_option("--extent-metric", o->metric, "geometric_mean | longest_side");
  cmd->add_flag("--exclude-border", o->exclude_border, "Skip objects touching the image border");
  cmd->add_option("--threads", o->threads, "Render threads");
  cmd->add_option("--mask-ms", o->mask_ms, "Mask duration in C2 trials");
  cmd->callback([o] {
    using namespace stimulus;
    IngestOptions ingest_opts;
    ingest_opts.metric = parse_extent_metric(o->metric);
    ingest_opts.categories = split(o->categories);
    const IngestResult ingest = ingest_annotations(o->annotations, o->images, ingest_opts);
    std::cerr << "ingested " << ingest.targets.size() << " objects from " << ingest.images.size() << " images ("
              << ingest.errors.size() << " entry errors)\n";

    SelectionConfig sel;
    sel.sizes.clear();
    for (const auto& s : split(o->sizes)) sel.sizes.push_back(parse_size_bin(s));
    sel.categories = ingest.label_set;
    sel.exclude_border = o->exclude_border;
    sel.total_targets = o->targets > 0 ? o->targets : static_cast<int>(sel.sizes.size() * sel.categories.size());
    ManifestSkeleton skeleton;
    try {
      skeleton = select_targets(ingest.targets, sel, o->seed);
    } catch (const InfeasibleSelection& e) {
      std::cerr << e.what() << '\n';
      for (const auto& c : e.cells()) {
        std::cerr << "  " << to_string(c.size) << " / " << c.category << ": need " << c.required << ", have "
                  << c.available << '\n';
      }
      throw;
    }

    const auto blocks = split(o->experiments);
    const auto plan = plan_experiments(blocks);
    RenderContext ctx;
    ctx.image_root = o->images;
    ctx.out_dir = o->out;
    ctx.images = ingest.images;
    ctx.seed = o->seed;
    ctx.threads = o->threads;
    ctx.timing.mask_ms = o->mask_ms;
    ComposeResult result = compose_trial_manifest(skeleton, plan, ctx);
    result.manifest.dataset_digest = sha256_file(o->annotations);
    result.manifest.generator_config = {
        {"annotations", o->annotations.string()}, {"images", o->images.string()},
        {"experiments", blocks},                  {"sizes", split(o->sizes)},
        {"categories", sel.categories},           {"targets", sel.total_targets},
        {"seed", o->seed},                        {"extent_metric", o->metric},
        {"exclude_border", o->exclude_border},    {"background", static_cast<int>(ctx.background)},
        {"timing", {{"fixation_ms", ctx.timing.fixation_ms}, {"cue_ms", ctx.timing.cue_ms}, {"mask_ms", ctx.timing.mask_ms}}},
        {"dropped", result.dropped.size()}};
    write_manifest(result.manifest, o->out);

    json key = json::object();
    for (const auto& t : skeleton.targets) key[eval::image_key(t.image_id)] = {t.category};
    std::ofstream(o->out / "answer_key.json") << key.dump(2) << '\n';
    std::ofstream dropped(o->out / "dropped.jsonl");
    for (const auto& d : result.dropped) dropped << json{{"trial_id", d.trial_id}, {"reason", d.reason}}.dump() << '\n';
    std::cerr << "wrote " << result.manifest.entries.size() << " trials (" << result.dropped.size()
              << " dropped) to " << o->out << '\n';
  });
}

// ---------------------------------------------------------------- synth

void add_synth(CLI::App& app) {
  struct Opts {
    fs::path out;
    fs::path config;
    int count = 2000;
    std::uint64_t seed = 1;
    bool test = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("synth", "Write the synthetic desk-scale dataset as a manifest");
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--config", o->config, "Synthetic config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--count", o->count, "Number of scenes");
  cmd->add_option("--seed", o->seed, "Seed");
  cmd->add_flag("--test", o->test, "Add minimal and incongruent variants of every scene");
  cmd->callback([o] {
    const auto cfg = o->config.empty() ? catnet::SyntheticConfig{} : catnet::synthetic_config_from_json(read_json(o->config));
    catnet::write_synthetic_dataset(o->out, cfg, o->count, o->seed, o->test);
    std::cerr << "wrote " << o->count << " scenes to " << o->out << '\n';
  });
}

// ---------------------------------------------------------------- train

namespace {

// Full-context trials, one per image. Fills model_json["classes"] from the
// data when the config does not list them.
std::vector<catnet::TrainingExample> load_training_set(const fs::path& dir, json& model_json,
                                                       catnet::ModelConfig& config) {
  using namespace stimulus;
  const Manifest manifest = read_manifest(dir / "manifest.jsonl");
  std::vector<const TrialSpec*> chosen;
  std::set<std::int64_t> images;
  for (const auto& t : manifest.entries) {
    if (t.condition.experiment != Experiment::A1Full || t.timing.kind != TimingKind::Sync) continue;
    if (!t.assets.contains("image") || !images.insert(t.target.image_id).second) continue;
    chosen.push_back(&t);
  }
  if (chosen.empty()) throw std::runtime_error("no full-context trials in " + (dir / "manifest.jsonl").string());
  if (!model_json.contains("classes")) {
    std::set<std::string> labels;
    for (const auto* t : chosen) labels.insert(t->target.category);
    model_json["classes"] = std::vector<std::string>(labels.begin(), labels.end());
  }
  config = catnet::model_config_from_json(model_json);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < config.classes.size(); ++i) index[config.classes[i]] = static_cast<int>(i);
  std::vector<catnet::TrainingExample> data;
  for (const auto* t : chosen) {
    auto it = index.find(t->target.category);
    if (it == index.end()) continue;
    data.push_back({load_image(dir / t->assets.at("image")), t->target.bbox, it->second});
  }
  return data;
}

}  // namespace

void add_train(CLI::App& app) {
  struct Opts {
    fs::path data, config, out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "Train CATNet on full-context trials of a manifest directory");
  cmd->add_option("--data", o->data, "Directory with manifest.jsonl")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--config", o->config, "JSON with \"model\" and \"train\" sections")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Checkpoint path")->required();
  cmd->callback([o] {
    const json cfg = read_json(o->config);
    json model_json = cfg.value("model", json::object());
    const catnet::TrainConfig train_cfg = catnet::train_config_from_json(cfg.value("train", json::object()));
    catnet::ModelConfig model_cfg;
    const auto data = load_training_set(o->data, model_json, model_cfg);
    catnet::CatNet model(model_cfg, train_cfg.seed);
    if (cfg.contains("backbone_weights")) {
      const fs::path weights = cfg["backbone_weights"].get<std::string>();
      const auto n = catnet::assign_tensors(model.params(), catnet::read_checkpoint_tensors(weights), "backbone.");
      std::cerr << "loaded " << n << " backbone tensors from " << weights << '\n';
    }
    std::cerr << "training on " << data.size() << " examples, " << model.config().num_classes() << " classes, "
              << model.params().count() << " parameters\n";
    const auto result = catnet::train(model, data, train_cfg, [](int it, double loss) {
      std::cerr << "iter " << it << " loss " << loss << '\n';
    });
    catnet::save_checkpoint(o->out, model.config(), model.params(), result.loss_curve,
                            {{"data", o->data.string()}, {"examples", data.size()}, {"train", catnet::to_json(train_cfg)}});
    std::cerr << "saved " << o->out << '\n';
  });
}

// ---------------------------------------------------------------- eval

void add_eval(CLI::App& app) {
  struct Opts {
    fs::path ckpt, manifest, out, attention_dir;
    int horizon = catnet::kDefaultHorizon;
    unsigned threads = 1;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("eval", "Run a checkpoint over every manifest trial");
  cmd->add_option("--ckpt", o->ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o->manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Results CSV")->required();
  cmd->add_option("--horizon", o->horizon, "Readout horizon in steps for masked/async schedules");
  cmd->add_option("--threads", o->threads, "Worker threads");
  cmd->add_option("--attention-dir", o->attention_dir, "Dump per-trial attention maps here");
  cmd->callback([o] {
    const auto ck = catnet::load_checkpoint(o->ckpt);
    const catnet::CatNet model(ck.config, ck.params);
    const auto manifest = stimulus::read_manifest(o->manifest);
    catnet::EvalOptions opts{o->horizon, o->threads, o->attention_dir};
    const auto result = catnet::evaluate_manifest(model, manifest, o->manifest.parent_path(), opts);
    catnet::write_results_csv(o->out, result.rows);
    for (const auto& s : result.skipped) std::cerr << "skipped " << s.trial_id << ": " << s.reason << '\n';
    std::cerr << "evaluated " << manifest.entries.size() - result.skipped.size() << " trials ("
              << result.skipped.size() << " skipped) -> " << o->out << '\n';
  });
}

// ---------------------------------------------------------------- report

void add_report(CLI::App& app) {
  struct Opts {
    fs::path model_results, human_results, key, out, synonyms;
    std::string group_by;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("report", "Per-condition accuracy, SEM and human-model correlation");
  cmd->add_option("--model-results", o->model_results, "Results CSV from eval")->required()->check(CLI::ExistingFile);
  cmd->add_option("--human-results", o->human_results, "Response export CSV")->check(CLI::ExistingFile);
  cmd->add_option("--key", o->key, "Answer key JSON")->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--synonyms", o->synonyms, "Synonym TSV (default: shipped table)")->check(CLI::ExistingFile);
  cmd->add_option("--group-by", o->group_by, "Comma-separated grouping columns");
  cmd->callback([o] {
    const auto grouping = o->group_by.empty() ? eval::default_grouping() : split(o->group_by);
    const auto model = eval::load_model_results(eval::read_csv(o->model_results));
    std::vector<eval::ResponseRecord> human;
    if (!o->human_results.empty()) {
      if (o->key.empty()) throw std::runtime_error("--human-results requires --key");
      const eval::SynonymTable synonyms =
          o->synonyms.empty() ? eval::SynonymTable::builtin() : eval::SynonymTable::load(o->synonyms);
      const auto key = eval::AnswerKey::load(o->key, synonyms);
      human = eval::load_human_results(eval::read_csv(o->human_results), key);
    }
    eval::write_report(o->out, human, model, grouping);
    std::cerr << "report written to " << o->out << '\n';
  });
}

// ---------------------------------------------------------------- serve

namespace {
service::HttpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

void add_serve(CLI::App& app) {
  struct Opts {
    fs::path manifest, assets, store;
    std::string host = "127.0.0.1";
    int port = 8080;
    int max_per_category = 2;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("serve", "Serve sessions, trials and assets to the trial runner");
  cmd->add_option("--manifest", o->manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  cmd->add_option("--assets", o->assets, "Directory the manifest asset paths are relative to")
      ->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--store", o->store, "Append-only response log")->required();
  cmd->add_option("--port", o->port, "Port (0 picks a free one)");
  cmd->add_option("--host", o->host, "Bind address");
  cmd->add_option("--max-per-category", o->max_per_category, "Per-session category cap");
  cmd->callback([o] {
    service::ResponseStore store(o->store);
    service::SessionManager::Options opts;
    opts.max_per_category = o->max_per_category;
    service::SessionManager sessions(stimulus::read_manifest(o->manifest), store, opts);
    service::HttpServer server(sessions, o->assets);
    const int port = server.bind(o->host, o->port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << o->host << ":" << port << " (" << sessions.session_ids().size()
              << " sessions restored)" << std::endl;
    server.listen();
    g_server = nullptr;
  });
}

}  // namespace ctxrec::cli
