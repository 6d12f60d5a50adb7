#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctxrec/stimulus/annotation.hpp"
#include "ctxrec/stimulus/generators.hpp"

namespace ctxrec::stimulus {

enum class Experiment { A1Minimal, A1Full, A2Co, B1BlurContext, B2BlurObject, B3Texture, B4Jigsaw, B5Congruence };

[[nodiscard]] std::string_view to_string(Experiment e);
[[nodiscard]] Experiment parse_experiment(std::string_view text);
[[nodiscard]] std::string_view to_string(Congruence c);
[[nodiscard]] Congruence parse_congruence(std::string_view text);

/// One experimental manipulation. Only the parameters of `experiment` are set.
struct StimulusCondition {
  Experiment experiment = Experiment::A1Full;
  std::optional<int> co_ratio;  // A2: {0, 2, 4, 8, 16, 128}
  std::optional<int> sigma;     // B1/B2: {2, 4, 8, 16, 32}
  std::optional<int> grid;      // B4: {2, 4, 8}
  std::optional<Congruence> congruence;  // B5
  std::uint64_t seed = 0;

  static StimulusCondition minimal(std::uint64_t seed = 0);
  static StimulusCondition full(std::uint64_t seed = 0);
  static StimulusCondition co(int ratio, std::uint64_t seed = 0);
  static StimulusCondition blur_context(int sigma, std::uint64_t seed = 0);
  static StimulusCondition blur_object(int sigma, std::uint64_t seed = 0);
  static StimulusCondition texture(std::uint64_t seed = 0);
  static StimulusCondition jigsaw(int grid, std::uint64_t seed = 0);
  static StimulusCondition congruence_paste(Congruence c, std::uint64_t seed = 0);

  /// Compact key such as "A2_co/co=8"; stable across runs.
  [[nodiscard]] std::string key() const;

  friend bool operator==(const StimulusCondition&, const StimulusCondition&) = default;
};

/// Throws std::invalid_argument when parameters are missing, extra, or out of range.
void validate(const StimulusCondition& condition);

enum class TimingKind { Sync, Masked, Async };

[[nodiscard]] std::string_view to_string(TimingKind k);

/// Exposure schedule variant: synchronous T, T followed by a mask, or a
/// context-only T1 followed by object-only T2.
struct TimingVariant {
  TimingKind kind = TimingKind::Sync;
  int exposure_ms = 200;
  int t1_ms = 0;
  int t2_ms = 0;

  static TimingVariant sync(int t_ms) { return {TimingKind::Sync, t_ms, 0, 0}; }
  static TimingVariant masked(int t_ms) { return {TimingKind::Masked, t_ms, 0, 0}; }
  static TimingVariant async(int t1, int t2) { return {TimingKind::Async, 0, t1, t2}; }

  [[nodiscard]] std::string key() const;

  friend bool operator==(const TimingVariant&, const TimingVariant&) = default;
};

struct TimingConfig {
  int fixation_ms = 500;
  int cue_ms = 1000;
  int mask_ms = 500;
};

struct Phase {
  std::string name;  // fixation | cue | image | mask | context_only | object_only
  int ms = 0;

  friend bool operator==(const Phase&, const Phase&) = default;
};

/// Durations must be positive multiples of 25 ms; throws otherwise.
[[nodiscard]] std::vector<Phase> build_schedule(const TimingVariant& variant, const TimingConfig& config = {});

/// A renderable trial.
struct TrialSpec {
  std::string trial_id;
  std::string block;  // A1, A2, B1..B5, C1..C3
  TargetAnnotation target;
  StimulusCondition condition;
  TimingVariant timing;
  std::vector<Phase> phases;
  std::map<std::string, std::string> assets;  // role -> path relative to the output dir
  std::optional<double> achieved_co_ratio;
  std::optional<std::int64_t> donor_image_id;

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

[[nodiscard]] nlohmann::json to_json(const TargetAnnotation& t);
[[nodiscard]] TargetAnnotation target_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const StimulusCondition& c);
[[nodiscard]] StimulusCondition condition_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const TrialSpec& t);
[[nodiscard]] TrialSpec trial_from_json(const nlohmann::json& j);

struct Manifest {
  std::vector<TrialSpec> entries;
  std::string dataset_digest;
  nlohmann::json generator_config = nlohmann::json::object();
};

/// Writes manifest.jsonl and generator_config.json into `dir`.
void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);

/// Reads a manifest.jsonl file (and generator_config.json next to it if present).
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& manifest_file);

}  // namespace ctxrec::stimulus

namespace ctxrec::stimulus {

/// Column names describing a trial's condition, shared by the model results
/// CSV and the human response export.
[[nodiscard]] const std::vector<std::string>& condition_columns();

/// Values for condition_columns(), in the same order. Absent parameters are empty.
[[nodiscard]] std::vector<std::string> condition_values(const TrialSpec& trial);

}  // namespace ctxrec::stimulus
