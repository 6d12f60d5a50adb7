#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctxrec/catnet/trainer.hpp"
#include "ctxrec/image.hpp"

namespace ctxrec::catnet {

/// Toy scenes: a noisy background whose colour follows the class with
/// probability `context_predictive`, and a small noisy square object whose
/// colour carries a weaker class signal.
struct SyntheticConfig {
  int image_size = 64;
  int classes = 8;
  std::vector<int> object_sizes{8, 32};
  double context_predictive = 0.8;
  double background_noise = 30.0;  // per-pixel std, 8-bit levels
  double object_noise = 100.0;
  double object_contrast = 0.2;    // saturation of the object palette

  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

[[nodiscard]] nlohmann::json to_json(const SyntheticConfig& c);
[[nodiscard]] SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

struct SyntheticSample {
  Image full;
  Image minimal;      // surround replaced by mid-gray
  Image incongruent;  // same object pixels on a background of another class
  Rect bbox;
  int label = 0;
  int object_size = 0;
  int background_class = 0;
  int incongruent_class = 0;
};

[[nodiscard]] std::vector<std::string> synthetic_class_names(int classes);

[[nodiscard]] SyntheticSample make_synthetic_sample(const SyntheticConfig& config, Rng& rng);

/// Sizes cycle through object_sizes, labels through classes, so every
/// (size, class) cell is balanced.
[[nodiscard]] std::vector<SyntheticSample> make_synthetic_set(const SyntheticConfig& config, int count,
                                                              std::uint64_t seed);

[[nodiscard]] std::vector<TrainingExample> full_context_examples(const std::vector<SyntheticSample>& samples);

/// Writes images plus a manifest.jsonl in the stimulus manifest format:
/// training splits carry full-context trials only; test splits add minimal
/// and incongruent variants of every scene.
void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticConfig& config, int count,
                             std::uint64_t seed, bool test_split);

}  // namespace ctxrec::catnet
