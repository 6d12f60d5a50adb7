#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxrec/stimulus/selection.hpp"
#include "ctxrec/stimulus/trial.hpp"

namespace ctxrec::stimulus {

/// A condition/timing pair scheduled under an experiment block name.
struct PlannedCondition {
  std::string block;
  StimulusCondition condition;
  TimingVariant timing;
};

/// Expands block names (A1, A2, B1..B5, C1..C3) into every condition and
/// timing variant they contain. B and C blocks carry minimal/full controls.
[[nodiscard]] std::vector<PlannedCondition> plan_experiments(std::span<const std::string> blocks);

struct RenderContext {
  std::filesystem::path image_root;
  std::filesystem::path out_dir;
  /// Every known source image; donors for congruence pasting come from here.
  std::map<std::int64_t, SourceImage> images;
  TimingConfig timing;
  std::uint64_t seed = 0;
  std::uint8_t background = kMidGray;
  unsigned threads = 1;
};

struct DroppedTrial {
  std::string trial_id;
  std::string reason;
};

struct ComposeResult {
  Manifest manifest;
  std::vector<DroppedTrial> dropped;
};

[[nodiscard]] std::string make_trial_id(const std::string& block, const StimulusCondition& condition,
                                        const TimingVariant& timing, std::int64_t image_id);

/// Renders every (target, planned condition) pair to PNG assets under
/// out_dir/assets/<experiment>/ and returns the manifest. Unrenderable pairs
/// (infeasible CO window, multi-piece jigsaw, no donor, I/O failure) are
/// dropped with a reason instead of failing the run.
[[nodiscard]] ComposeResult compose_trial_manifest(const ManifestSkeleton& skeleton,
                                                   std::span<const PlannedCondition> conditions,
                                                   const RenderContext& context);

}  // namespace ctxrec::stimulus
