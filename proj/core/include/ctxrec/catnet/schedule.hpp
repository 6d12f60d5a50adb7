#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ctxrec/catnet/model.hpp"
#include "ctxrec/stimulus/trial.hpp"

namespace ctxrec::catnet {

inline constexpr int kDefaultHorizon = 8;

/// T_m = T / 25. Throws std::invalid_argument unless T is a positive multiple of 25.
[[nodiscard]] int exposure_to_steps(int exposure_ms, int ms_per_step = 25);

/// Asset role fed to both streams at each step; the last step is the readout.
///   sync:   T/25 x image
///   masked: T/25 x image, then mask up to `horizon`
///   async:  T1/25 x context_only, then T2/25 x object_only
/// Throws std::invalid_argument when the schedule needs more than `horizon` steps.
[[nodiscard]] std::vector<std::string> plan_step_roles(const stimulus::TimingVariant& timing,
                                                       int horizon = kDefaultHorizon);

using AssetLoader = std::function<Image(const std::string& role)>;

/// Loads trial assets from `root` (the manifest directory).
[[nodiscard]] AssetLoader directory_loader(const stimulus::TrialSpec& trial, const std::filesystem::path& root);

/// Renders every distinct role once and maps steps onto those frames.
[[nodiscard]] ScheduledInput schedule_inputs(const stimulus::TrialSpec& trial, const ModelConfig& config,
                                             const AssetLoader& load, int horizon = kDefaultHorizon);

}  // namespace ctxrec::catnet
