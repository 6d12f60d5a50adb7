#include "ctxrec/catnet/schedule.hpp"

#include <map>
#include <stdexcept>

#include "ctxrec/image_io.hpp"

namespace ctxrec::catnet {

int exposure_to_steps(int exposure_ms, int ms_per_step) {
  if (exposure_ms <= 0) throw std::invalid_argument("exposure must be positive");
  if (exposure_ms % ms_per_step != 0) {
    throw std::invalid_argument("exposure " + std::to_string(exposure_ms) + " ms is not a multiple of " +
                                std::to_string(ms_per_step) + " ms");
  }
  return exposure_ms / ms_per_step;
}

std::vector<std::string> plan_step_roles(const stimulus::TimingVariant& timing, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::vector<std::string> roles;
  switch (timing.kind) {
    case stimulus::TimingKind::Sync:
      roles.assign(exposure_to_steps(timing.exposure_ms), "image");
      break;
    case stimulus::TimingKind::Masked:
      roles.assign(exposure_to_steps(timing.exposure_ms), "image");
      if (static_cast<int>(roles.size()) < horizon) roles.resize(horizon, "mask");
      break;
    case stimulus::TimingKind::Async:
      roles.assign(exposure_to_steps(timing.t1_ms), "context_only");
      roles.resize(roles.size() + exposure_to_steps(timing.t2_ms), "object_only");
      break;
  }
  if (static_cast<int>(roles.size()) > horizon) {
    throw std::invalid_argument("schedule " + timing.key() + " needs " + std::to_string(roles.size()) +
                                " steps, horizon is " + std::to_string(horizon));
  }
  return roles;
}

AssetLoader directory_loader(const stimulus::TrialSpec& trial, const std::filesystem::path& root) {
  return [assets = trial.assets, root, id = trial.trial_id](const std::string& role) {
    auto it = assets.find(role);
    if (it == assets.end()) throw std::runtime_error("trial " + id + " has no '" + role + "' asset");
    return load_image(root / it->second);
  };
}

ScheduledInput schedule_inputs(const stimulus::TrialSpec& trial, const ModelConfig& config, const AssetLoader& load,
                               int horizon) {
  const std::vector<std::string> roles = plan_step_roles(trial.timing, horizon);
  ScheduledInput input;
  std::map<std::string, int> frame_of_role;
  for (const auto& role : roles) {
    auto [it, inserted] = frame_of_role.try_emplace(role, static_cast<int>(input.frames.size()));
    if (inserted && !trial.assets.contains(role)) {
      throw std::invalid_argument("trial " + trial.trial_id + " has no '" + role + "' asset");
    }
    if (inserted) input.frames.push_back(preprocess_streams(load(role), trial.target.bbox, config));
    input.step_frames.push_back(it->second);
  }
  return input;
}

}  // namespace ctxrec::catnet
