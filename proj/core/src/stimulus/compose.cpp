#include "ctxrec/stimulus/compose.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <thread>

#include "ctxrec/image_io.hpp"
#include "ctxrec/rng.hpp"

namespace ctxrec::stimulus {

namespace {

void add_controls(std::vector<PlannedCondition>& out, const std::string& block, const TimingVariant& timing) {
  out.push_back({block, StimulusCondition::minimal(), timing});
  out.push_back({block, StimulusCondition::full(), timing});
}

std::string sanitize(std::string_view text) {
  std::string out;
  for (char ch : text) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
    out.push_back(keep ? ch : '-');
  }
  return out;
}

struct Rendered {
  std::optional<TrialSpec> trial;
  std::optional<DroppedTrial> dropped;
};

class TrialRenderer {
 public:
  TrialRenderer(const RenderContext& ctx, std::span<const SourceImage> donors) : ctx_(ctx), donors_(donors) {}

  Rendered render(const TargetAnnotation& target, const Image& source, const PlannedCondition& plan) const {
    TrialSpec trial;
    trial.block = plan.block;
    trial.target = target;
    trial.condition = plan.condition;
    trial.timing = plan.timing;
    trial.trial_id = make_trial_id(plan.block, plan.condition, plan.timing, target.image_id);
    trial.condition.seed = derive_seed(ctx_.seed, trial.trial_id);

    try {
      validate(trial.condition);
      trial.phases = build_schedule(plan.timing, ctx_.timing);
      std::string reason;
      auto stimulus = render_stimulus(trial, source, reason);
      if (!stimulus) return {std::nullopt, DroppedTrial{trial.trial_id, reason}};

      const auto dir = std::filesystem::path("assets") / std::string(to_string(trial.condition.experiment));
      auto emit = [&](const std::string& role, const Image& img) {
        const auto rel = dir / (trial.trial_id + "." + role + ".png");
        save_png(ctx_.out_dir / rel, img);
        trial.assets[role] = rel.generic_string();
      };

      switch (plan.timing.kind) {
        case TimingKind::Sync:
          emit("image", *stimulus);
          break;
        case TimingKind::Masked:
          emit("image", *stimulus);
          emit("mask", gen_texture_mask(source, derive_seed(trial.condition.seed, "mask")));
          break;
        case TimingKind::Async:
          emit("context_only", gen_context_only(*stimulus, target.bbox, ctx_.background));
          emit("object_only", gen_minimal_context(*stimulus, target.bbox, ctx_.background));
          break;
      }
    } catch (const std::exception& e) {
      return {std::nullopt, DroppedTrial{trial.trial_id, e.what()}};
    }
    return {std::move(trial), std::nullopt};
  }

 private:
  std::optional<Image> render_stimulus(TrialSpec& trial, const Image& source, std::string& drop_reason) const {
    const auto& c = trial.condition;
    const Rect& bbox = trial.target.bbox;
    switch (c.experiment) {
      case Experiment::A1Minimal:
        return gen_minimal_context(source, bbox, ctx_.background);
      case Experiment::A1Full:
        return source;
      case Experiment::A2Co: {
        auto cropped = gen_co_crop(source, bbox, *c.co_ratio);
        trial.achieved_co_ratio = cropped.achieved_ratio;
        if (cropped.infeasible) {
          drop_reason = "infeasible: CO window reaches only ratio " + std::to_string(cropped.achieved_ratio);
          return std::nullopt;
        }
        return render_window(source, cropped.window, ctx_.background);
      }
      case Experiment::B1BlurContext:
        return gen_blur(source, bbox, *c.sigma, BlurRegion::Context);
      case Experiment::B2BlurObject:
        return gen_blur(source, bbox, *c.sigma, BlurRegion::Object);
      case Experiment::B3Texture:
        return gen_texture_context(source, bbox, c.seed);
      case Experiment::B4Jigsaw: {
        auto result = gen_jigsaw(source, bbox, *c.grid, c.seed);
        if (result.rejected) {
          drop_reason = "rejected: object spans more than one jigsaw piece";
          return std::nullopt;
        }
        return std::move(result.image);
      }
      case Experiment::B5Congruence: {
        const auto loader = [&](const SourceImage& d) { return load_image(ctx_.image_root / d.file_name); };
        auto pasted = gen_congruence_paste(source, trial.target, donors_, *c.congruence, c.seed, loader);
        if (!pasted) {
          drop_reason = "no eligible donor image";
          return std::nullopt;
        }
        trial.donor_image_id = pasted->donor_image_id;
        return std::move(pasted->image);
      }
    }
    return std::nullopt;
  }

  const RenderContext& ctx_;
  std::span<const SourceImage> donors_;
};

}  // namespace

std::vector<PlannedCondition> plan_experiments(std::span<const std::string> blocks) {
  std::vector<PlannedCondition> out;
  const auto t200 = TimingVariant::sync(200);
  for (const auto& block : blocks) {
    if (block == "A1") {
      add_controls(out, block, t200);
    } else if (block == "A2") {
      for (int co : {0, 2, 4, 8, 16, 128}) out.push_back({block, StimulusCondition::co(co), t200});
    } else if (block == "B1" || block == "B2") {
      add_controls(out, block, t200);
      for (int s : {2, 4, 8, 16, 32}) {
        out.push_back({block, block == "B1" ? StimulusCondition::blur_context(s) : StimulusCondition::blur_object(s), t200});
      }
    } else if (block == "B3") {
      add_controls(out, block, t200);
      out.push_back({block, StimulusCondition::texture(), t200});
    } else if (block == "B4") {
      add_controls(out, block, t200);
      for (int g : {2, 4, 8}) out.push_back({block, StimulusCondition::jigsaw(g), t200});
    } else if (block == "B5") {
      add_controls(out, block, t200);
      out.push_back({block, StimulusCondition::congruence_paste(Congruence::Congruent), t200});
      out.push_back({block, StimulusCondition::congruence_paste(Congruence::Incongruent), t200});
    } else if (block == "C1" || block == "C2") {
      for (int t : {50, 100, 200}) {
        add_controls(out, block, block == "C1" ? TimingVariant::sync(t) : TimingVariant::masked(t));
      }
    } else if (block == "C3") {
      for (int t : {50, 100, 200}) add_controls(out, block, TimingVariant::sync(t));
      for (int t1 : {25, 50, 100, 200}) {
        for (int t2 : {50, 100, 200}) out.push_back({block, StimulusCondition::full(), TimingVariant::async(t1, t2)});
      }
    } else {
      throw std::invalid_argument("unknown experiment block: " + block);
    }
  }
  return out;
}

std::string make_trial_id(const std::string& block, const StimulusCondition& condition, const TimingVariant& timing,
                          std::int64_t image_id) {
  return sanitize(block) + "." + sanitize(condition.key()) + "." + sanitize(timing.key()) + ".img" +
         std::to_string(image_id);
}

ComposeResult compose_trial_manifest(const ManifestSkeleton& skeleton, std::span<const PlannedCondition> conditions,
                                     const RenderContext& context) {
  std::vector<SourceImage> donors;
  donors.reserve(context.images.size());
  for (const auto& [id, info] : context.images) donors.push_back(info);
  const TrialRenderer renderer(context, donors);

  const auto& targets = skeleton.targets;
  std::vector<std::vector<Rendered>> per_target(targets.size());

  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < targets.size(); i += step) {
      auto& slot = per_target[i];
      Image source;
      try {
        source = load_image(context.image_root / targets[i].file_name);
      } catch (const std::exception& e) {
        for (const auto& plan : conditions) {
          slot.push_back({std::nullopt, DroppedTrial{make_trial_id(plan.block, plan.condition, plan.timing,
                                                                   targets[i].image_id),
                                                     e.what()}});
        }
        continue;
      }
      for (const auto& plan : conditions) slot.push_back(renderer.render(targets[i], source, plan));
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(context.threads, static_cast<unsigned>(targets.size())));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  ComposeResult result;
  for (auto& slot : per_target) {
    for (auto& r : slot) {
      if (r.trial) result.manifest.entries.push_back(std::move(*r.trial));
      if (r.dropped) result.dropped.push_back(std::move(*r.dropped));
    }
  }
  return result;
}

}  // namespace ctxrec::stimulus
