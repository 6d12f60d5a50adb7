#include "ctxrec/catnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctxrec/image_io.hpp"
#include "ctxrec/stimulus/compose.hpp"

namespace ctxrec::catnet {

using nlohmann::json;

json to_json(const SyntheticConfig& c) {
  return {{"image_size", c.image_size},
          {"classes", c.classes},
          {"object_sizes", c.object_sizes},
          {"context_predictive", c.context_predictive},
          {"background_noise", c.background_noise},
          {"object_noise", c.object_noise},
          {"object_contrast", c.object_contrast}};
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  SyntheticConfig c;
  c.image_size = j.value("image_size", c.image_size);
  c.classes = j.value("classes", c.classes);
  c.object_sizes = j.value("object_sizes", c.object_sizes);
  c.context_predictive = j.value("context_predictive", c.context_predictive);
  c.background_noise = j.value("background_noise", c.background_noise);
  c.object_noise = j.value("object_noise", c.object_noise);
  c.object_contrast = j.value("object_contrast", c.object_contrast);
  return c;
}

namespace {

struct Rgb {
  double r, g, b;
};

// HSV with value fixed at 0.5 + saturation spread; hue indexes the class.
Rgb palette(int cls, int classes, double saturation, double hue_offset) {
  const double h = std::fmod((cls + hue_offset) / classes, 1.0) * 6.0;
  const double s = saturation;
  const double v = 0.75;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  Rgb c{};
  switch (sector) {
    case 0: c = {v, t, p}; break;
    case 1: c = {q, v, p}; break;
    case 2: c = {p, v, t}; break;
    case 3: c = {p, q, v}; break;
    case 4: c = {t, p, v}; break;
    default: c = {v, p, q}; break;
  }
  return {c.r * 255.0, c.g * 255.0, c.b * 255.0};
}

std::uint8_t level(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void fill_noisy(Image& img, const Rect& r, const Rgb& colour, double noise, Rng& rng) {
  for (int y = r.y; y < r.bottom(); ++y) {
    for (int x = r.x; x < r.right(); ++x) {
      img.at(x, y, 0) = level(colour.r + noise * rng.normal());
      img.at(x, y, 1) = level(colour.g + noise * rng.normal());
      img.at(x, y, 2) = level(colour.b + noise * rng.normal());
    }
  }
}

int other_class(int cls, int classes, Rng& rng) {
  return (cls + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(classes - 1)))) % classes;
}

SyntheticSample render(const SyntheticConfig& cfg, int label, int size, Rng& rng) {
  if (size <= 0 || size > cfg.image_size) throw std::invalid_argument("object size does not fit the image");
  SyntheticSample s;
  s.label = label;
  s.object_size = size;
  s.background_class = rng.uniform() < cfg.context_predictive ? label : other_class(label, cfg.classes, rng);
  s.incongruent_class = other_class(label, cfg.classes, rng);
  const int span = cfg.image_size - size + 1;
  s.bbox = {static_cast<int>(rng.below(span)), static_cast<int>(rng.below(span)), size, size};

  const Rect whole{0, 0, cfg.image_size, cfg.image_size};
  s.full = Image(cfg.image_size, cfg.image_size, 3);
  fill_noisy(s.full, whole, palette(s.background_class, cfg.classes, 0.8, 0.0), cfg.background_noise, rng);
  fill_noisy(s.full, s.bbox, palette(label, cfg.classes, cfg.object_contrast, 0.5), cfg.object_noise, rng);

  s.minimal = Image(cfg.image_size, cfg.image_size, 3, kMidGray);
  copy_region(s.minimal, s.full, s.bbox);

  s.incongruent = Image(cfg.image_size, cfg.image_size, 3);
  fill_noisy(s.incongruent, whole, palette(s.incongruent_class, cfg.classes, 0.8, 0.0), cfg.background_noise, rng);
  copy_region(s.incongruent, s.full, s.bbox);
  return s;
}

}  // namespace

std::vector<std::string> synthetic_class_names(int classes) {
  std::vector<std::string> names;
  for (int i = 0; i < classes; ++i) names.push_back("class" + std::to_string(i));
  return names;
}

SyntheticSample make_synthetic_sample(const SyntheticConfig& config, Rng& rng) {
  const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.classes)));
  const int size = config.object_sizes.at(rng.below(config.object_sizes.size()));
  return render(config, label, size, rng);
}

std::vector<SyntheticSample> make_synthetic_set(const SyntheticConfig& config, int count, std::uint64_t seed) {
  if (config.classes < 2 || config.object_sizes.empty()) throw std::invalid_argument("bad synthetic config");
  Rng rng(seed);
  std::vector<SyntheticSample> out;
  out.reserve(static_cast<std::size_t>(count));
  const int sizes = static_cast<int>(config.object_sizes.size());
  for (int i = 0; i < count; ++i) {
    out.push_back(render(config, (i / sizes) % config.classes, config.object_sizes[i % sizes], rng));
  }
  return out;
}

std::vector<TrainingExample> full_context_examples(const std::vector<SyntheticSample>& samples) {
  std::vector<TrainingExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.full, s.bbox, s.label});
  return out;
}

void write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticConfig& config, int count,
                             std::uint64_t seed, bool test_split) {
  using namespace stimulus;
  const auto samples = make_synthetic_set(config, count, seed);
  const auto names = synthetic_class_names(config.classes);
  Manifest manifest;
  manifest.generator_config = {{"synthetic", to_json(config)}, {"count", count}, {"seed", seed},
                               {"split", test_split ? "test" : "train"}};
  manifest.dataset_digest = "synthetic";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto id = static_cast<std::int64_t>(i);
    const std::string file = "images/" + std::to_string(i) + ".png";
    save_png(dir / file, s.full);
    const TargetAnnotation target =
        make_target(id, file, config.image_size, config.image_size, s.bbox, names[s.label]);

    auto add = [&](const StimulusCondition& cond, const std::string& role_file, const Image* img) {
      TrialSpec t;
      t.block = "SYN";
      t.target = target;
      t.condition = cond;
      t.timing = TimingVariant::sync(200);
      t.phases = build_schedule(t.timing);
      t.trial_id = make_trial_id(t.block, t.condition, t.timing, id);
      std::string path = role_file;
      if (img) {
        path = "assets/" + std::string(to_string(cond.experiment)) + "/" + t.trial_id + ".image.png";
        save_png(dir / path, *img);
      }
      t.assets["image"] = path;
      manifest.entries.push_back(std::move(t));
    };
    add(StimulusCondition::full(), file, nullptr);
    if (test_split) {
      add(StimulusCondition::minimal(), "", &s.minimal);
      add(StimulusCondition::congruence_paste(Congruence::Incongruent), "", &s.incongruent);
    }
  }
  write_manifest(manifest, dir);
}

}  // namespace ctxrec::catnet
