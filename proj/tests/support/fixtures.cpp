#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <unistd.h>

#include "ctxrec/digest.hpp"
#include "ctxrec/image_io.hpp"
#include "ctxrec/stimulus/compose.hpp"

namespace ctxrec::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Image random_image(int width, int height, Rng& rng, int channels) {
  Image img(width, height, channels);
  double base[3], gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(40, 200);
    gx[c] = rng.uniform(-1.5, 1.5);
    gy[c] = rng.uniform(-1.5, 1.5);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = base[c] + gx[c] * (x - width / 2.0) + gy[c] * (y - height / 2.0) + rng.uniform(-30, 30);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return img;
}

Rect random_box_inside(int width, int height, int min_side, int max_side, Rng& rng) {
  const int w = min_side + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_side, width) - min_side + 1)));
  const int h = min_side + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_side, height) - min_side + 1)));
  const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - w + 1)));
  const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - h + 1)));
  return {x, y, w, h};
}

CocoFixture write_coco_fixture(const fs::path& dir, int images, std::uint64_t seed, int width, int height) {
  CocoFixture f;
  f.image_root = dir / "images";
  f.annotation_file = dir / "instances.json";
  f.categories = {"cat", "dog", "mouse", "cup"};
  fs::create_directories(f.image_root);
  Rng rng(seed);
  nlohmann::json doc;
  doc["categories"] = nlohmann::json::array();
  for (std::size_t i = 0; i < f.categories.size(); ++i) {
    doc["categories"].push_back({{"id", i + 1}, {"name", f.categories[i]}});
  }
  doc["images"] = nlohmann::json::array();
  doc["annotations"] = nlohmann::json::array();
  int ann_id = 1;
  for (int i = 0; i < images; ++i) {
    const int id = 100 + i;
    const std::string file = "img" + std::to_string(id) + ".png";
    save_png(f.image_root / file, random_image(width, height, rng));
    doc["images"].push_back({{"id", id}, {"file_name", file}, {"width", width}, {"height", height}});
    // One S1-sized and one S2-sized object per image, categories rotating.
    for (int k = 0; k < 2; ++k) {
      const int side = k == 0 ? 20 + static_cast<int>(rng.below(10)) : 58 + static_cast<int>(rng.below(12));
      const int x = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(width - side - 8)));
      const int y = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(height - side - 8)));
      const int cat = 1 + (i + 2 * k) % static_cast<int>(f.categories.size());
      doc["annotations"].push_back({{"id", ann_id++},
                                    {"image_id", id},
                                    {"category_id", cat},
                                    {"bbox", {x, y, side, side}},
                                    {"area", side * side},
                                    {"iscrowd", 0}});
    }
  }
  std::ofstream(f.annotation_file) << doc.dump();
  f.document = std::move(doc);
  return f;
}

stimulus::Manifest make_session_manifest(int categories, int images_per_category, const fs::path& asset_dir) {
  using namespace stimulus;
  Manifest m;
  m.dataset_digest = "test";
  std::int64_t image_id = 1;
  Rng rng(77);
  for (int c = 0; c < categories; ++c) {
    for (int k = 0; k < images_per_category; ++k, ++image_id) {
      const int side = k % 2 == 0 ? 24 : 64;
      const auto target = make_target(image_id, "img" + std::to_string(image_id) + ".png", 320, 240,
                                      {100, 80, side, side}, "cat" + std::to_string(c));
      const std::vector<std::pair<StimulusCondition, TimingVariant>> variants{
          {StimulusCondition::minimal(), TimingVariant::sync(200)},
          {StimulusCondition::full(), TimingVariant::sync(200)},
          {StimulusCondition::full(), TimingVariant::masked(50)}};
      for (const auto& [cond, timing] : variants) {
        TrialSpec t;
        t.block = timing.kind == TimingKind::Masked ? "C2" : "A1";
        t.condition = cond;
        t.timing = timing;
        t.target = target;
        t.trial_id = make_trial_id(t.block, cond, timing, image_id);
        t.phases = build_schedule(timing);
        const std::string dir = "assets/" + std::string(to_string(cond.experiment)) + "/";
        t.assets["image"] = dir + t.trial_id + ".image.png";
        if (timing.kind == TimingKind::Masked) t.assets["mask"] = dir + t.trial_id + ".mask.png";
        if (!asset_dir.empty()) {
          for (const auto& [role, rel] : t.assets) save_png(asset_dir / rel, random_image(16, 12, rng));
        }
        m.entries.push_back(std::move(t));
      }
    }
  }
  return m;
}

std::vector<std::pair<std::string, std::string>> snapshot_tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).generic_string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ctxrec::testing
