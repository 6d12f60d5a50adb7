#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "ctxrec/image.hpp"
#include "ctxrec/rng.hpp"
#include "ctxrec/stimulus/trial.hpp"

namespace ctxrec::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ctxrec");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Smooth colour gradients plus uniform noise: enough structure that
/// transforms are not accidentally trivial.
[[nodiscard]] Image random_image(int width, int height, Rng& rng, int channels = 3);

[[nodiscard]] Rect random_box_inside(int width, int height, int min_side, int max_side, Rng& rng);

/// Writes a COCO-style dataset: `images` random PNGs with a few annotated
/// objects each, sized to land in the S1/S2 bins. Returns the annotation file.
struct CocoFixture {
  std::filesystem::path annotation_file;
  std::filesystem::path image_root;
  std::vector<std::string> categories;
  nlohmann::json document;
};

[[nodiscard]] CocoFixture write_coco_fixture(const std::filesystem::path& dir, int images, std::uint64_t seed,
                                             int width = 160, int height = 128);

/// In-memory manifest for session tests: `categories` x `images_per_category`
/// targets (alternating S1/S2), each rendered as A1 minimal and full at T=200
/// plus one C2 masked full trial. No files are written unless `asset_dir` is set,
/// in which case every asset is a small PNG under it.
[[nodiscard]] stimulus::Manifest make_session_manifest(int categories, int images_per_category,
                                                       const std::filesystem::path& asset_dir = {});

/// Bytes of every regular file under `dir`, keyed by relative path.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> snapshot_tree(const std::filesystem::path& dir);

}  // namespace ctxrec::testing
