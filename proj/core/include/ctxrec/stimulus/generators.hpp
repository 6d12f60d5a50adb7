#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ctxrec/image.hpp"
#include "ctxrec/stimulus/annotation.hpp"

namespace ctxrec::stimulus {

// --- Exp A: amount of context ------------------------------------------------

/// Keeps the bbox pixels, fills everything else with `background`.
[[nodiscard]] Image gen_minimal_context(const Image& image, const Rect& bbox,
                                        std::uint8_t background = kMidGray);

struct CoCrop {
  Rect window;
  Image image;  // the window's pixels
  double achieved_ratio = 0.0;
  bool clamped = false;     // window had to be cut to the image bounds
  bool infeasible = false;  // achieved ratio misses the request by more than 2%
};

/// Context-object crop: a window around the bbox whose area excluding the bbox
/// is `co_ratio` times the bbox area. co_ratio 0 returns the bbox itself.
[[nodiscard]] CoCrop gen_co_crop(const Image& image, const Rect& bbox, int co_ratio);

/// Places the window's pixels on a uniform canvas of the source size, at
/// their original location.
[[nodiscard]] Image render_window(const Image& image, const Rect& window,
                                  std::uint8_t background = kMidGray);

// --- Exp B: context content --------------------------------------------------

enum class BlurRegion { Context, Object };

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
[[nodiscard]] std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with mirror (reflect-101) boundaries, no rounding.
[[nodiscard]] ImageF gaussian_blur(const ImageF& image, double sigma);

/// Blurs one region and leaves the other bit-exact.
[[nodiscard]] Image gen_blur(const Image& image, const Rect& bbox, int sigma, BlurRegion region);

/// Per-channel phase scramble: amplitude spectrum kept, phases rotated by a
/// random field shared across channels (DC phase untouched).
[[nodiscard]] ImageF phase_scramble(const ImageF& image, std::uint64_t seed);

/// Surround replaced by the phase-scrambled source, object pasted back.
[[nodiscard]] Image gen_texture_context(const Image& image, const Rect& bbox, std::uint64_t seed);

/// Whole-image phase-scrambled texture, used as the backward mask.
[[nodiscard]] Image gen_texture_mask(const Image& image, std::uint64_t seed);

/// Piece geometry for a grid x grid jigsaw; the last row/column absorbs the
/// remainder pixels.
[[nodiscard]] Rect jigsaw_piece(int width, int height, int grid, int row, int col);

struct JigsawResult {
  bool rejected = false;  // bbox spans more than one piece
  Image image;
  int target_piece = -1;
  /// source_of[p] = index of the piece whose content lands at position p.
  std::vector<int> source_of;
};

[[nodiscard]] JigsawResult gen_jigsaw(const Image& image, const Rect& bbox, int grid, std::uint64_t seed);

enum class Congruence { Congruent, Incongruent };

/// Index into `pool` of the donor scene, or nullopt when none qualifies. A donor
/// must differ from the source image, fit the bbox, and contain (congruent) or
/// lack (incongruent) the target category.
[[nodiscard]] std::optional<std::size_t> choose_donor(const TargetAnnotation& target,
                                                      std::span<const SourceImage> pool,
                                                      Congruence congruence, std::uint64_t seed);

struct CongruencePaste {
  Image image;
  std::int64_t donor_image_id = 0;
};

using ImageLoader = std::function<Image(const SourceImage&)>;

[[nodiscard]] std::optional<CongruencePaste> gen_congruence_paste(const Image& source,
                                                                  const TargetAnnotation& target,
                                                                  std::span<const SourceImage> donor_pool,
                                                                  Congruence congruence, std::uint64_t seed,
                                                                  const ImageLoader& load);

// --- Exp C3: asynchronous split ----------------------------------------------

/// Context-only part: bbox region filled with `background`.
[[nodiscard]] Image gen_context_only(const Image& image, const Rect& bbox,
                                     std::uint8_t background = kMidGray);

}  // namespace ctxrec::stimulus
