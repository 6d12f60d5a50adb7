#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ctxrec {

/// Axis-aligned integer rectangle in pixel coordinates. `x`/`y` are the
/// top-left corner; the rectangle covers [x, x + width) x [y, y + height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  [[nodiscard]] int right() const { return x + width; }
  [[nodiscard]] int bottom() const { return y + height; }
  [[nodiscard]] long long area() const { return static_cast<long long>(width) * height; }
  [[nodiscard]] bool empty() const { return width <= 0 || height <= 0; }

  [[nodiscard]] bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }
  [[nodiscard]] bool contains(const Rect& r) const {
    return r.x >= x && r.y >= y && r.right() <= right() && r.bottom() <= bottom();
  }
  [[nodiscard]] bool intersects(const Rect& r) const {
    return x < r.right() && r.x < right() && y < r.bottom() && r.y < bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Interleaved row-major image. Channel count is 1 (mask) or 3 (RGB).
template <typename T>
class BasicImage {
 public:
  using value_type = T;

  BasicImage() = default;
  BasicImage(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw std::invalid_argument("image dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] int channels() const { return channels_; }
  [[nodiscard]] Rect bounds() const { return {0, 0, width_, height_}; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] T& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  [[nodiscard]] const T& at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  [[nodiscard]] std::vector<T>& data() { return data_; }
  [[nodiscard]] const std::vector<T>& data() const { return data_; }

  friend bool operator==(const BasicImage&, const BasicImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using Image = BasicImage<std::uint8_t>;
using ImageF = BasicImage<double>;

inline constexpr std::uint8_t kMidGray = 128;

[[nodiscard]] ImageF to_float(const Image& img);

/// Rounds to nearest and clamps to [0, 255].
[[nodiscard]] Image to_u8(const ImageF& img);

[[nodiscard]] Image crop(const Image& img, const Rect& r);

/// Copies `src` into `dst` with its top-left corner at (x, y). Must fit.
void paste(Image& dst, const Image& src, int x, int y);

/// Copies the pixels of `region` from `src` into `dst` at the same coordinates.
void copy_region(Image& dst, const Image& src, const Rect& region);

void fill_rect(Image& img, const Rect& r, std::uint8_t value);

/// Draws an axis-aligned outline of the given line width, inset into `r`.
void draw_rect_outline(Image& img, const Rect& r, int line_width, std::uint8_t value);

/// Pixel-center-aligned bilinear resample of the whole image to width x height.
[[nodiscard]] Image resize_bilinear(const Image& img, int width, int height);

/// Bilinear resample of the source region `r` to width x height.
[[nodiscard]] Image resample_region(const Image& img, const Rect& r, int width, int height);

}  // namespace ctxrec
