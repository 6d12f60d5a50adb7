#include "ctxrec/image.hpp"

#include <algorithm>
#include <cmath>

namespace ctxrec {

ImageF to_float(const Image& img) {
  ImageF out(img.width(), img.height(), img.channels());
  std::transform(img.data().begin(), img.data().end(), out.data().begin(),
                 [](std::uint8_t v) { return static_cast<double>(v); });
  return out;
}

Image to_u8(const ImageF& img) {
  Image out(img.width(), img.height(), img.channels());
  std::transform(img.data().begin(), img.data().end(), out.data().begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  });
  return out;
}

Image crop(const Image& img, const Rect& r) {
  if (!img.bounds().contains(r) || r.empty()) {
    throw std::out_of_range("crop rectangle outside image");
  }
  Image out(r.width, r.height, img.channels());
  const auto row_bytes = static_cast<std::size_t>(r.width) * img.channels();
  for (int y = 0; y < r.height; ++y) {
    const auto* src = &img.at(r.x, r.y + y, 0);
    std::copy(src, src + row_bytes, &out.at(0, y, 0));
  }
  return out;
}

void paste(Image& dst, const Image& src, int x, int y) {
  if (src.channels() != dst.channels() ||
      !dst.bounds().contains(Rect{x, y, src.width(), src.height()})) {
    throw std::out_of_range("paste target outside image");
  }
  const auto row_bytes = static_cast<std::size_t>(src.width()) * src.channels();
  for (int row = 0; row < src.height(); ++row) {
    const auto* s = &src.at(0, row, 0);
    std::copy(s, s + row_bytes, &dst.at(x, y + row, 0));
  }
}

void copy_region(Image& dst, const Image& src, const Rect& region) {
  if (dst.width() != src.width() || dst.height() != src.height() ||
      dst.channels() != src.channels() || !src.bounds().contains(region)) {
    throw std::invalid_argument("copy_region: mismatched images or region");
  }
  if (region.empty()) return;
  paste(dst, crop(src, region), region.x, region.y);
}

void fill_rect(Image& img, const Rect& r, std::uint8_t value) {
  const int x0 = std::max(r.x, 0);
  const int y0 = std::max(r.y, 0);
  const int x1 = std::min(r.right(), img.width());
  const int y1 = std::min(r.bottom(), img.height());
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < img.channels(); ++c) img.at(x, y, c) = value;
    }
  }
}

void draw_rect_outline(Image& img, const Rect& r, int line_width, std::uint8_t value) {
  const int w = std::min({line_width, r.width, r.height});
  if (w <= 0) return;
  fill_rect(img, {r.x, r.y, r.width, w}, value);
  fill_rect(img, {r.x, r.bottom() - w, r.width, w}, value);
  fill_rect(img, {r.x, r.y, w, r.height}, value);
  fill_rect(img, {r.right() - w, r.y, w, r.height}, value);
}

namespace {

struct Tap {
  int i0;
  int i1;
  double frac;
};

std::vector<Tap> make_taps(int origin, int src_len, int dst_len) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int o = 0; o < dst_len; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src_len - 1);
    taps[static_cast<std::size_t>(o)] = {origin + i0, origin + i1, s - i0};
  }
  return taps;
}

}  // namespace

Image resample_region(const Image& img, const Rect& r, int width, int height) {
  if (r.empty() || !img.bounds().contains(r)) {
    throw std::invalid_argument("resample region must be a non-empty rectangle inside the image");
  }
  if (width <= 0 || height <= 0) throw std::invalid_argument("resample target must be non-empty");
  const auto xs = make_taps(r.x, r.width, width);
  const auto ys = make_taps(r.y, r.height, height);
  Image out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(tx.i0, ty.i0, c) * (1.0 - tx.frac) + img.at(tx.i1, ty.i0, c) * tx.frac;
        const double bot = img.at(tx.i0, ty.i1, c) * (1.0 - tx.frac) + img.at(tx.i1, ty.i1, c) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bot * ty.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
  return resample_region(img, img.bounds(), width, height);
}

}  // namespace ctxrec
