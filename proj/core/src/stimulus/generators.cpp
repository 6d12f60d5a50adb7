#include "ctxrec/stimulus/generators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>

#include "ctxrec/rng.hpp"

namespace ctxrec::stimulus {

namespace {

void require_bbox(const Image& image, const Rect& bbox) {
  if (bbox.empty()) throw std::invalid_argument("degenerate bbox (zero area)");
  if (!image.bounds().contains(bbox)) throw std::invalid_argument("bbox outside image");
}

constexpr double kCoTolerance = 0.02;

}  // namespace

Image gen_minimal_context(const Image& image, const Rect& bbox, std::uint8_t background) {
  require_bbox(image, bbox);
  Image out(image.width(), image.height(), image.channels(), background);
  copy_region(out, image, bbox);
  return out;
}

Image render_window(const Image& image, const Rect& window, std::uint8_t background) {
  return gen_minimal_context(image, window, background);
}

CoCrop gen_co_crop(const Image& image, const Rect& bbox, int co_ratio) {
  require_bbox(image, bbox);
  if (co_ratio < 0) throw std::invalid_argument("co_ratio must be non-negative");

  CoCrop result;
  if (co_ratio == 0) {
    result.window = bbox;
    result.image = crop(image, bbox);
    return result;
  }

  const double area = static_cast<double>(bbox.area());
  const double target = (co_ratio + 1) * area;
  const double scale = std::sqrt(co_ratio + 1.0);
  const double aspect = static_cast<double>(bbox.width) / bbox.height;
  const int max_w = image.width();
  const int max_h = image.height();

  // Integer window sizes rarely hit the area exactly; search near the isotropic
  // size for the least aspect distortion inside a tight band, then the 2% band.
  struct Candidate {
    int w, h;
    double area_err, aspect_err;
  };
  std::vector<Candidate> candidates;
  const int w_lo = std::max(bbox.width, static_cast<int>(std::floor(bbox.width * scale * 0.7)));
  const int w_hi = std::min(max_w, static_cast<int>(std::ceil(bbox.width * scale * 1.45)));
  for (int w = w_lo; w <= w_hi; ++w) {
    for (int h : {static_cast<int>(std::floor(target / w)), static_cast<int>(std::ceil(target / w))}) {
      if (h < bbox.height || h > max_h) continue;
      const double a = static_cast<double>(w) * h;
      candidates.push_back({w, h, std::abs(a - target), std::abs(std::log((static_cast<double>(w) / h) / aspect))});
    }
  }

  std::optional<Candidate> best;
  for (const double band : {0.5 * kCoTolerance, kCoTolerance}) {
    for (const auto& c : candidates) {
      if (c.area_err > band * co_ratio * area) continue;
      if (!best || c.aspect_err < best->aspect_err ||
          (c.aspect_err == best->aspect_err && c.area_err < best->area_err)) {
        best = c;
      }
    }
    if (best) break;
  }

  int win_w = 0;
  int win_h = 0;
  if (best) {
    win_w = best->w;
    win_h = best->h;
  } else {
    win_w = std::min(max_w, static_cast<int>(std::lround(bbox.width * scale)));
    win_h = std::min(max_h, static_cast<int>(std::lround(bbox.height * scale)));
    result.clamped = true;
  }

  auto place = [](int b0, int blen, int wlen, int limit) {
    const int centered = b0 - (wlen - blen) / 2;
    const int lo = std::max(0, b0 + blen - wlen);
    const int hi = std::min(b0, limit - wlen);
    return std::clamp(centered, lo, hi);
  };
  result.window = {place(bbox.x, bbox.width, win_w, max_w), place(bbox.y, bbox.height, win_h, max_h), win_w, win_h};
  result.image = crop(image, result.window);
  result.achieved_ratio = (static_cast<double>(result.window.area()) - area) / area;
  result.infeasible = std::abs(result.achieved_ratio - co_ratio) / co_ratio > kCoTolerance;
  return result;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i >= n ? period - i : i;
}

}  // namespace

ImageF gaussian_blur(const ImageF& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width();
  const int h = image.height();
  const int ch = image.channels();

  ImageF tmp(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(reflect101(x + k, w), y, c);
        }
        tmp.at(x, y, c) = acc;
      }
    }
  }
  ImageF out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(x, reflect101(y + k, h), c);
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

Image gen_blur(const Image& image, const Rect& bbox, int sigma, BlurRegion region) {
  require_bbox(image, bbox);
  static constexpr int kAllowed[] = {2, 4, 8, 16, 32};
  if (std::find(std::begin(kAllowed), std::end(kAllowed), sigma) == std::end(kAllowed)) {
    throw std::invalid_argument("sigma must be one of 2, 4, 8, 16, 32");
  }
  const Image blurred = to_u8(gaussian_blur(to_float(image), sigma));
  if (region == BlurRegion::Context) {
    Image out = blurred;
    copy_region(out, image, bbox);
    return out;
  }
  Image out = image;
  copy_region(out, blurred, bbox);
  return out;
}

namespace {

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : ptr(fftw_alloc_real(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~RealBuffer() { fftw_free(ptr); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
  double* ptr;
};

}  // namespace

ImageF phase_scramble(const ImageF& image, std::uint64_t seed) {
  const int w = image.width();
  const int h = image.height();
  const int ch = image.channels();
  if (w == 0 || h == 0) return image;
  const std::size_t n_real = static_cast<std::size_t>(w) * h;
  const std::size_t half_w = static_cast<std::size_t>(w / 2 + 1);
  const std::size_t n_cplx = static_cast<std::size_t>(h) * half_w;

  RealBuffer real(n_real);
  FftwBuffer spectrum(n_cplx);
  FftwBuffer rotation(n_cplx);
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_2d(h, w, real.ptr, spectrum.ptr, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_2d(h, w, spectrum.ptr, real.ptr, FFTW_ESTIMATE);
  }

  // Random phase field: spectrum of real white noise, normalized to unit
  // modulus. Hermitian symmetry comes for free, so the inverse stays real.
  Rng rng(derive_seed(seed, "phase_scramble"));
  for (std::size_t i = 0; i < n_real; ++i) real.ptr[i] = rng.normal();
  fftw_execute(forward);
  for (std::size_t i = 0; i < n_cplx; ++i) {
    const std::complex<double> z(spectrum.ptr[i][0], spectrum.ptr[i][1]);
    const double mag = std::abs(z);
    const std::complex<double> u = mag > 0.0 ? z / mag : std::complex<double>(1.0, 0.0);
    rotation.ptr[i][0] = u.real();
    rotation.ptr[i][1] = u.imag();
  }
  rotation.ptr[0][0] = 1.0;
  rotation.ptr[0][1] = 0.0;

  ImageF out(w, h, ch);
  for (int c = 0; c < ch; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) real.ptr[static_cast<std::size_t>(y) * w + x] = image.at(x, y, c);
    }
    fftw_execute(forward);
    for (std::size_t i = 0; i < n_cplx; ++i) {
      const std::complex<double> f(spectrum.ptr[i][0], spectrum.ptr[i][1]);
      const std::complex<double> u(rotation.ptr[i][0], rotation.ptr[i][1]);
      const auto g = f * u;
      spectrum.ptr[i][0] = g.real();
      spectrum.ptr[i][1] = g.imag();
    }
    fftw_execute(inverse);
    const double norm = 1.0 / static_cast<double>(n_real);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(x, y, c) = real.ptr[static_cast<std::size_t>(y) * w + x] * norm;
    }
  }

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  return out;
}

Image gen_texture_mask(const Image& image, std::uint64_t seed) {
  return to_u8(phase_scramble(to_float(image), seed));
}

Image gen_texture_context(const Image& image, const Rect& bbox, std::uint64_t seed) {
  require_bbox(image, bbox);
  Image out = gen_texture_mask(image, seed);
  copy_region(out, image, bbox);
  return out;
}

Rect jigsaw_piece(int width, int height, int grid, int row, int col) {
  const int pw = width / grid;
  const int ph = height / grid;
  const int x = col * pw;
  const int y = row * ph;
  const int w = col == grid - 1 ? width - x : pw;
  const int h = row == grid - 1 ? height - y : ph;
  return {x, y, w, h};
}

JigsawResult gen_jigsaw(const Image& image, const Rect& bbox, int grid, std::uint64_t seed) {
  if (grid != 2 && grid != 4 && grid != 8) throw std::invalid_argument("grid must be 2, 4 or 8");
  require_bbox(image, bbox);
  if (image.width() < grid || image.height() < grid) throw std::invalid_argument("image smaller than grid");

  const int n = grid * grid;
  std::vector<Rect> pieces;
  pieces.reserve(static_cast<std::size_t>(n));
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) pieces.push_back(jigsaw_piece(image.width(), image.height(), grid, r, c));
  }

  JigsawResult result;
  int hits = 0;
  for (int p = 0; p < n; ++p) {
    if (pieces[static_cast<std::size_t>(p)].intersects(bbox)) {
      ++hits;
      result.target_piece = p;
    }
  }
  if (hits != 1) {
    result.rejected = true;
    result.target_piece = -1;
    return result;
  }

  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int p = 0; p < n; ++p) {
    if (p == result.target_piece) continue;
    const auto& r = pieces[static_cast<std::size_t>(p)];
    groups[{r.width, r.height}].push_back(p);
  }

  Rng rng(derive_seed(seed, "jigsaw"));
  result.source_of.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) result.source_of[static_cast<std::size_t>(p)] = p;
  for (auto& [shape, positions] : groups) {
    std::vector<int> sources = positions;
    rng.shuffle(std::span(sources));
    for (std::size_t k = 0; k < positions.size(); ++k) {
      result.source_of[static_cast<std::size_t>(positions[k])] = sources[k];
    }
  }

  result.image = image;
  for (int p = 0; p < n; ++p) {
    const int src = result.source_of[static_cast<std::size_t>(p)];
    if (src == p) continue;
    const auto& dst_rect = pieces[static_cast<std::size_t>(p)];
    paste(result.image, crop(image, pieces[static_cast<std::size_t>(src)]), dst_rect.x, dst_rect.y);
  }
  return result;
}

std::optional<std::size_t> choose_donor(const TargetAnnotation& target, std::span<const SourceImage> pool,
                                        Congruence congruence, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& d = pool[i];
    if (d.image_id == target.image_id) continue;
    if (d.width < target.bbox.right() || d.height < target.bbox.bottom()) continue;
    const bool has = d.categories.contains(target.category);
    if ((congruence == Congruence::Congruent) != has) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;
  std::sort(eligible.begin(), eligible.end(),
            [&](std::size_t a, std::size_t b) { return pool[a].image_id < pool[b].image_id; });
  Rng rng(derive_seed(seed, "donor"));
  return eligible[rng.below(eligible.size())];
}

std::optional<CongruencePaste> gen_congruence_paste(const Image& source, const TargetAnnotation& target,
                                                    std::span<const SourceImage> donor_pool,
                                                    Congruence congruence, std::uint64_t seed,
                                                    const ImageLoader& load) {
  require_bbox(source, target.bbox);
  const auto pick = choose_donor(target, donor_pool, congruence, seed);
  if (!pick) return std::nullopt;
  const auto& donor = donor_pool[*pick];
  Image canvas = load(donor);
  if (!canvas.bounds().contains(target.bbox)) {
    throw std::runtime_error("donor image smaller than its recorded size");
  }
  paste(canvas, crop(source, target.bbox), target.bbox.x, target.bbox.y);
  return CongruencePaste{std::move(canvas), donor.image_id};
}

Image gen_context_only(const Image& image, const Rect& bbox, std::uint8_t background) {
  require_bbox(image, bbox);
  Image out = image;
  fill_rect(out, bbox, background);
  return out;
}

}  // namespace ctxrec::stimulus
