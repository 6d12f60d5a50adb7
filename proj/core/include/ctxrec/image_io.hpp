#pragma once

#include <filesystem>

#include "ctxrec/image.hpp"

namespace ctxrec {

/// Loads any format OpenCV can decode and returns 8-bit RGB (or 1-channel for
/// grayscale PNGs when `keep_gray` is set). Throws std::runtime_error on failure.
[[nodiscard]] Image load_image(const std::filesystem::path& path, bool keep_gray = false);

/// Writes a lossless PNG. Parent directories are created as needed.
void save_png(const std::filesystem::path& path, const Image& img);

}  // namespace ctxrec
