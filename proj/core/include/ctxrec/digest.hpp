#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ctxrec {

/// Lowercase hex SHA-256 of a byte string.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace ctxrec
