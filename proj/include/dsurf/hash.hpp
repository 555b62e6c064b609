#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace dsurf {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);

/// Digest of a file's full contents. Throws io-error when unreadable.
std::string sha256_file(const std::filesystem::path& path);

} // namespace dsurf
