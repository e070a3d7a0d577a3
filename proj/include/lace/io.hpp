#pragma once

#include <filesystem>
#include <string>

namespace lace::io {

/// Writes to `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Throws DataError naming the path when it cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace lace::io
