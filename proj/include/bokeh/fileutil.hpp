// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bokeh {

/// File-system or codec failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes `bytes` to a sibling temp file, then renames it over `path`, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Sibling temp name used by the atomic writers.
std::filesystem::path temp_path_for(const std::filesystem::path& path);

/// Renames `tmp` onto `path`; removes `tmp` and throws on failure.
void commit_temp(const std::filesystem::path& tmp, const std::filesystem::path& path);

/// 64-bit FNV-1a, used for content fingerprints in manifests and tests.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t v);

}  // namespace bokeh
