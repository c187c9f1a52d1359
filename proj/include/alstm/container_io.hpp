#pragma once

#include "alstm/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace alstm {

/// One-file container: a single-line JSON manifest, '\n', then the named
/// tensors' little-endian float64 payloads back to back in manifest order.
/// The manifest carries a "format" tag, a "version" number, and a "tensors"
/// directory of {name, count}. Writes go to a temp file then rename, so
/// readers never observe partial files.
struct Container {
  nlohmann::json manifest;
  std::map<std::string, std::vector<Scalar>> tensors;
};

void write_container(const std::filesystem::path& path, nlohmann::json manifest,
                     const std::vector<std::pair<std::string, std::span<const Scalar>>>& tensors);

/// Throws IncompatibleFormatError when format/version differ from the
/// expected pair, CorruptionError on truncated or oversized payloads.
Container read_container(const std::filesystem::path& path, std::string_view expected_format,
                         int expected_version);

/// Reads only the manifest line (cheap scan of checkpoint directories).
nlohmann::json read_container_manifest(const std::filesystem::path& path,
                                       std::string_view expected_format, int expected_version);

}  // namespace alstm
