#include "alstm/container_io.hpp"

#include "alstm/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "container payloads are little-endian float64");

namespace alstm {

using nlohmann::json;

namespace {

json check_manifest(const std::string& line, std::string_view expected_format,
                    int expected_version, const std::filesystem::path& path) {
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::exception& e) {
    throw CorruptionError(path.string() + ": bad manifest: " + e.what());
  }
  if (!manifest.contains("format") || !manifest.contains("version")) {
    throw CorruptionError(path.string() + ": manifest missing format/version");
  }
  if (manifest["format"].get<std::string>() != expected_format) {
    throw IncompatibleFormatError(path.string() + ": format '" +
                                  manifest["format"].get<std::string>() + "', expected '" +
                                  std::string(expected_format) + "'");
  }
  if (manifest["version"].get<int>() != expected_version) {
    throw IncompatibleFormatError(path.string() + ": version " +
                                  std::to_string(manifest["version"].get<int>()) +
                                  ", expected " + std::to_string(expected_version));
  }
  return manifest;
}

}  // namespace

void write_container(const std::filesystem::path& path, json manifest,
                     const std::vector<std::pair<std::string, std::span<const Scalar>>>& tensors) {
  json directory = json::array();
  for (const auto& [name, data] : tensors) {
    directory.push_back({{"name", name}, {"count", data.size()}});
  }
  manifest["tensors"] = std::move(directory);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out << manifest.dump() << '\n';
    for (const auto& [name, data] : tensors) {
      out.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(Scalar)));
    }
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Container read_container(const std::filesystem::path& path, std::string_view expected_format,
                         int expected_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw CorruptionError(path.string() + ": empty file");

  Container container;
  container.manifest = check_manifest(line, expected_format, expected_version, path);
  if (!container.manifest.contains("tensors")) {
    throw CorruptionError(path.string() + ": manifest missing tensor directory");
  }

  for (const auto& entry : container.manifest["tensors"]) {
    const auto name = entry.at("name").get<std::string>();
    const auto count = entry.at("count").get<std::size_t>();
    std::vector<Scalar> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(Scalar)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(Scalar)) {
      throw CorruptionError(path.string() + ": truncated payload for tensor '" + name + "'");
    }
    container.tensors.emplace(name, std::move(data));
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw CorruptionError(path.string() + ": trailing bytes after payload");
  }
  return container;
}

json read_container_manifest(const std::filesystem::path& path, std::string_view expected_format,
                             int expected_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorruptionError(path.string() + ": empty file");
  return check_manifest(line, expected_format, expected_version, path);
}

}  // namespace alstm
