#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace afnet::geo {

struct ManifestEntry {
  std::string tile_id;
  std::filesystem::path optical;
  std::filesystem::path dsm;
  std::filesystem::path label;  // empty when unlabeled
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One `tile_id, optical_path, dsm_path, label_path` line per tile. Blank
/// lines and `#` comments are skipped, fields are trimmed, the label field
/// may be empty, and relative paths resolve against the manifest's
/// directory. Malformed lines and repeated ids raise ParseError with the
/// line number.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Writes paths as given (no relativization).
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

}  // namespace afnet::geo
