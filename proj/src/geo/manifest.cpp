#include "afnet/geo/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>

#include "afnet/core/errors.hpp"

namespace afnet::geo {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    if (p.empty()) return {};
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(boost::algorithm::trim_copy(f));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    auto fail = [&](const std::string& why) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) {
      fail("expected 4 fields (tile_id, optical_path, dsm_path, label_path), found " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) fail("tile_id, optical and dsm paths are required");
    if (!ids.insert(fields[0]).second) fail("tile id '" + fields[0] + "' repeated");
    out.push_back({fields[0], resolve(fields[1]), resolve(fields[2]), resolve(fields[3])});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "# tile_id, optical_path, dsm_path, label_path\n";
  for (const auto& e : entries) {
    os << e.tile_id << ", " << e.optical.string() << ", " << e.dsm.string() << ", " << e.label.string() << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace afnet::geo
