#include "synclip/syndata/manifest.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synclip/syndata/errors.hpp"

namespace synclip::syndata {

using nlohmann::ordered_json;

namespace {

ordered_json record_to_json(const PairRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["image_path"] = r.image_path;
  j["caption"] = r.caption;
  auto labels = ordered_json::array();
  for (bool f : r.labels.findings) labels.push_back(f ? 1 : 0);
  j["labels"] = labels;
  j["readability"] = r.labels.readability;
  j["split"] = split_name(r.split);
  j["dr_grade"] = r.labels.dr_grade;
  j["seed"] = r.seed;
  return j;
}

class LineError {
 public:
  LineError(const std::string& source, std::size_t line) : prefix_(source + ":" + std::to_string(line) + ": ") {}
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(prefix_ + what); }

 private:
  std::string prefix_;
};

const ordered_json& field(const ordered_json& j, const char* key, const LineError& err) {
  auto it = j.find(key);
  if (it == j.end()) err.fail(std::string("missing field '") + key + "'");
  return *it;
}

PairRecord record_from_json(const ordered_json& j, const LineError& err) {
  if (!j.is_object()) err.fail("record is not a JSON object");
  PairRecord r;
  const auto& id = field(j, "id", err);
  if (!id.is_number_unsigned()) err.fail("'id' must be a non-negative integer");
  r.id = id.get<std::size_t>();
  const auto& path = field(j, "image_path", err);
  if (!path.is_string() || path.get<std::string>().empty()) err.fail("'image_path' must be a non-empty string");
  r.image_path = path.get<std::string>();
  const auto& caption = field(j, "caption", err);
  if (!caption.is_string()) err.fail("'caption' must be a string");
  r.caption = caption.get<std::string>();

  const auto& labels = field(j, "labels", err);
  if (!labels.is_array() || labels.size() != kNumFindings) {
    err.fail("'labels' must be an array of " + std::to_string(kNumFindings) + " integers, got " +
             (labels.is_array() ? std::to_string(labels.size()) + " entries" : std::string("a non-array")));
  }
  for (std::size_t i = 0; i < kNumFindings; ++i) {
    if (!labels[i].is_number_integer() || (labels[i] != 0 && labels[i] != 1)) err.fail("'labels' entries must be 0 or 1");
    r.labels.findings[i] = labels[i] == 1;
  }
  const auto& readability = field(j, "readability", err);
  if (!readability.is_array() || readability.size() != kNumRegions) {
    err.fail("'readability' must be an array of " + std::to_string(kNumRegions) + " integers");
  }
  for (std::size_t i = 0; i < kNumRegions; ++i) {
    if (!readability[i].is_number_integer()) err.fail("'readability' entries must be integers");
    r.labels.readability[i] = readability[i].get<int>();
  }
  const auto& split = field(j, "split", err);
  if (!split.is_string()) err.fail("'split' must be a string");
  try {
    r.split = parse_split(split.get<std::string>());
  } catch (const FormatError& e) {
    err.fail(e.what());
  }
  if (auto it = j.find("dr_grade"); it != j.end()) {
    if (!it->is_number_integer()) err.fail("'dr_grade' must be an integer");
    r.labels.dr_grade = it->get<int>();
  } else {
    r.labels.dr_grade = r.labels.has(Finding::DrMild) ? 1 : r.labels.has(Finding::DrSevere) ? 3 : 0;
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) err.fail("'seed' must be a non-negative integer");
    r.seed = it->get<std::uint64_t>();
  }
  try {
    r.labels.validate();
  } catch (const LabelError& e) {
    err.fail(e.what());
  }
  return r;
}

}  // namespace

std::string manifest_to_string(const Manifest& manifest) {
  std::string out;
  if (manifest.header) {
    ordered_json h;
    h["format"] = kManifestFormat;
    h["config_hash"] = manifest.header->config_hash;
    h["seed"] = manifest.header->seed;
    ordered_json config = ordered_json::object();
    for (const auto& [k, v] : manifest.header->config) config[k] = v;
    h["config"] = config;
    ordered_json line;
    line["header"] = h;
    out += line.dump() + "\n";
  }
  for (const auto& r : manifest.records) out += record_to_json(r).dump() + "\n";
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string text = manifest_to_string(manifest);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest parse_manifest(const std::string& text, const std::string& source) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const LineError err(source, line_no);
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      err.fail(std::string("invalid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("header")) {
      if (line_no != 1 && !m.records.empty()) err.fail("header must be the first line");
      const auto& h = j["header"];
      ManifestHeader header;
      try {
        header.config_hash = h.value("config_hash", std::string());
        header.seed = h.value("seed", std::uint64_t{0});
        if (h.contains("config")) {
          for (const auto& [k, v] : h["config"].items()) header.config.emplace_back(k, v.get<std::string>());
        }
      } catch (const nlohmann::json::exception& e) {
        err.fail(std::string("malformed header: ") + e.what());
      }
      m.header = std::move(header);
      continue;
    }
    m.records.push_back(record_from_json(j, err));
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.string());
}

}  // namespace synclip::syndata
