#include "eegfb/container.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eegfb/error.hpp"

namespace eegfb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t id_from_json(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key)) data_error(file.string() + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      const auto id = std::stoll(s, &used);
      if (used == s.size()) return id;
    } catch (const std::exception&) {
    }
  }
  data_error(file.string() + ": key '" + key + "' must be an integer id");
}

std::string string_from_json(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key)) data_error(file.string() + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  data_error(file.string() + ": key '" + key + "' must be a string");
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

std::vector<double> read_f32(const fs::path& file, std::size_t channels) {
  std::ifstream in(file, std::ios::binary);
  if (!in) data_error("cannot open " + file.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % (4 * channels) != 0)
    data_error(file.string() + ": " + std::to_string(bytes.size()) + " bytes is not a whole number of " +
               std::to_string(channels) + "-channel float32 frames");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + 4 * i, 4);
    out[i] = static_cast<double>(std::bit_cast<float>(to_little_endian(raw)));
  }
  return out;
}

std::vector<double> read_csv_rows(const fs::path& file, std::size_t channels) {
  std::ifstream in(file);
  if (!in) data_error("cannot open " + file.string());
  std::vector<double> out;
  std::size_t rows = 0, width = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        out.push_back(std::stod(cell));
      } catch (const std::exception&) {
        data_error(file.string() + ": bad number '" + cell + "' on row " + std::to_string(rows + 1));
      }
      ++count;
    }
    if (rows == 0) width = count;
    if (count != width) data_error(file.string() + ": ragged row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows != channels)
    data_error(file.string() + ": " + std::to_string(rows) + " rows but meta lists " + std::to_string(channels) +
               " channels");
  return out;
}

}  // namespace

bool is_segment_container(const fs::path& dir) {
  return fs::is_directory(dir) && fs::exists(dir / "meta.json");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) data_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Internal, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Internal, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

EegSegment load_segment(const fs::path& dir) {
  const fs::path meta_file = dir / "meta.json";
  json meta;
  try {
    meta = json::parse(read_text_file(meta_file));
  } catch (const json::exception& e) {
    data_error(meta_file.string() + ": " + e.what());
  }
  if (!meta.is_object()) data_error(meta_file.string() + ": expected a JSON object");
  if (!meta.contains("channel_labels") || !meta["channel_labels"].is_array())
    data_error(meta_file.string() + ": channel_labels must be an array");
  std::vector<std::string> labels;
  for (const auto& l : meta["channel_labels"]) {
    if (!l.is_string()) data_error(meta_file.string() + ": channel labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  if (labels.empty()) data_error(meta_file.string() + ": no channels");
  if (!meta.contains("sample_rate_hz") || !meta["sample_rate_hz"].is_number())
    data_error(meta_file.string() + ": sample_rate_hz must be a number");
  const double rate = meta["sample_rate_hz"].get<double>();
  if (!(rate >= kMinSampleRateHz))
    data_error(meta_file.string() + ": sample rate " + std::to_string(rate) + " Hz is below the " +
               std::to_string(kMinSampleRateHz) + " Hz minimum");

  SegmentMeta m;
  m.user = string_from_json(meta, "user", meta_file);
  m.query = string_from_json(meta, "query", meta_file);
  m.judgment = id_from_json(meta, "judgment", meta_file);
  m.paragraph = id_from_json(meta, "paragraph", meta_file);
  if (!meta.contains("dwell_seconds") || !meta["dwell_seconds"].is_number())
    data_error(meta_file.string() + ": dwell_seconds must be a number");
  m.dwell_seconds = meta["dwell_seconds"].get<double>();

  std::vector<double> samples;
  fs::path sample_file = dir / "samples.f32";
  if (fs::exists(sample_file)) {
    samples = read_f32(sample_file, labels.size());
  } else {
    sample_file = dir / "samples.csv";
    if (!fs::exists(sample_file)) data_error(dir.string() + ": no samples.f32 or samples.csv");
    samples = read_csv_rows(sample_file, labels.size());
  }
  const double n = static_cast<double>(samples.size() / labels.size());
  if (std::abs(n - m.dwell_seconds * rate) > 1.0)
    data_error(sample_file.string() + ": holds " + std::to_string(static_cast<long long>(n)) +
               " samples per channel but meta implies " + std::to_string(m.dwell_seconds * rate));
  return EegSegment(std::move(labels), rate, std::move(samples), std::move(m));
}

void save_segment(const EegSegment& segment, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& m = segment.meta();
  json meta = {
      {"channel_labels", segment.channel_labels()},
      {"sample_rate_hz", segment.sample_rate_hz()},
      {"user", m.user},
      {"query", m.query},
      {"judgment", m.judgment},
      {"paragraph", m.paragraph},
      {"dwell_seconds", m.dwell_seconds},
  };
  const auto& data = segment.data();
  std::string bytes(data.size() * 4, '\0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(data[i])));
    std::memcpy(bytes.data() + 4 * i, &raw, 4);
  }
  write_file_atomic(dir / "samples.f32", bytes);
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

std::vector<ViewEvent> read_view_events(const fs::path& file) {
  std::istringstream in(read_text_file(file));
  std::vector<ViewEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = file.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      data_error(where + ": " + e.what());
    }
    ViewEvent ev;
    ev.paragraph = id_from_json(j, "paragraph", where);
    if (!j.contains("start_s") || !j.contains("end_s") || !j["start_s"].is_number() || !j["end_s"].is_number())
      data_error(where + ": start_s and end_s must be numbers");
    ev.start_s = j["start_s"].get<double>();
    ev.end_s = j["end_s"].get<double>();
    if (j.contains("clicked")) {
      if (!j["clicked"].is_boolean()) data_error(where + ": clicked must be a bool");
      ev.clicked = j["clicked"].get<bool>();
    }
    if (j.contains("annotation")) {
      const auto a = j["annotation"].is_string() ? j["annotation"].get<std::string>() : std::string();
      if (a != "useful" && a != "useless" && a != "hard_to_say")
        data_error(where + ": annotation must be useful, useless or hard_to_say");
      ev.annotation = a;
    }
    events.push_back(std::move(ev));
  }
  return events;
}

void write_view_events(const std::vector<ViewEvent>& events, const fs::path& file) {
  std::string out;
  for (const auto& ev : events) {
    json j = {{"paragraph", ev.paragraph}, {"start_s", ev.start_s}, {"end_s", ev.end_s}};
    if (ev.clicked) j["clicked"] = *ev.clicked;
    if (ev.annotation) j["annotation"] = *ev.annotation;
    out += j.dump() + "\n";
  }
  write_file_atomic(file, out);
}

}  // namespace eegfb
