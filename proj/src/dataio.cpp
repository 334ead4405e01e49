#include "lrcal/dataio.hpp"

#include "lrcal/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lrcal {

namespace {

[[noreturn]] void format_fail(const std::string& path, const std::string& msg) {
  throw FormatError(path + ": " + msg);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos
                         ? std::string()
                         : field.substr(begin, end - begin + 1));
  }
  return fields;
}

bool has_csv_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return false;
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == "csv";
}

LoadedCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) format_fail(path, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) format_fail(path, "empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "x" || header[1] != "y" ||
      header[2] != "z") {
    format_fail(path, "expected CSV header starting with x,y,z");
  }

  LoadedCloud out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      format_fail(path, "line " + std::to_string(line_no) + ": expected >= 3 fields");
    }
    double v[3];
    bool finite = true;
    for (int k = 0; k < 3; ++k) {
      try {
        v[k] = std::stod(fields[static_cast<std::size_t>(k)]);
      } catch (const std::exception&) {
        format_fail(path, "line " + std::to_string(line_no) + ": non-numeric field");
      }
      finite = finite && std::isfinite(v[k]);
    }
    if (!finite) {
      ++out.rejected_rows;
      continue;
    }
    out.points.push_back(Point3{v[0], v[1], v[2]});
  }
  return out;
}

LoadedCloud load_cloud_binary(const std::string& path) {
  const std::string sidecar = path + ".json";
  std::ifstream meta(sidecar);
  if (!meta) format_fail(sidecar, "cannot open binary-layout sidecar");
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    format_fail(sidecar, std::string("invalid JSON: ") + e.what());
  }
  const int fields = j.value("fields_per_point", 0);
  if (fields != 3 && fields != 4) {
    format_fail(sidecar, "field 'fields_per_point' must be 3 or 4");
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) format_fail(path, "cannot open file");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  const std::size_t record = sizeof(float) * static_cast<std::size_t>(fields);
  if (size < 0 || static_cast<std::size_t>(size) % record != 0) {
    format_fail(path, "file size is not a multiple of the record size");
  }
  const std::size_t count = static_cast<std::size_t>(size) / record;

  LoadedCloud out;
  out.points.reserve(count);
  std::vector<float> buf(static_cast<std::size_t>(fields));
  for (std::size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(record));
    if (!in) format_fail(path, "truncated read");
    if (!std::isfinite(buf[0]) || !std::isfinite(buf[1]) || !std::isfinite(buf[2])) {
      ++out.rejected_rows;
      continue;
    }
    out.points.push_back(Point3{buf[0], buf[1], buf[2]});
  }
  return out;
}

}  // namespace

LoadedCloud load_point_cloud(const std::string& path) {
  LoadedCloud out = has_csv_extension(path) ? load_cloud_csv(path)
                                            : load_cloud_binary(path);
  if (out.points.empty()) {
    format_fail(path, "no valid points");
  }
  return out;
}

void save_point_cloud_csv(const std::vector<Point3>& points,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) format_fail(path, "cannot open file for writing");
  out << "x,y,z\n";
  char line[96];
  for (const Point3& p : points) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", p.x, p.y, p.z);
    out << line;
  }
  if (!out) format_fail(path, "write failed");
}

void save_point_cloud_binary(const std::vector<Point3>& points,
                             const std::string& path, int fields_per_point) {
  if (fields_per_point != 3 && fields_per_point != 4) {
    throw std::invalid_argument("save_point_cloud_binary: fields_per_point must be 3 or 4");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) format_fail(path, "cannot open file for writing");
  std::vector<float> rec(static_cast<std::size_t>(fields_per_point), 0.0f);
  for (const Point3& p : points) {
    rec[0] = static_cast<float>(p.x);
    rec[1] = static_cast<float>(p.y);
    rec[2] = static_cast<float>(p.z);
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(sizeof(float) * rec.size()));
  }
  if (!out) format_fail(path, "write failed");

  nlohmann::json j{{"fields_per_point", fields_per_point}};
  std::ofstream meta(path + ".json");
  if (!meta) format_fail(path + ".json", "cannot open sidecar for writing");
  meta << j.dump(2) << "\n";
}

std::vector<FrameMeta> load_frame_metadata_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) format_fail(path, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) format_fail(path, "empty file");
  if (split_csv_line(line) !=
      std::vector<std::string>{"frame_id", "timestamp_us", "speed_mps"}) {
    format_fail(path, "expected header frame_id,timestamp_us,speed_mps");
  }

  std::vector<FrameMeta> frames;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      format_fail(path, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    FrameMeta m;
    m.frame_id = fields[0];
    try {
      m.timestamp_us = std::stoll(fields[1]);
      m.speed_mps = std::stod(fields[2]);
    } catch (const std::exception&) {
      format_fail(path, "line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (m.speed_mps < 0.0) {
      format_fail(path, "line " + std::to_string(line_no) + ": negative speed");
    }
    if (!frames.empty() && m.timestamp_us <= frames.back().timestamp_us) {
      format_fail(path, "line " + std::to_string(line_no) +
                            ": timestamps must be strictly increasing");
    }
    frames.push_back(std::move(m));
  }
  return frames;
}

std::vector<std::string> select_stationary(const std::vector<FrameMeta>& frames,
                                           double v_max, int window) {
  if (window < 1) throw std::invalid_argument("select_stationary: window must be >= 1");
  if (!(v_max > 0.0)) throw std::invalid_argument("select_stationary: v_max must be > 0");

  std::vector<std::string> selected;
  int slow_run = 0;  // consecutive frames below v_max ending at the current one
  for (const FrameMeta& m : frames) {
    slow_run = m.speed_mps < v_max ? slow_run + 1 : 0;
    if (slow_run >= window) selected.push_back(m.frame_id);
  }
  return selected;
}

std::vector<TimestampPair> pair_by_timestamp(
    const std::vector<FrameMeta>& lidar_frames,
    const std::vector<FrameMeta>& radar_frames) {
  if (lidar_frames.empty() || radar_frames.empty()) {
    throw std::invalid_argument("pair_by_timestamp: empty frame sequence");
  }

  std::vector<TimestampPair> pairs;
  pairs.reserve(radar_frames.size());
  std::size_t cursor = 0;  // lidar candidates advance with the radar times
  for (std::size_t ri = 0; ri < radar_frames.size(); ++ri) {
    const std::int64_t t = radar_frames[ri].timestamp_us;
    while (cursor + 1 < lidar_frames.size() &&
           std::abs(lidar_frames[cursor + 1].timestamp_us - t) <
               std::abs(lidar_frames[cursor].timestamp_us - t)) {
      ++cursor;
    }
    // An exact tie between cursor and cursor+1 keeps the earlier frame.
    pairs.push_back(TimestampPair{
        ri, cursor, lidar_frames[cursor].timestamp_us - t});
  }
  return pairs;
}

}  // namespace lrcal
