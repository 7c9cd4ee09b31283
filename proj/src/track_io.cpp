#include "pamm/track_io.hpp"

#include <array>
#include <fstream>
#include <map>
#include <optional>

#include "pamm/error.hpp"
#include "text.hpp"

namespace pamm {
namespace {

constexpr std::array<const char*, 9> kBaseColumns = {"camera_id", "object_id", "frame",  "world_x", "world_y",
                                                     "bbox_x",    "bbox_y",    "bbox_w", "bbox_h"};

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

std::vector<TrackSample> read_track_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open track file " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty track file");
  std::map<std::string, std::size_t, std::less<>> column;
  const auto header = text::split(line);
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(std::string(header[i]), i);
  for (const char* name : kBaseColumns) {
    if (!column.contains(name)) throw Error(ErrorCode::ParseError, path + ": missing column '" + name + "'");
  }
  const auto optional_column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = column.find(name);
    return it == column.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  };
  const auto raw = optional_column("raw_angle");
  const auto smooth = optional_column("smooth_angle");
  const auto delta = optional_column("delta");
  const auto speed = optional_column("speed");
  const auto occlusion = optional_column("occlusion");
  const auto confidence = optional_column("confidence");
  const bool has_report = delta && speed && occlusion && confidence;

  std::vector<TrackSample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto f = text::split(line);
    if (f.size() != header.size()) throw Error(ErrorCode::ParseError, where + ": wrong number of fields");
    const auto num = [&](const char* name) { return text::parse_double(f[column.at(name)], where); };
    TrackSample s;
    s.camera_id = std::string(f[column.at("camera_id")]);
    s.object_id = text::parse_int<ObjectId>(f[column.at("object_id")], where);
    s.frame = text::parse_int<int>(f[column.at("frame")], where);
    s.world_pos = {num("world_x"), num("world_y")};
    s.bbox = {num("bbox_x"), num("bbox_y"), num("bbox_w"), num("bbox_h")};
    if (!s.bbox.valid()) throw Error(ErrorCode::ParseError, where + ": bounding box must have positive size");
    if (raw) s.raw_angle = text::parse_double(f[*raw], where);
    if (smooth) s.smooth_angle = text::parse_double(f[*smooth], where);
    if (has_report) {
      s.confidence = ConfidenceReport{text::parse_double(f[*delta], where), text::parse_double(f[*speed], where),
                                      text::parse_double(f[*occlusion], where),
                                      text::parse_double(f[*confidence], where)};
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_track_csv(const std::string& path, const std::vector<TrackSample>& samples, TrackColumns columns) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "camera_id,object_id,frame,world_x,world_y,bbox_x,bbox_y,bbox_w,bbox_h";
  if (columns != TrackColumns::base) out << ",raw_angle,smooth_angle";
  if (columns == TrackColumns::confidence) out << ",delta,speed,occlusion,confidence";
  out << '\n';
  for (const auto& s : samples) {
    out << s.camera_id << ',' << s.object_id << ',' << s.frame << ',' << fmt(s.world_pos.x()) << ','
        << fmt(s.world_pos.y()) << ',' << fmt(s.bbox.x) << ',' << fmt(s.bbox.y) << ',' << fmt(s.bbox.w) << ','
        << fmt(s.bbox.h);
    if (columns != TrackColumns::base) {
      if (!s.raw_angle || !s.smooth_angle) {
        throw Error(ErrorCode::InvalidArgument, "sample lacks pose angles for the requested columns");
      }
      out << ',' << fmt(*s.raw_angle) << ',' << fmt(*s.smooth_angle);
    }
    if (columns == TrackColumns::confidence) {
      if (!s.confidence) throw Error(ErrorCode::InvalidArgument, "sample lacks a confidence report");
      const auto& c = *s.confidence;
      out << ',' << fmt(c.delta) << ',' << fmt(c.speed) << ',' << fmt(c.occlusion) << ',' << fmt(c.confidence);
    }
    out << '\n';
  }
}

}  // namespace pamm
