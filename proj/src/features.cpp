#include "pamm/features.hpp"

#include <filesystem>
#include <fstream>

#include "pamm/descriptor.hpp"
#include "pamm/error.hpp"
#include "text.hpp"

namespace pamm {

FeatureTable load_feature_file(const std::string& path, const std::string& descriptor_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open feature file " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty feature file");
  const auto header = text::split(line);
  if (header.size() < 4 || header[0] != "object_id" || header[1] != "camera_id" || header[2] != "frame" ||
      header[3] != "d") {
    throw Error(ErrorCode::ParseError, path + ": header must be object_id,camera_id,frame,d");
  }
  FeatureTable table;
  int line_no = 1;
  long dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto fields = text::split(line);
    if (fields.size() < 4) throw Error(ErrorCode::ParseError, where + ": too few fields");
    SampleKey key{text::parse_int<ObjectId>(fields[0], where), std::string(fields[1]),
                  text::parse_int<int>(fields[2], where)};
    const long d = text::parse_int<long>(fields[3], where);
    if (d <= 0 || static_cast<std::size_t>(d) + 4 != fields.size()) {
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(d) + " feature values");
    }
    if (dim >= 0 && d != dim) {
      throw Error(ErrorCode::ParseError, where + ": feature dimension changes from " + std::to_string(dim));
    }
    dim = d;
    FeatureVector f{Eigen::VectorXd(d), descriptor_id};
    for (long i = 0; i < d; ++i) {
      f.values[i] = text::parse_double(fields[4 + i], where);
    }
    if (!f.values.allFinite()) throw Error(ErrorCode::ParseError, where + ": non-finite feature value");
    table.insert_or_assign(std::move(key), std::move(f));
  }
  return table;
}

void save_feature_file(const std::string& path, const FeatureTable& features) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "object_id,camera_id,frame,d\n";
  for (const auto& [key, f] : features) {
    out << key.object_id << ',' << key.camera_id << ',' << key.frame << ',' << f.values.size();
    for (Eigen::Index i = 0; i < f.values.size(); ++i) out << ',' << text::format_double(f.values[i]);
    out << '\n';
  }
}

FeatureVector PrecomputedFeatures::features_for(const TrackSample& sample) const {
  const auto it = table_.find(key_of(sample));
  if (it == table_.end()) {
    throw Error(ErrorCode::MissingFeature, "no feature for object " + std::to_string(sample.object_id) +
                                               " camera " + sample.camera_id + " frame " +
                                               std::to_string(sample.frame));
  }
  return it->second;
}

FeatureVector ImagePatchFeatures::features_for(const TrackSample& sample) const {
  namespace fs = std::filesystem;
  const std::string stem =
      sample.camera_id + "_" + std::to_string(sample.object_id) + "_" + std::to_string(sample.frame);
  for (const char* ext : {".png", ".ppm", ".pgm"}) {
    const fs::path candidate = fs::path(directory_) / (stem + ext);
    if (fs::exists(candidate)) return extract_builtin_descriptor(load_image(candidate.string()));
  }
  throw Error(ErrorCode::MissingFeature, "no image patch " + stem + " in " + directory_);
}

}  // namespace pamm
