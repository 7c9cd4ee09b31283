#pragma once

#include <compare>
#include <map>
#include <string>

#include <Eigen/Core>

#include "pamm/track.hpp"

namespace pamm {

struct FeatureVector {
  Eigen::VectorXd values;
  std::string descriptor_id;
};

struct SampleKey {
  ObjectId object_id = 0;
  std::string camera_id;
  int frame = 0;

  auto operator<=>(const SampleKey&) const = default;
};

inline SampleKey key_of(const TrackSample& s) { return {s.object_id, s.camera_id, s.frame}; }

using FeatureTable = std::map<SampleKey, FeatureVector>;

// Precomputed feature file. Header `object_id,camera_id,frame,d`, then one row
// per sample: the three key fields, the dimension d and d reals.
FeatureTable load_feature_file(const std::string& path, const std::string& descriptor_id = "precomputed");
void save_feature_file(const std::string& path, const FeatureTable& features);

// Where per-sample descriptors come from.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual FeatureVector features_for(const TrackSample& sample) const = 0;
};

class PrecomputedFeatures final : public FeatureSource {
 public:
  explicit PrecomputedFeatures(FeatureTable table) : table_(std::move(table)) {}
  FeatureVector features_for(const TrackSample& sample) const override;
  const FeatureTable& table() const noexcept { return table_; }

 private:
  FeatureTable table_;
};

// Loads `<dir>/<camera>_<object>_<frame>.{png,ppm,pgm}` and runs the builtin descriptor.
class ImagePatchFeatures final : public FeatureSource {
 public:
  explicit ImagePatchFeatures(std::string directory) : directory_(std::move(directory)) {}
  FeatureVector features_for(const TrackSample& sample) const override;

 private:
  std::string directory_;
};

}  // namespace pamm
