#include "robovis/features/feature_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "robovis/error.hpp"

namespace robovis::features {
namespace {

static_assert(std::endian::native == std::endian::little, "feature dump assumes little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated feature dump");
  return v;
}

}  // namespace

void write_features(std::ostream& out, const FeatureSet& fs) {
  out.write("RVFT", 4);
  put<std::uint32_t>(out, kFeatureDumpVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.size()));
  put<std::uint32_t>(out, kDescriptorSize);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Keypoint& k = fs.keypoints[i];
    put(out, k.x);
    put(out, k.y);
    put(out, k.scale);
    put(out, k.orientation);
    out.write(reinterpret_cast<const char*>(fs.descriptors[i].data()), sizeof(Descriptor));
  }
}

FeatureSet read_features(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "RVFT", 4) != 0)
    throw FormatError("not a feature dump");
  if (get<std::uint32_t>(in) != kFeatureDumpVersion)
    throw FormatError("unsupported feature dump version");
  const auto count = get<std::uint32_t>(in);
  if (get<std::uint32_t>(in) != kDescriptorSize) throw FormatError("descriptor dimension mismatch");
  FeatureSet fs;
  fs.keypoints.resize(count);
  fs.descriptors.resize(count);
  fs.flags.assign(count, kDescriptorOk);
  for (std::uint32_t i = 0; i < count; ++i) {
    Keypoint& k = fs.keypoints[i];
    k.x = get<float>(in);
    k.y = get<float>(in);
    k.scale = get<float>(in);
    k.orientation = get<float>(in);
    if (!in.read(reinterpret_cast<char*>(fs.descriptors[i].data()), sizeof(Descriptor)))
      throw FormatError("truncated feature dump");
  }
  return fs;
}

void save_features(const std::filesystem::path& path, const FeatureSet& fs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_features(out, fs);
}

FeatureSet load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_features(in);
}

void write_features_text(std::ostream& out, const FeatureSet& fs) {
  char buf[32];
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Keypoint& k = fs.keypoints[i];
    std::snprintf(buf, sizeof buf, "%.9g", k.x);
    out << buf;
    for (float v : {k.y, k.scale, k.orientation}) {
      std::snprintf(buf, sizeof buf, " %.9g", v);
      out << buf;
    }
    for (float v : fs.descriptors[i]) {
      std::snprintf(buf, sizeof buf, " %.9g", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace robovis::features
