#include "mocap/model_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <sodium.h>

namespace mocap {

static_assert(std::endian::native == std::endian::little, "array blobs assume a little-endian host");

namespace {

using nlohmann::json;

template <typename Scalar>
json packArray(const Scalar* data, std::initializer_list<int64_t> shape) {
  int64_t count = 1;
  for (const auto s : shape) {
    count *= s;
  }
  json out;
  out["dtype"] = std::is_same_v<Scalar, double> ? "f64" : "i32";
  out["shape"] = std::vector<int64_t>(shape);
  out["data"] = encodeBase64(data, static_cast<size_t>(count) * sizeof(Scalar));
  return out;
}

template <typename Scalar>
std::vector<Scalar> unpackArray(const json& j, const std::string& name, std::initializer_list<int64_t> shape) {
  const json& a = j.at("arrays").at(name);
  const std::string dtype = std::is_same_v<Scalar, double> ? "f64" : "i32";
  if (a.at("dtype").get<std::string>() != dtype) {
    throw std::runtime_error("model array '" + name + "' has dtype " + a.at("dtype").get<std::string>());
  }
  if (a.at("shape").get<std::vector<int64_t>>() != std::vector<int64_t>(shape)) {
    throw std::runtime_error("model array '" + name + "' has unexpected shape");
  }
  const std::string raw = decodeBase64(a.at("data").get<std::string>());
  int64_t count = 1;
  for (const auto s : shape) {
    count *= s;
  }
  if (static_cast<int64_t>(raw.size()) != count * static_cast<int64_t>(sizeof(Scalar))) {
    throw std::runtime_error("model array '" + name + "' has wrong byte length");
  }
  std::vector<Scalar> out(static_cast<size_t>(count));
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

} // namespace

std::string encodeBase64(const void* data, size_t bytes) {
  const size_t len = sodium_base64_encoded_len(bytes, sodium_base64_VARIANT_ORIGINAL);
  std::string out(len, '\0');
  sodium_bin2base64(
      out.data(), len, static_cast<const unsigned char*>(data), bytes, sodium_base64_VARIANT_ORIGINAL);
  out.resize(len - 1); // drop the terminating NUL
  return out;
}

std::string decodeBase64(const std::string& text) {
  std::string out(text.size() / 4 * 3 + 3, '\0');
  size_t written = 0;
  if (sodium_base642bin(
          reinterpret_cast<unsigned char*>(out.data()),
          out.size(),
          text.data(),
          text.size(),
          nullptr,
          &written,
          nullptr,
          sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw std::runtime_error("invalid base64 payload");
  }
  out.resize(written);
  return out;
}

void checkFormatVersion(const std::string& version, const std::string& supported, const std::string& what) {
  const auto major = [](const std::string& v) { return v.substr(0, v.find('.')); };
  if (major(version) != major(supported)) {
    throw std::runtime_error(what + ": unsupported format version " + version + " (reader supports " + supported + ")");
  }
}

json bodyModelToJson(const BodyModel& model) {
  const auto& d = model.data();
  const int64_t nV = model.numVertices();
  const int64_t nB = model.numBones();
  const int64_t nS = model.numShapes();
  const int64_t nF = model.numFaces();

  json j;
  j["format"] = "body-model";
  j["format_version"] = kModelFormatVersion;
  j["bone_names"] = d.boneNames;
  j["parents"] = d.parents;
  j["part_table"] = d.partTable;

  // weights and bases stored in their documented layouts: V x B, S x V x 3, S x B x 3
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights = d.lbsWeights;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> shape = d.shapeBasis.transpose();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jshape =
      d.jointShapeBasis.transpose();

  json& arrays = j["arrays"];
  arrays["template_vertices"] = packArray(d.templateVertices.data(), {nV, 3});
  arrays["faces"] = packArray(d.faces.data(), {nF, 3});
  arrays["rest_joints"] = packArray(d.restJoints.data(), {nB, 3});
  arrays["lbs_weights"] = packArray(weights.data(), {nV, nB});
  arrays["shape_basis"] = packArray(shape.data(), {nS, nV, 3});
  arrays["joint_shape_basis"] = packArray(jshape.data(), {nS, nB, 3});
  return j;
}

BodyModel bodyModelFromJson(const json& j) {
  checkFormatVersion(j.at("format_version").get<std::string>(), kModelFormatVersion, "body model");

  BodyModelData d;
  d.boneNames = j.at("bone_names").get<std::vector<std::string>>();
  d.parents = j.at("parents").get<std::vector<int>>();
  d.partTable = j.at("part_table").get<std::map<std::string, std::vector<std::string>>>();

  const auto& arrays = j.at("arrays");
  const int64_t nV = arrays.at("template_vertices").at("shape").at(0).get<int64_t>();
  const int64_t nF = arrays.at("faces").at("shape").at(0).get<int64_t>();
  const int64_t nB = static_cast<int64_t>(d.boneNames.size());
  const int64_t nS = arrays.at("shape_basis").at("shape").at(0).get<int64_t>();

  const auto verts = unpackArray<double>(j, "template_vertices", {nV, 3});
  d.templateVertices = Eigen::Map<const Points>(verts.data(), nV, 3);
  const auto faces = unpackArray<int32_t>(j, "faces", {nF, 3});
  d.faces = Eigen::Map<const Faces>(faces.data(), nF, 3);
  const auto joints = unpackArray<double>(j, "rest_joints", {nB, 3});
  d.restJoints = Eigen::Map<const Points>(joints.data(), nB, 3);

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto weights = unpackArray<double>(j, "lbs_weights", {nV, nB});
  d.lbsWeights = Eigen::Map<const RowMat>(weights.data(), nV, nB);
  const auto shape = unpackArray<double>(j, "shape_basis", {nS, nV, 3});
  d.shapeBasis = Eigen::Map<const RowMat>(shape.data(), nS, 3 * nV).transpose();
  const auto jshape = unpackArray<double>(j, "joint_shape_basis", {nS, nB, 3});
  d.jointShapeBasis = Eigen::Map<const RowMat>(jshape.data(), nS, 3 * nB).transpose();

  return BodyModel(std::move(d));
}

void saveBodyModel(const BodyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << bodyModelToJson(model).dump() << '\n';
}

BodyModel loadBodyModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open model file '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("model file '" + path + "': " + e.what());
  }
  return bodyModelFromJson(j);
}

} // namespace mocap
