#include "mocap/io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "mocap/model_io.h"

namespace mocap {

using nlohmann::json;

namespace {

[[noreturn]] void formatError(const std::string& what, const std::string& locus, const std::string& msg) {
  throw std::runtime_error(what + ": " + locus + ": " + msg);
}

double finiteNumber(const json& j, const std::string& what, const std::string& locus) {
  if (!j.is_number()) {
    formatError(what, locus, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    formatError(what, locus, "non-finite value");
  }
  return v;
}

Vec3 readVec3(const json& j, const std::string& what, const std::string& locus) {
  if (!j.is_array() || j.size() != 3) {
    formatError(what, locus, "expected [x, y, z]");
  }
  return Vec3(finiteNumber(j[0], what, locus + "[0]"), finiteNumber(j[1], what, locus + "[1]"),
              finiteNumber(j[2], what, locus + "[2]"));
}

Eigen::VectorXd readVector(const json& j, const std::string& what, const std::string& locus) {
  if (!j.is_array()) {
    formatError(what, locus, "expected an array");
  }
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<long>(i)] = finiteNumber(j[i], what, locus + "[" + std::to_string(i) + "]");
  }
  return v;
}

json rowsToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rowsFromJson(const json& j, long cols, const std::string& what, const std::string& field) {
  if (!j.is_array()) {
    formatError(what, field, "expected an array of rows");
  }
  Eigen::MatrixXd m(static_cast<long>(j.size()), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string locus = field + "[" + std::to_string(r) + "]";
    const Eigen::VectorXd row = readVector(j[r], what, locus);
    if (cols >= 0 && row.size() != cols) {
      formatError(what, locus, "expected " + std::to_string(cols) + " values");
    }
    m.row(static_cast<long>(r)) = row.transpose();
  }
  return m;
}

void requireVersion(const json& j, const std::string& what) {
  if (!j.is_object()) {
    throw std::runtime_error(what + ": expected a JSON object");
  }
  if (!j.contains("format_version") || !j["format_version"].is_string()) {
    throw std::runtime_error(what + ": missing format_version");
  }
  checkFormatVersion(j["format_version"].get<std::string>(), kFileFormatVersion, what);
}

json optimToJson(const OptimSettings& s) {
  return json{{"learning_rate", s.learningRate}, {"grad_tol", s.gradTol}, {"f_tol", s.fTol},
              {"x_tol", s.xTol},                 {"max_iters", s.maxIters}, {"history", s.history}};
}

void rejectUnknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }) == known.end()) {
      throw std::runtime_error("config: unknown key '" + where + it.key() + "'");
    }
  }
}

template <typename T>
void readField(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

OptimSettings optimFromJson(const json& j, OptimSettings s, const std::string& where) {
  if (!j.is_object()) {
    throw std::runtime_error("config: '" + where + "' must be an object");
  }
  rejectUnknown(j, {"learning_rate", "grad_tol", "f_tol", "x_tol", "max_iters", "history"}, where + ".");
  readField(j, "learning_rate", s.learningRate);
  readField(j, "grad_tol", s.gradTol);
  readField(j, "f_tol", s.fTol);
  readField(j, "x_tol", s.xTol);
  readField(j, "max_iters", s.maxIters);
  readField(j, "history", s.history);
  return s;
}

json chainNames(const KinematicChain& chain, const BodyModel& model) {
  json names = json::array();
  for (const int b : chain.bones) {
    names.push_back(model.boneName(b));
  }
  return names;
}

} // namespace

// ---- markers ---------------------------------------------------------------

int decimationFactor(double sourceRate, double targetRate) {
  if (!(sourceRate > 0.0) || !(targetRate > 0.0)) {
    throw std::invalid_argument("frame rates must be positive");
  }
  const double ratio = sourceRate / targetRate;
  const long k = std::max(1L, std::lround(ratio));
  if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "cannot decimate " << sourceRate << " Hz to " << targetRate << " Hz by an integer factor; nearest valid rate is "
        << sourceRate / static_cast<double>(k) << " Hz";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(k);
}

json markersToJson(const MarkerSequence& markers) {
  markers.validate();
  json j;
  j["format"] = "markers";
  j["format_version"] = kFileFormatVersion;
  j["frame_rate"] = markers.frameRate;
  j["marker_ids"] = markers.markerIds;
  json frames = json::array();
  for (int t = 0; t < markers.numFrames(); ++t) {
    json frame = json::array();
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (markers.visible(t, m)) {
        const Vec3 p = markers.position(t, m);
        frame.push_back({p.x(), p.y(), p.z()});
      } else {
        frame.push_back(nullptr);
      }
    }
    frames.push_back(std::move(frame));
  }
  j["frames"] = std::move(frames);
  return j;
}

MarkerSequence markersFromJson(const json& j, double targetRate) {
  const std::string what = "marker file";
  requireVersion(j, what);
  if (!j.contains("frames") || !j["frames"].is_array()) {
    formatError(what, "frames", "missing frame list");
  }
  const double rate = j.contains("frame_rate") ? finiteNumber(j["frame_rate"], what, "frame_rate") : 30.0;
  const int step = targetRate > 0.0 ? decimationFactor(rate, targetRate) : 1;
  const json& frames = j["frames"];
  const size_t numMarkers = frames.empty() ? 0 : frames[0].size();

  MarkerSequence out;
  out.frameRate = rate / step;
  if (j.contains("marker_ids")) {
    out.markerIds = j["marker_ids"].get<std::vector<std::string>>();
    if (out.markerIds.size() != numMarkers && !frames.empty()) {
      formatError(what, "marker_ids", "count differs from the markers per frame");
    }
  } else {
    for (size_t m = 0; m < numMarkers; ++m) {
      out.markerIds.push_back("m" + std::to_string(m));
    }
  }
  const int keptFrames = static_cast<int>((frames.size() + step - 1) / step);
  out.visible = VisibilityMask::Constant(keptFrames, static_cast<long>(numMarkers), false);
  out.positions.resize(keptFrames);
  for (size_t t = 0; t < frames.size(); ++t) {
    const std::string locus = "frames[" + std::to_string(t) + "]";
    if (!frames[t].is_array() || frames[t].size() != numMarkers) {
      formatError(what, locus, "expected " + std::to_string(numMarkers) + " marker entries");
    }
    if (t % step != 0) {
      continue;
    }
    const int row = static_cast<int>(t / step);
    Points& P = out.positions[row];
    P = Points::Zero(static_cast<long>(numMarkers), 3);
    for (size_t m = 0; m < numMarkers; ++m) {
      const json& e = frames[t][m];
      if (e.is_null()) {
        continue;
      }
      const Vec3 p = readVec3(e, what, locus + "[" + std::to_string(m) + "]");
      P.row(static_cast<long>(m)) = p.transpose();
      out.visible(row, static_cast<long>(m)) = true;
    }
  }
  maskOriginResets(out);
  return out;
}

void writeMarkers(const MarkerSequence& markers, const std::string& path) {
  writeJsonFile(markersToJson(markers), path);
}

MarkerSequence readMarkers(const std::string& path, double targetRate) {
  return markersFromJson(readJsonFile(path), targetRate);
}

// ---- prior -----------------------------------------------------------------

IngestedPrior ingestPrior(const PriorFile& file, int targetFrames) {
  if (targetFrames < 1) {
    throw std::invalid_argument("ingestPrior: need at least one target frame");
  }
  IngestedPrior out;
  std::vector<const PriorRecord*> byFrame(targetFrames, nullptr);
  long poseCoords = -1;
  long shapes = -1;
  int previous = -1;
  int ignored = 0;
  for (const PriorRecord& r : file.records) {
    if (r.frame <= previous) {
      throw std::invalid_argument("ingestPrior: frame indices must be strictly increasing");
    }
    previous = r.frame;
    if (!r.present) {
      continue;
    }
    if (r.frame >= targetFrames) {
      ++ignored;
      continue;
    }
    if (poseCoords < 0) {
      poseCoords = r.theta.size();
      shapes = r.beta.size();
    }
    if (r.theta.size() != poseCoords || r.beta.size() != shapes || poseCoords % 3 != 0) {
      throw std::invalid_argument("ingestPrior: inconsistent record sizes at frame " + std::to_string(r.frame));
    }
    byFrame[r.frame] = &r;
  }
  if (ignored > 0) {
    out.warnings.push_back(std::to_string(ignored) + " prior record(s) beyond the marker sequence ignored");
  }
  std::vector<int> present;
  std::vector<int> withGamma;
  for (int t = 0; t < targetFrames; ++t) {
    if (byFrame[t]) {
      present.push_back(t);
      if (byFrame[t]->gamma) {
        withGamma.push_back(t);
      }
    }
  }
  if (present.empty()) {
    throw std::invalid_argument("ingestPrior: no present frames");
  }
  if (withGamma.empty()) {
    out.warnings.push_back("prior has no translation; starting from zero");
  }

  const int joints = static_cast<int>(poseCoords / 3);
  BodyParams& p = out.prior.params;
  p.phi = Eigen::MatrixXd::Zero(targetFrames, 3);
  p.theta = Eigen::MatrixXd::Zero(targetFrames, poseCoords);
  p.gamma = Eigen::MatrixXd::Zero(targetFrames, 3);
  out.perFrameBeta = Eigen::MatrixXd::Zero(targetFrames, shapes);
  out.prior.valid.assign(targetFrames, false);

  // Bracketing present frames: lo <= t <= hi, clamped at the ends.
  const auto bracket = [](const std::vector<int>& frames, int t, int& lo, int& hi, double& u) {
    auto it = std::lower_bound(frames.begin(), frames.end(), t);
    if (it != frames.end() && *it == t) {
      lo = hi = t;
    } else if (it == frames.begin()) {
      lo = hi = *it;
    } else if (it == frames.end()) {
      lo = hi = frames.back();
    } else {
      hi = *it;
      lo = *(it - 1);
    }
    u = hi == lo ? 0.0 : static_cast<double>(t - lo) / static_cast<double>(hi - lo);
  };

  for (int t = 0; t < targetFrames; ++t) {
    int lo = 0;
    int hi = 0;
    double u = 0.0;
    bracket(present, t, lo, hi, u);
    const PriorRecord& a = *byFrame[lo];
    const PriorRecord& b = *byFrame[hi];
    out.prior.valid[t] = byFrame[t] != nullptr;
    if (lo == hi) {
      p.phi.row(t) = a.phi.transpose();
      p.theta.row(t) = a.theta.transpose();
      out.perFrameBeta.row(t) = a.beta.transpose();
    } else {
      p.phi.row(t) = slerpAxisAngle(a.phi, b.phi, u).transpose();
      for (int k = 0; k < joints; ++k) {
        p.theta.block<1, 3>(t, 3 * k) =
            slerpAxisAngle(a.theta.segment<3>(3 * k), b.theta.segment<3>(3 * k), u).transpose();
      }
      out.perFrameBeta.row(t) = ((1.0 - u) * a.beta + u * b.beta).transpose();
    }
    if (!withGamma.empty()) {
      bracket(withGamma, t, lo, hi, u);
      const Vec3 ga = *byFrame[lo]->gamma;
      const Vec3 gb = *byFrame[hi]->gamma;
      p.gamma.row(t) = (lo == hi ? ga : Vec3((1.0 - u) * ga + u * gb)).transpose();
    }
  }

  p.beta.resize(shapes);
  std::vector<double> buf(present.size());
  for (long s = 0; s < shapes; ++s) {
    for (size_t i = 0; i < present.size(); ++i) {
      buf[i] = byFrame[present[i]]->beta[s];
    }
    std::sort(buf.begin(), buf.end());
    const size_t n = buf.size();
    p.beta[s] = n % 2 == 1 ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
  }
  return out;
}

PriorFile decimatePrior(const PriorFile& file, double targetRate) {
  const int k = decimationFactor(file.frameRate, targetRate);
  PriorFile out;
  out.frameRate = file.frameRate / k;
  for (const PriorRecord& r : file.records) {
    if (r.frame % k == 0) {
      out.records.push_back(r);
      out.records.back().frame = r.frame / k;
    }
  }
  return out;
}

PriorFile makePriorFile(const BodyParams& params, const std::vector<bool>& present, double frameRate,
                        bool withTranslation) {
  if (static_cast<int>(present.size()) != params.numFrames()) {
    throw std::invalid_argument("makePriorFile: mask length mismatch");
  }
  PriorFile f;
  f.frameRate = frameRate;
  for (int t = 0; t < params.numFrames(); ++t) {
    PriorRecord r;
    r.frame = t;
    r.present = present[t];
    if (r.present) {
      r.phi = params.phi.row(t).transpose();
      r.theta = params.theta.row(t).transpose();
      r.beta = params.beta;
      if (withTranslation) {
        r.gamma = Vec3(params.gamma.row(t).transpose());
      }
    }
    f.records.push_back(std::move(r));
  }
  return f;
}

json priorToJson(const PriorFile& file) {
  json j;
  j["format"] = "prior";
  j["format_version"] = kFileFormatVersion;
  j["frame_rate"] = file.frameRate;
  json frames = json::array();
  for (const PriorRecord& r : file.records) {
    json rec;
    rec["frame"] = r.frame;
    rec["present"] = r.present;
    if (r.present) {
      rec["phi"] = {r.phi.x(), r.phi.y(), r.phi.z()};
      rec["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
      rec["beta"] = std::vector<double>(r.beta.data(), r.beta.data() + r.beta.size());
      if (r.gamma) {
        rec["gamma"] = {r.gamma->x(), r.gamma->y(), r.gamma->z()};
      }
    }
    frames.push_back(std::move(rec));
  }
  j["frames"] = std::move(frames);
  return j;
}

PriorFile priorFromJson(const json& j) {
  const std::string what = "prior file";
  requireVersion(j, what);
  PriorFile f;
  if (j.contains("frame_rate")) {
    f.frameRate = finiteNumber(j["frame_rate"], what, "frame_rate");
  }
  if (!j.contains("frames") || !j["frames"].is_array()) {
    formatError(what, "frames", "missing frame list");
  }
  int previous = -1;
  for (size_t i = 0; i < j["frames"].size(); ++i) {
    const json& rec = j["frames"][i];
    const std::string locus = "frames[" + std::to_string(i) + "]";
    if (!rec.is_object() || !rec.contains("frame") || !rec["frame"].is_number_integer()) {
      formatError(what, locus, "record needs an integer 'frame'");
    }
    PriorRecord r;
    r.frame = rec["frame"].get<int>();
    if (r.frame <= previous) {
      formatError(what, locus, "frame indices must be strictly increasing");
    }
    previous = r.frame;
    r.present = rec.value("present", true);
    if (!r.present) {
      for (const char* key : {"phi", "theta", "gamma", "beta"}) {
        if (rec.contains(key)) {
          formatError(what, locus, std::string("missing frame carries '") + key + "'");
        }
      }
    } else {
      for (const char* key : {"phi", "theta", "beta"}) {
        if (!rec.contains(key)) {
          formatError(what, locus, std::string("present frame lacks '") + key + "'");
        }
      }
      r.phi = readVec3(rec["phi"], what, locus + ".phi");
      r.theta = readVector(rec["theta"], what, locus + ".theta");
      r.beta = readVector(rec["beta"], what, locus + ".beta");
      if (rec.contains("gamma")) {
        r.gamma = readVec3(rec["gamma"], what, locus + ".gamma");
      }
    }
    f.records.push_back(std::move(r));
  }
  return f;
}

void writePrior(const PriorFile& file, const std::string& path) {
  writeJsonFile(priorToJson(file), path);
}

PriorFile readPrior(const std::string& path) {
  return priorFromJson(readJsonFile(path));
}

// ---- params, config, results -----------------------------------------------

json paramsToJson(const BodyParams& params) {
  json j;
  j["format"] = "body-params";
  j["format_version"] = kFileFormatVersion;
  j["beta"] = std::vector<double>(params.beta.data(), params.beta.data() + params.beta.size());
  j["phi"] = rowsToJson(params.phi);
  j["theta"] = rowsToJson(params.theta);
  j["gamma"] = rowsToJson(params.gamma);
  return j;
}

BodyParams paramsFromJson(const json& j) {
  const std::string what = "params file";
  requireVersion(j, what);
  for (const char* key : {"beta", "phi", "theta", "gamma"}) {
    if (!j.contains(key)) {
      formatError(what, key, "missing");
    }
  }
  BodyParams p;
  p.beta = readVector(j["beta"], what, "beta");
  p.phi = rowsFromJson(j["phi"], 3, what, "phi");
  const long poseCoords = j["theta"].empty() ? 0 : static_cast<long>(j["theta"][0].size());
  p.theta = rowsFromJson(j["theta"], poseCoords, what, "theta");
  p.gamma = rowsFromJson(j["gamma"], 3, what, "gamma");
  if (p.theta.rows() != p.phi.rows() || p.gamma.rows() != p.phi.rows()) {
    formatError(what, "frames", "phi, theta and gamma frame counts differ");
  }
  return p;
}

void writeParams(const BodyParams& params, const std::string& path) {
  writeJsonFile(paramsToJson(params), path);
}

BodyParams readParams(const std::string& path) {
  const json j = readJsonFile(path);
  if (j.is_object() && j.contains("params") && j.value("format", "") == "solve-result") {
    requireVersion(j, "result file");
    return paramsFromJson(j["params"]);
  }
  return paramsFromJson(j);
}

SolverConfig configFromJson(const json& j) {
  if (!j.is_object()) {
    throw std::runtime_error("config: expected a JSON object");
  }
  if (j.contains("format_version")) {
    checkFormatVersion(j["format_version"].get<std::string>(), kFileFormatVersion, "config");
  }
  rejectUnknown(j,
                {"format", "format_version", "yaw_hypotheses_deg", "delta", "cluster_threshold", "stage2", "stage4",
                 "localization", "refinement_repeats", "up_axis", "parallel_hypotheses"},
                "");
  SolverConfig c;
  try {
    readField(j, "yaw_hypotheses_deg", c.yawHypothesesDeg);
    readField(j, "delta", c.delta);
    readField(j, "cluster_threshold", c.clusterThreshold);
    readField(j, "refinement_repeats", c.refinementRepeats);
    readField(j, "parallel_hypotheses", c.parallelHypotheses);
    if (j.contains("up_axis")) {
      const std::string axis = j["up_axis"].get<std::string>();
      if (axis.size() != 1) {
        throw std::runtime_error("config: up_axis must be one of x, y, z");
      }
      c.upAxis = axis[0];
    }
    if (j.contains("stage2")) {
      const json& s = j["stage2"];
      rejectUnknown(s, {"lambda_3d", "lambda_beta", "lambda_theta", "optim"}, "stage2.");
      readField(s, "lambda_3d", c.stage2Lambda3d);
      readField(s, "lambda_beta", c.stage2LambdaBeta);
      readField(s, "lambda_theta", c.stage2LambdaTheta);
      if (s.contains("optim")) {
        c.stage2Optim = optimFromJson(s["optim"], c.stage2Optim, "stage2.optim");
      }
    }
    if (j.contains("stage4")) {
      const json& s = j["stage4"];
      rejectUnknown(s, {"lambda_m", "lambda_beta", "lambda_theta", "optim"}, "stage4.");
      readField(s, "lambda_m", c.stage4LambdaM);
      readField(s, "lambda_beta", c.stage4LambdaBeta);
      readField(s, "lambda_theta", c.stage4LambdaTheta);
      if (s.contains("optim")) {
        c.stage4Optim = optimFromJson(s["optim"], c.stage4Optim, "stage4.optim");
      }
    }
    if (j.contains("localization")) {
      const json& s = j["localization"];
      rejectUnknown(s, {"lambda_3d", "lambda_beta", "optim", "parallel"}, "localization.");
      readField(s, "lambda_3d", c.localization.lambda3d);
      readField(s, "lambda_beta", c.localization.lambdaBeta);
      readField(s, "parallel", c.localization.parallel);
      if (s.contains("optim")) {
        c.localization.optim = optimFromJson(s["optim"], c.localization.optim, "localization.optim");
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  return c;
}

json configToJson(const SolverConfig& c) {
  json j;
  j["format"] = "solver-config";
  j["format_version"] = kFileFormatVersion;
  j["yaw_hypotheses_deg"] = c.yawHypothesesDeg;
  j["delta"] = c.delta;
  j["cluster_threshold"] = c.clusterThreshold;
  j["stage2"] = {{"lambda_3d", c.stage2Lambda3d},
                 {"lambda_beta", c.stage2LambdaBeta},
                 {"lambda_theta", c.stage2LambdaTheta},
                 {"optim", optimToJson(c.stage2Optim)}};
  j["stage4"] = {{"lambda_m", c.stage4LambdaM},
                 {"lambda_beta", c.stage4LambdaBeta},
                 {"lambda_theta", c.stage4LambdaTheta},
                 {"optim", optimToJson(c.stage4Optim)}};
  j["localization"] = {{"lambda_3d", c.localization.lambda3d},
                       {"lambda_beta", c.localization.lambdaBeta},
                       {"parallel", c.localization.parallel},
                       {"optim", optimToJson(c.localization.optim)}};
  j["refinement_repeats"] = c.refinementRepeats;
  j["up_axis"] = std::string(1, c.upAxis);
  j["parallel_hypotheses"] = c.parallelHypotheses;
  return j;
}

SolverConfig readConfig(const std::string& path) {
  return configFromJson(readJsonFile(path));
}

json clustersToJson(const MarkerSegmentation& segmentation, const MarkerSequence& markers) {
  const int M = markers.numMarkers();
  std::vector<int> labelOf(M, -1);
  for (size_t i = 0; i < segmentation.markers.size(); ++i) {
    labelOf[segmentation.markers[i]] = segmentation.clusters.labels[i];
  }
  json labels = json::array();
  for (int m = 0; m < M; ++m) {
    labels.push_back(labelOf[m] < 0 ? json(nullptr) : json(labelOf[m]));
  }

  const Eigen::MatrixXd& a = segmentation.affinity.affinity;
  std::vector<double> finite;
  long infinite = 0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = i + 1; k < a.cols(); ++k) {
      if (std::isfinite(a(i, k))) {
        finite.push_back(a(i, k));
      } else {
        ++infinite;
      }
    }
  }
  json summary = {{"pairs", finite.size() + infinite}, {"unobserved_pairs", infinite}};
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    summary["min"] = finite.front();
    summary["median"] = finite[finite.size() / 2];
    summary["max"] = finite.back();
  }

  json j;
  j["format"] = "clusters";
  j["format_version"] = kFileFormatVersion;
  j["marker_ids"] = markers.markerIds;
  j["num_clusters"] = segmentation.clusters.numClusters;
  j["labels"] = std::move(labels);
  j["affinity_summary"] = std::move(summary);
  j["warnings"] = segmentation.affinity.warnings;
  return j;
}

json localizationToJson(const ChainFitResult& result, const BodyModel& model) {
  json j;
  j["format"] = "localization";
  j["format_version"] = kFileFormatVersion;
  j["requested_length"] = result.requestedLength;
  j["chain_length"] = result.chainLength;
  j["winning_chain"] = chainNames(result.chain, model);
  j["energy"] = result.energy;
  j["chamfer"] = result.chamferTerm;
  j["shape"] = result.shapeTerm;
  json table = json::array();
  for (const CandidateFit& c : result.candidates) {
    table.push_back({{"chain", chainNames(c.chain, model)},
                     {"energy", c.energy},
                     {"chamfer", c.chamferTerm},
                     {"shape", c.shapeTerm},
                     {"iterations", c.iterations},
                     {"status", toString(c.status)}});
  }
  j["candidates"] = std::move(table);
  j["warnings"] = result.warnings;
  return j;
}

json resultToJson(const SolveResult& result, const BodyModel& model) {
  json j;
  j["format"] = "solve-result";
  j["format_version"] = kFileFormatVersion;
  j["chosen_yaw_deg"] = result.chosenYawDeg;
  j["chosen_hypothesis"] = result.chosenHypothesis;
  j["converged"] = result.converged;
  j["params"] = paramsToJson(result.params);
  json corr = json::array();
  for (const int v : result.correspondence) {
    corr.push_back(v == kUnassigned ? json(nullptr) : json(v));
  }
  j["correspondence"] = std::move(corr);
  json clusters = json::array();
  for (size_t m = 0, i = 0; m < result.correspondence.size(); ++m) {
    if (i < result.activeMarkers.size() && result.activeMarkers[i] == static_cast<int>(m)) {
      clusters.push_back(result.clusters.labels[i++]);
    } else {
      clusters.push_back(nullptr);
    }
  }
  j["clusters"] = std::move(clusters);
  j["localization"] = localizationToJson(result.localization, model);
  json diag = json::array();
  for (const StageDiagnostics& d : result.diagnostics) {
    diag.push_back({{"stage", d.stage},
                    {"yaw_deg", d.yawDeg},
                    {"chamfer", d.chamfer},
                    {"marker_offset", d.markerOffset < 0.0 ? json(nullptr) : json(d.markerOffset)},
                    {"shape", d.shape},
                    {"pose", d.pose},
                    {"objective", d.objective},
                    {"iterations", d.iterations},
                    {"status", toString(d.status)}});
  }
  j["diagnostics"] = std::move(diag);
  j["warnings"] = result.warnings;
  return j;
}

std::string formatDiagnostics(const SolveResult& result) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "stage" << std::right << std::setw(8) << "yaw" << std::setw(14) << "E_3D"
     << std::setw(14) << "E_M" << std::setw(14) << "E_beta" << std::setw(14) << "E_theta" << std::setw(8) << "iters"
     << "  status\n";
  os << std::scientific << std::setprecision(4);
  for (const StageDiagnostics& d : result.diagnostics) {
    os << std::left << std::setw(14) << d.stage << std::right << std::fixed << std::setprecision(1) << std::setw(8)
       << d.yawDeg << std::scientific << std::setprecision(4) << std::setw(14) << d.chamfer;
    if (d.markerOffset < 0.0) {
      os << std::setw(14) << "-";
    } else {
      os << std::setw(14) << d.markerOffset;
    }
    os << std::setw(14) << d.shape << std::setw(14) << d.pose << std::setw(8) << d.iterations << "  "
       << toString(d.status) << "\n";
  }
  os << std::fixed << std::setprecision(1) << "chosen yaw: " << result.chosenYawDeg << " deg\n";
  return os.str();
}

json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void writeJsonFile(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("failed writing " + path);
  }
}

} // namespace mocap
