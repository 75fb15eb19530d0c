#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mocap/solver.h"

namespace mocap {

inline constexpr const char* kFileFormatVersion = "1.0";

// ---- markers ---------------------------------------------------------------

/// Integer frame-dropping factor from `sourceRate` to `targetRate`. Throws with
/// the nearest reachable rate when the ratio is not an integer.
int decimationFactor(double sourceRate, double targetRate);

/// Missing positions are written as null.
nlohmann::json markersToJson(const MarkerSequence& markers);

/// Null entries and positions exactly at the origin become invisible. A
/// positive `targetRate` keeps every k-th frame starting at frame 0.
MarkerSequence markersFromJson(const nlohmann::json& j, double targetRate = 0.0);

void writeMarkers(const MarkerSequence& markers, const std::string& path);
MarkerSequence readMarkers(const std::string& path, double targetRate = 30.0);

// ---- prior -----------------------------------------------------------------

struct PriorRecord {
  int frame = 0;
  bool present = false;
  Vec3 phi = Vec3::Zero();
  Eigen::VectorXd theta;
  std::optional<Vec3> gamma;
  Eigen::VectorXd beta;
};

struct PriorFile {
  double frameRate = 30.0;
  std::vector<PriorRecord> records; // strictly increasing frame indices
};

struct IngestedPrior {
  Prior prior;
  Eigen::MatrixXd perFrameBeta; // T x S after gap filling
  std::vector<std::string> warnings;
};

/// Fills leading/trailing gaps with the nearest present frame and interior gaps
/// by interpolation (lerp for shape and translation, slerp per rotation). The
/// sequence shape is the componentwise median over present frames.
IngestedPrior ingestPrior(const PriorFile& file, int targetFrames);

/// Keeps records whose frame index is a multiple of the decimation factor and
/// renumbers them at `targetRate`. Throws like decimationFactor.
PriorFile decimatePrior(const PriorFile& file, double targetRate);
/// Records for every frame; frames with present[t] == false carry no data.
PriorFile makePriorFile(const BodyParams& params, const std::vector<bool>& present, double frameRate = 30.0,
                        bool withTranslation = true);

nlohmann::json priorToJson(const PriorFile& file);
PriorFile priorFromJson(const nlohmann::json& j);
void writePrior(const PriorFile& file, const std::string& path);
PriorFile readPrior(const std::string& path);

// ---- params, config, results -----------------------------------------------

nlohmann::json paramsToJson(const BodyParams& params);
BodyParams paramsFromJson(const nlohmann::json& j);
void writeParams(const BodyParams& params, const std::string& path);
/// Accepts a params file or a solve result file (its "params" member).
BodyParams readParams(const std::string& path);

/// Missing keys keep their defaults; unknown keys are rejected.
SolverConfig configFromJson(const nlohmann::json& j);
nlohmann::json configToJson(const SolverConfig& config);
SolverConfig readConfig(const std::string& path);

/// Labels keyed by marker id (null for never-visible markers), cluster count and
/// a summary of the finite affinity entries.
nlohmann::json clustersToJson(const MarkerSegmentation& segmentation, const MarkerSequence& markers);
nlohmann::json localizationToJson(const ChainFitResult& result, const BodyModel& model);
nlohmann::json resultToJson(const SolveResult& result, const BodyModel& model);

/// Fixed-width table of the per-stage diagnostics.
std::string formatDiagnostics(const SolveResult& result);

/// Parses a JSON file; errors name the file and the byte offset.
nlohmann::json readJsonFile(const std::string& path);
/// Writes `j` with two-space indentation and a trailing newline.
void writeJsonFile(const nlohmann::json& j, const std::string& path);

} // namespace mocap
