#include "cli.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mocap/io.h"
#include "mocap/metrics.h"
#include "mocap/model_builder.h"
#include "mocap/model_io.h"
#include "mocap/synth.h"

namespace mocap::cli {
namespace {

using nlohmann::json;

struct CommonOptions {
  std::string model;
  std::string config;
  std::string upAxis;
  std::uint64_t seed = 0;
  double rate = 30.0;
};

void addModelOption(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--model", o.model, "Body model file (default: built-in procedural model)")->check(CLI::ExistingFile);
}

void addSolverOptions(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Solver configuration JSON")->check(CLI::ExistingFile);
  cmd->add_option("--up-axis", o.upAxis, "World up axis of the marker data")->check(CLI::IsMember({"x", "y", "z"}));
  cmd->add_option("--rate", o.rate, "Target frame rate; markers are decimated by an integer factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for stochastic paths (the solver itself is deterministic)")
      ->capture_default_str();
}

BodyModel loadModel(const CommonOptions& o) {
  return o.model.empty() ? buildDefaultBodyModel() : loadBodyModel(o.model);
}

SolverConfig loadConfig(const CommonOptions& o) {
  SolverConfig cfg = o.config.empty() ? SolverConfig{} : readConfig(o.config);
  if (!o.upAxis.empty()) {
    cfg.upAxis = o.upAxis[0];
  }
  cfg.validate();
  return cfg;
}

IngestedPrior loadPrior(const std::string& path, const MarkerSequence& markers) {
  PriorFile file = readPrior(path);
  if (file.frameRate != markers.frameRate) {
    file = decimatePrior(file, markers.frameRate);
  }
  return ingestPrior(file, markers.numFrames());
}

void writeText(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  f << text;
}

json priorAudit(const IngestedPrior& ip) {
  json rows = json::array();
  for (int t = 0; t < ip.perFrameBeta.rows(); ++t) {
    rows.push_back(std::vector<double>(ip.perFrameBeta.row(t).data(),
                                       ip.perFrameBeta.row(t).data() + ip.perFrameBeta.cols()));
  }
  std::vector<int> valid(ip.prior.valid.begin(), ip.prior.valid.end());
  return {{"per_frame_beta", std::move(rows)}, {"valid", valid}, {"warnings", ip.warnings}};
}

// ---- subcommands -----------------------------------------------------------

struct SolveArgs {
  CommonOptions common;
  std::string markers;
  std::string prior;
  std::string out;
  std::string table;
  bool parallel = false;
};

int runSolve(const SolveArgs& a, std::ostream& out) {
  const BodyModel model = loadModel(a.common);
  SolverConfig cfg = loadConfig(a.common);
  if (a.parallel) {
    cfg.parallelHypotheses = true;
    cfg.localization.parallel = true;
  }
  const MarkerSequence markers = readMarkers(a.markers, a.common.rate);
  const IngestedPrior ip = loadPrior(a.prior, markers);

  const SolveResult result = solve(markers, ip.prior, model, cfg);
  json j = resultToJson(result, model);
  j["marker_ids"] = markers.markerIds;
  j["frame_rate"] = markers.frameRate;
  j["seed"] = a.common.seed;
  // threading settings do not change the result, so they stay out of the output
  json echoed = configToJson(cfg);
  echoed.erase("parallel_hypotheses");
  echoed["localization"].erase("parallel");
  j["config"] = std::move(echoed);
  j["prior"] = priorAudit(ip);
  writeJsonFile(j, a.out);

  const std::string table = formatDiagnostics(result);
  out << table;
  for (const std::string& w : result.warnings) {
    out << "warning: " << w << "\n";
  }
  if (!a.table.empty()) {
    writeText(table, a.table);
  }
  return kOk;
}

struct SegmentArgs {
  CommonOptions common;
  std::string markers;
  std::string out;
};

int runSegment(const SegmentArgs& a, std::ostream& out) {
  const SolverConfig cfg = loadConfig(a.common);
  const MarkerSequence markers = readMarkers(a.markers, a.common.rate);
  const MarkerSegmentation seg = segmentMarkers(markers, cfg.clusterThreshold);
  writeJsonFile(clustersToJson(seg, markers), a.out);
  out << seg.clusters.numClusters << " cluster(s) over " << seg.markers.size() << " marker(s)\n";
  for (const std::string& w : seg.affinity.warnings) {
    out << "warning: " << w << "\n";
  }
  return kOk;
}

struct LocalizeArgs {
  CommonOptions common;
  std::string markers;
  std::string prior;
  std::string out;
};

int runLocalize(const LocalizeArgs& a, std::ostream& out) {
  const BodyModel model = loadModel(a.common);
  const SolverConfig cfg = loadConfig(a.common);
  const MarkerSequence markers = readMarkers(a.markers, a.common.rate);
  const IngestedPrior ip = loadPrior(a.prior, markers);
  ip.prior.params.validate(model);

  const MarkerSegmentation seg = segmentMarkers(markers, cfg.clusterThreshold);
  const ChainFitResult fit = localizePart(markers.selectMarkers(seg.markers), seg.clusters, model, ip.prior.params,
                                          ip.prior.params.beta, cfg.localization);
  json j = localizationToJson(fit, model);
  j["clusters"] = clustersToJson(seg, markers);
  j["params"] = paramsToJson(fit.fittedParams);
  writeJsonFile(j, a.out);

  out << "winning chain:";
  for (const int b : fit.chain.bones) {
    out << " " << model.boneName(b);
  }
  out << "\n" << fit.candidates.size() << " candidate(s), energy " << std::scientific << std::setprecision(4)
      << fit.energy << "\n";
  for (const std::string& w : fit.warnings) {
    out << "warning: " << w << "\n";
  }
  return kOk;
}

struct SynthArgs {
  std::string model;
  std::string outDir;
  std::string scenario = "walk";
  int markers = 50;
  int frames = 150;
  double fps = 30.0;
  std::string part;
  std::uint64_t seed = 0;
  double sigmaThetaDeg = 5.0;
  double sigmaBeta = 0.2;
  std::optional<double> yawDeg;
  bool keepTranslation = false;
  std::vector<std::string> gaps;
  double dropout = 0.0;
  int dropoutFrames = 10;
  bool writeModel = false;
};

std::pair<int, int> parseGap(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError("--prior-gap", "expected FIRST:LAST, got '" + text + "'");
  }
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--prior-gap", "expected FIRST:LAST, got '" + text + "'");
  }
}

int runSynth(const SynthArgs& a, std::ostream& out) {
  const BodyModel model = a.model.empty() ? buildDefaultBodyModel() : loadBodyModel(a.model);
  ScenarioSpec spec;
  spec.motion = a.scenario;
  spec.frames = a.frames;
  spec.frameRate = a.fps;
  spec.markers = a.markers;
  spec.part = a.part;
  spec.seed = a.seed;
  spec.sigmaThetaDeg = a.sigmaThetaDeg;
  spec.sigmaBeta = a.sigmaBeta;
  spec.yawDeg = a.yawDeg;
  spec.invalidateTranslation = !a.keepTranslation;
  for (const std::string& g : a.gaps) {
    spec.priorGaps.push_back(parseGap(g));
  }
  spec.dropoutProbability = a.dropout;
  spec.dropoutFrames = a.dropoutFrames;
  const Scenario sc = makeScenario(model, spec);

  const std::filesystem::path dir(a.outDir);
  std::filesystem::create_directories(dir);
  writeMarkers(sc.markers, (dir / "markers.json").string());
  writeParams(sc.truth, (dir / "truth.json").string());
  writePrior(makePriorFile(sc.prior.params, sc.prior.present, a.fps, !spec.invalidateTranslation),
             (dir / "prior.json").string());
  if (a.writeModel) {
    saveBodyModel(model, (dir / "model.json").string());
  }
  out << "wrote " << sc.markers.numMarkers() << " markers x " << sc.markers.numFrames() << " frames to "
      << dir.string() << " (prior yaw offset " << sc.yawDeg << " deg)\n";
  return kOk;
}

struct EvalArgs {
  CommonOptions common;
  std::string pred;
  std::string ref;
  std::string markers;
  std::string json;
  double fps = 30.0;
};

int runEval(const EvalArgs& a, std::ostream& out) {
  const BodyModel model = loadModel(a.common);
  const BodyParams pred = readParams(a.pred);
  const BodyParams ref = readParams(a.ref);
  pred.validate(model);
  ref.validate(model);
  if (pred.numFrames() != ref.numFrames()) {
    throw std::invalid_argument("prediction has " + std::to_string(pred.numFrames()) + " frames, reference has " +
                                std::to_string(ref.numFrames()));
  }
  const auto predV = posedVertexTracks(model, pred);
  const auto refV = posedVertexTracks(model, ref);
  const auto predJ = posedJointTracks(model, pred);
  const auto refJ = posedJointTracks(model, ref);

  json report = {{"format", "metrics"}, {"format_version", kFileFormatVersion}};
  report["mpjpe_mm"] = mpjpe(predJ, refJ);
  report["v2v_mm"] = v2v(predV, refV);
  report["mpjve_mm_s"] = pred.numFrames() > 1 ? json(mpjve(predJ, refJ, a.fps)) : json(nullptr);
  std::vector<std::string> warnings;
  if (!a.markers.empty()) {
    const MarkerSequence markers = readMarkers(a.markers, a.fps);
    if (markers.numFrames() != pred.numFrames()) {
      throw std::invalid_argument("marker file frame count does not match the prediction");
    }
    const MarkerSurfaceResult p = markerToSurface(markers, predV, model.data().faces);
    const MarkerSurfaceResult r = markerToSurface(markers, refV, model.data().faces);
    report["m2s_mm"] = p.meanMm;
    report["reference_m2s_mm"] = r.meanMm;
    warnings = p.warnings;
  }
  report["warnings"] = warnings;

  auto cell = [&](const char* key) {
    std::ostringstream s;
    if (report.contains(key) && !report[key].is_null()) {
      s << std::fixed << std::setprecision(3) << report[key].get<double>();
    } else {
      s << "-";
    }
    return s.str();
  };
  out << std::left << std::setw(12) << "" << std::right << std::setw(12) << "m2s" << std::setw(12) << "MPJPE"
      << std::setw(12) << "MPJVE" << std::setw(12) << "V2V" << "\n";
  out << std::left << std::setw(12) << "prediction" << std::right << std::setw(12) << cell("m2s_mm") << std::setw(12)
      << cell("mpjpe_mm") << std::setw(12) << cell("mpjve_mm_s") << std::setw(12) << cell("v2v_mm") << "\n";
  out << std::left << std::setw(12) << "reference" << std::right << std::setw(12) << cell("reference_m2s_mm")
      << std::setw(12) << "0.000" << std::setw(12) << (report["mpjve_mm_s"].is_null() ? "-" : "0.000")
      << std::setw(12) << "0.000" << "\n";
  out << "units: mm (MPJVE mm/s)\n";
  for (const std::string& w : warnings) {
    out << "warning: " << w << "\n";
  }
  if (!a.json.empty()) {
    writeJsonFile(report, a.json);
  }
  return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Marker-based body solving from unlabeled optical markers and a per-frame body prior", "mocap"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SolveArgs solveArgs;
  CLI::App* solveCmd = app.add_subcommand("solve", "Solve body shape, pose and translation from markers");
  solveCmd->add_option("--markers", solveArgs.markers, "Marker JSON file")->required()->check(CLI::ExistingFile);
  solveCmd->add_option("--prior", solveArgs.prior, "Prior JSON file")->required()->check(CLI::ExistingFile);
  solveCmd->add_option("--out", solveArgs.out, "Result JSON file")->required();
  solveCmd->add_option("--table", solveArgs.table, "Also write the diagnostics table to this file");
  solveCmd->add_flag("--parallel", solveArgs.parallel, "Fit chain candidates and yaw hypotheses on worker threads");
  addModelOption(solveCmd, solveArgs.common);
  addSolverOptions(solveCmd, solveArgs.common);

  SegmentArgs segArgs;
  CLI::App* segCmd = app.add_subcommand("segment", "Cluster markers that move rigidly together");
  segCmd->add_option("--markers", segArgs.markers, "Marker JSON file")->required()->check(CLI::ExistingFile);
  segCmd->add_option("--out", segArgs.out, "Cluster report JSON file")->required();
  addSolverOptions(segCmd, segArgs.common);

  LocalizeArgs locArgs;
  CLI::App* locCmd = app.add_subcommand("localize", "Find the kinematic chain that best explains the markers");
  locCmd->add_option("--markers", locArgs.markers, "Marker JSON file")->required()->check(CLI::ExistingFile);
  locCmd->add_option("--prior", locArgs.prior, "Prior JSON file")->required()->check(CLI::ExistingFile);
  locCmd->add_option("--out", locArgs.out, "Localization report JSON file")->required();
  addModelOption(locCmd, locArgs.common);
  addSolverOptions(locCmd, locArgs.common);

  SynthArgs synArgs;
  CLI::App* synCmd = app.add_subcommand("synth", "Generate synthetic markers, ground truth and a noisy prior");
  synCmd->add_option("--scenario", synArgs.scenario, "Motion name")
      ->check(CLI::IsMember(motionNames()))
      ->capture_default_str();
  synCmd->add_option("--markers", synArgs.markers, "Number of markers")->check(CLI::PositiveNumber)->capture_default_str();
  synCmd->add_option("--frames", synArgs.frames, "Number of frames")->check(CLI::PositiveNumber)->capture_default_str();
  synCmd->add_option("--fps", synArgs.fps, "Frame rate")->check(CLI::PositiveNumber)->capture_default_str();
  synCmd->add_option("--part", synArgs.part, "Place markers only on this model part, e.g. left_leg");
  synCmd->add_option("--seed", synArgs.seed, "Random seed")->capture_default_str();
  synCmd->add_option("--sigma-theta-deg", synArgs.sigmaThetaDeg, "Prior pose noise per coordinate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synCmd->add_option("--sigma-beta", synArgs.sigmaBeta, "Prior shape noise")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synCmd->add_option("--yaw-deg", synArgs.yawDeg, "Prior yaw offset (default: one of 0/90/180/270 drawn from the seed)");
  synCmd->add_flag("--keep-translation", synArgs.keepTranslation, "Keep the true translation in the prior");
  synCmd->add_option("--prior-gap", synArgs.gaps, "Frames FIRST:LAST missing from the prior (repeatable)");
  synCmd->add_option("--dropout", synArgs.dropout, "Per-frame probability that a marker starts a hidden interval")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synCmd->add_option("--dropout-frames", synArgs.dropoutFrames, "Length of a hidden interval")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synCmd->add_option("--out-dir", synArgs.outDir, "Directory for markers.json, truth.json and prior.json")->required();
  synCmd->add_flag("--write-model", synArgs.writeModel, "Also write the body model to model.json");
  synCmd->add_option("--model", synArgs.model, "Body model file (default: built-in procedural model)")
      ->check(CLI::ExistingFile);

  EvalArgs evalArgs;
  CLI::App* evalCmd = app.add_subcommand("eval", "Compare a solved body against a reference");
  evalCmd->add_option("--pred", evalArgs.pred, "Prediction: params or solve result JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evalCmd->add_option("--ref", evalArgs.ref, "Reference params JSON")->required()->check(CLI::ExistingFile);
  evalCmd->add_option("--markers", evalArgs.markers, "Marker file for the marker-to-surface distance")
      ->check(CLI::ExistingFile);
  evalCmd->add_option("--fps", evalArgs.fps, "Frame rate used for velocities")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evalCmd->add_option("--json", evalArgs.json, "Also write the metrics as JSON");
  addModelOption(evalCmd, evalArgs.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) {
      failing = sub;
    }
    err << failing->help();
    return kUsage;
  }

  try {
    if (solveCmd->parsed()) {
      return runSolve(solveArgs, out);
    }
    if (segCmd->parsed()) {
      return runSegment(segArgs, out);
    }
    if (locCmd->parsed()) {
      return runLocalize(locArgs, out);
    }
    if (synCmd->parsed()) {
      return runSynth(synArgs, out);
    }
    if (evalCmd->parsed()) {
      return runEval(evalArgs, out);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  err << app.help();
  return kUsage;
}

} // namespace mocap::cli
