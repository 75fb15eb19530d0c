#include "mocap/part_localization.h"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace mocap {

namespace {

double median(std::vector<double>& v) {
  const size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Vec3 componentMedian(const Points& P, const std::vector<int>& rows) {
  Vec3 out;
  std::vector<double> buf(rows.size());
  for (int axis = 0; axis < 3; ++axis) {
    for (size_t i = 0; i < rows.size(); ++i) {
      buf[i] = P(rows[i], axis);
    }
    out[axis] = median(buf);
  }
  return out;
}

} // namespace

Eigen::MatrixXd alignMedian(const MarkerSequence& markers, const std::vector<Points>& vertexTracks) {
  const int T = markers.numFrames();
  if (static_cast<int>(vertexTracks.size()) != T) {
    throw std::invalid_argument("alignMedian: frame count mismatch");
  }
  Eigen::MatrixXd offsets = Eigen::MatrixXd::Zero(T, 3);
  std::vector<char> have(T, 0);
  for (int t = 0; t < T; ++t) {
    std::vector<int> vis;
    for (int m = 0; m < markers.numMarkers(); ++m) {
      if (markers.visible(t, m)) {
        vis.push_back(m);
      }
    }
    if (vis.empty()) {
      continue;
    }
    if (vertexTracks[t].rows() == 0) {
      throw std::invalid_argument("alignMedian: empty vertex set");
    }
    std::vector<int> all(vertexTracks[t].rows());
    for (size_t i = 0; i < all.size(); ++i) {
      all[i] = static_cast<int>(i);
    }
    offsets.row(t) = (componentMedian(markers.positions[t], vis) - componentMedian(vertexTracks[t], all)).transpose();
    have[t] = 1;
  }
  if (std::find(have.begin(), have.end(), 1) == have.end()) {
    throw std::invalid_argument("alignMedian: no visible markers in any frame");
  }
  for (int t = 0; t < T; ++t) {
    if (have[t]) {
      continue;
    }
    for (int d = 1; d < T; ++d) {
      if (t - d >= 0 && have[t - d]) {
        offsets.row(t) = offsets.row(t - d);
        break;
      }
      if (t + d < T && have[t + d]) {
        offsets.row(t) = offsets.row(t + d);
        break;
      }
    }
  }
  return offsets;
}

ChainFit fitChain(
    const MarkerSequence& markers,
    const KinematicChain& chain,
    const BodyModel& model,
    const BodyParams& init,
    const Eigen::VectorXd& betaPrior,
    const LocalizationConfig& config) {
  if (chain.bones.empty()) {
    throw std::invalid_argument("fitChain: empty chain");
  }
  EnergyInputs in;
  in.model = &model;
  in.markers = &markers;
  in.chamferVertices = partVertices(model, chain.bones);
  in.betaPrior = betaPrior;
  prepareChamferSearch(in);
  const EnergyWeights w{.chamfer = config.lambda3d, .shape = config.lambdaBeta};

  ChainFit out;
  out.params = init;
  const std::vector<Points> full = posedVertexTracks(model, init);
  std::vector<Points> part(full.size());
  for (size_t t = 0; t < full.size(); ++t) {
    part[t] = full[t](in.chamferVertices, Eigen::all);
  }
  out.params.gamma += alignMedian(markers, part);

  FreeMask mask;
  mask.beta = true;
  mask.gamma = true;
  mask.rotations.assign(model.numBones(), 0);
  for (const int b : chain.bones) {
    mask.rotations[b] = 1;
  }
  const ParamPacker packer(out.params, mask);
  BodyParams work = out.params;
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    double yaw = 0.0;
    packer.unpack(x, work, yaw);
    ParamGradient grad;
    const EnergyTerms e = evaluateEnergy(in, w, work, 0.0, &grad);
    g = packer.packGradient(grad);
    return e.total;
  };
  const OptimResult r = minimizeLbfgs(objective, packer.pack(out.params, 0.0), config.optim);
  double yaw = 0.0;
  packer.unpack(r.x, out.params, yaw);

  const EnergyTerms e = evaluateEnergy(in, w, out.params, 0.0);
  out.summary.chain = chain;
  out.summary.energy = e.total;
  out.summary.chamferTerm = e.chamfer;
  out.summary.shapeTerm = e.shape;
  out.summary.status = r.status;
  out.summary.iterations = r.iterations;
  return out;
}

ChainFitResult localizePart(
    const MarkerSequence& markers,
    const ClusterAssignment& clusters,
    const BodyModel& model,
    const BodyParams& prior,
    const Eigen::VectorXd& betaPrior,
    const LocalizationConfig& config) {
  if (prior.numFrames() != markers.numFrames()) {
    throw std::invalid_argument("localizePart: prior and marker frame counts differ");
  }
  if (clusters.numClusters < 1) {
    throw std::invalid_argument("localizePart: no clusters");
  }
  ChainFitResult res;
  res.requestedLength = clusters.numClusters;
  int k = clusters.numClusters;
  std::vector<KinematicChain> chains;
  if (k <= longestChainLength(model)) {
    chains = enumerateChains(model, k);
  }
  if (chains.empty()) {
    k = longestChainLength(model);
    chains = enumerateChains(model, k);
    res.warnings.push_back("no chain of length " + std::to_string(clusters.numClusters) +
                           "; searched the longest available length " + std::to_string(k));
  }
  res.chainLength = k;

  std::vector<ChainFit> fits(chains.size());
  if (config.parallel && chains.size() > 1) {
    const size_t workers = std::max<size_t>(1, std::min<size_t>(chains.size(), std::thread::hardware_concurrency()));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (size_t i = w; i < chains.size(); i += workers) {
            fits[i] = fitChain(markers, chains[i], model, prior, betaPrior, config);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  } else {
    for (size_t i = 0; i < chains.size(); ++i) {
      fits[i] = fitChain(markers, chains[i], model, prior, betaPrior, config);
    }
  }

  for (size_t i = 0; i < fits.size(); ++i) {
    res.candidates.push_back(fits[i].summary);
    if (res.winner < 0 || fits[i].summary.energy < fits[res.winner].summary.energy) {
      res.winner = static_cast<int>(i);
    }
  }
  const ChainFit& best = fits[res.winner];
  res.chain = best.summary.chain;
  res.fittedParams = best.params;
  res.energy = best.summary.energy;
  res.chamferTerm = best.summary.chamferTerm;
  res.shapeTerm = best.summary.shapeTerm;
  return res;
}

} // namespace mocap
