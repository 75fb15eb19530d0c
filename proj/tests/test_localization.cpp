#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.h"
#include "mocap/part_localization.h"

using namespace mocap;

namespace {

double sortMedian(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Three bones along +x with distinct vertex layouts: a pair, a collinear
/// triple and a spread-out five-point fan.
BodyModel toyChain() {
  BodyModelData d;
  d.parents = {kNoParent, 0, 1};
  d.boneNames = {"a", "b", "c"};
  d.restJoints.resize(3, 3);
  d.restJoints << 0, 0, 0, 0.3, 0, 0, 0.6, 0, 0;
  d.templateVertices.resize(10, 3);
  d.templateVertices << 0.1, 0.02, 0, 0.2, -0.02, 0,              // bone a
      0.35, 0, 0, 0.45, 0, 0, 0.55, 0, 0,                         // bone b
      0.62, 0.1, 0, 0.7, -0.08, 0.05, 0.8, 0.02, -0.1, 0.9, 0.12, 0.07, 0.75, 0.0, 0.15; // bone c
  d.lbsWeights = Eigen::MatrixXd::Zero(10, 3);
  for (int v = 0; v < 10; ++v) {
    d.lbsWeights(v, v < 2 ? 0 : (v < 5 ? 1 : 2)) = 1.0;
  }
  d.faces.resize(1, 3);
  d.faces << 5, 6, 7;
  d.shapeBasis = Eigen::MatrixXd::Zero(30, 2);
  d.jointShapeBasis = Eigen::MatrixXd::Zero(9, 2);
  d.shapeBasis(0, 0) = 0.01;
  return BodyModel(std::move(d));
}

} // namespace

TEST(AlignMedianTest, ShiftedCloudAndSymmetry) {
  std::mt19937_64 rng(1);
  const auto tracks = fixtures::randomTracks(3, 7, rng);
  MarkerSequence mk;
  for (const Points& p : tracks) {
    mk.positions.push_back(p.rowwise() + Eigen::RowVector3d(1, 0, 0));
  }
  mk.visible = VisibilityMask::Constant(3, 7, true);
  mk.markerIds.assign(7, "m");
  const Eigen::MatrixXd off = alignMedian(mk, tracks);
  for (int t = 0; t < 3; ++t) {
    EXPECT_LE((off.row(t) - Eigen::RowVector3d(1, 0, 0)).norm(), 1e-15);
  }

  Points sym(4, 3);
  sym << 1, 0, 0, -1, 0, 0, 0, 2, -1, 0, -2, 1;
  MarkerSequence s;
  s.positions = {sym};
  s.visible = VisibilityMask::Constant(1, 4, true);
  s.markerIds.assign(4, "m");
  EXPECT_LE(alignMedian(s, {-sym}).norm(), 1e-15);
}

TEST(AlignMedianTest, MatchesSortOracleAndCarriesEmptyFrames) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tracks = fixtures::randomTracks(4, 5 + trial % 6, rng);
    MarkerSequence mk = fixtures::randomMarkers(4, 7, rng, 0.3);
    const Eigen::MatrixXd off = alignMedian(mk, tracks);
    for (int t = 0; t < 4; ++t) {
      for (int axis = 0; axis < 3; ++axis) {
        std::vector<double> m, v;
        for (int i = 0; i < 7; ++i) {
          if (mk.visible(t, i)) {
            m.push_back(mk.positions[t](i, axis));
          }
        }
        for (int i = 0; i < tracks[t].rows(); ++i) {
          v.push_back(tracks[t](i, axis));
        }
        EXPECT_DOUBLE_EQ(off(t, axis), sortMedian(m) - sortMedian(v));
      }
    }
  }

  const auto tracks = fixtures::randomTracks(5, 6, rng);
  MarkerSequence mk = fixtures::randomMarkers(5, 3, rng, 0.0);
  mk.visible.row(0).setConstant(false);
  mk.visible.row(2).setConstant(false);
  const Eigen::MatrixXd off = alignMedian(mk, tracks);
  EXPECT_EQ(off.row(0), off.row(1));
  // frame 2 is equidistant from frames 1 and 3; the earlier one wins
  EXPECT_EQ(off.row(2), off.row(1));
  mk.visible.setConstant(false);
  EXPECT_THROW(alignMedian(mk, tracks), std::invalid_argument);
}

TEST(LocalizePartTest, SingleBoneMarkersSelectThatBone) {
  const BodyModel model = toyChain();
  std::mt19937_64 rng(3);
  BodyParams truth = BodyParams::zeros(3, 3, 2);
  for (int t = 0; t < 3; ++t) {
    truth.setRotation(t, 1, Vec3(0, 0, 0.2 * t));
    truth.setRotation(t, 2, Vec3(0.1 * t, 0, -0.3));
    truth.gamma.row(t) << 0.05 * t, 0.1, 0;
  }
  const auto tracks = posedVertexTracks(model, truth);
  MarkerSequence mk;
  for (const Points& p : tracks) {
    mk.positions.push_back(p.bottomRows(5));
  }
  mk.visible = VisibilityMask::Constant(3, 5, true);
  mk.markerIds.assign(5, "m");

  ClusterAssignment one;
  one.labels.assign(5, 0);
  one.numClusters = 1;
  const ChainFitResult r = localizePart(mk, one, model, truth, truth.beta, {});
  ASSERT_EQ(r.candidates.size(), 3u);
  EXPECT_EQ(r.chain.bones, std::vector<int>{2});
  EXPECT_EQ(r.winner, 2);
  EXPECT_LE(r.chamferTerm, 1e-10);
  for (const CandidateFit& c : r.candidates) {
    EXPECT_LE(r.energy, c.energy);
    EXPECT_NEAR(c.energy, 10.0 * c.chamferTerm + 0.1 * c.shapeTerm, 1e-9 * std::max(1.0, c.energy));
  }
  EXPECT_NEAR(r.energy, 10.0 * r.chamferTerm + 0.1 * r.shapeTerm, 1e-12);
}

TEST(LocalizePartTest, FallbackParallelAndNoDuplicateCandidates) {
  const BodyModel model = fixtures::toyModel(8, 60);
  std::mt19937_64 rng(9);
  const BodyParams truth = fixtures::randomParams(model, 3, rng, 0.3);
  const MarkerSequence mk = fixtures::markersNear(posedVertexTracks(model, truth), 8, rng, 0.1, 0.01);

  ClusterAssignment many;
  many.numClusters = 8;
  for (int m = 0; m < 8; ++m) {
    many.labels.push_back(m);
  }
  LocalizationConfig cfg;
  cfg.optim.maxIters = 30;
  const ChainFitResult serial = localizePart(mk, many, model, truth, truth.beta, cfg);
  EXPECT_EQ(serial.requestedLength, 8);
  EXPECT_EQ(serial.chainLength, longestChainLength(model));
  ASSERT_EQ(serial.warnings.size(), 1u);

  cfg.parallel = true;
  const ChainFitResult parallel = localizePart(mk, many, model, truth, truth.beta, cfg);
  EXPECT_EQ(parallel.winner, serial.winner);
  EXPECT_EQ(parallel.energy, serial.energy);
  EXPECT_EQ(parallel.fittedParams.theta, serial.fittedParams.theta);

  ClusterAssignment two;
  two.numClusters = 2;
  two.labels = {0, 0, 0, 0, 1, 1, 1, 1};
  const ChainFitResult r = localizePart(mk, two, model, truth, truth.beta, cfg);
  std::set<std::vector<int>> sets;
  for (const CandidateFit& c : r.candidates) {
    std::vector<int> s = c.chain.bones;
    std::sort(s.begin(), s.end());
    EXPECT_TRUE(sets.insert(s).second);
  }
}

TEST(FitChainTest, OnlyChainBonesShapeAndTranslationMove) {
  const BodyModel model = fixtures::toyModel(10, 50);
  std::mt19937_64 rng(11);
  const BodyParams init = fixtures::randomParams(model, 2, rng, 0.3);
  const MarkerSequence mk =
      fixtures::markersNear(posedVertexTracks(model, fixtures::randomParams(model, 2, rng, 0.3)), 6, rng);
  const KinematicChain chain{{1, 3}};
  LocalizationConfig cfg;
  cfg.optim.maxIters = 20;
  const ChainFit fit = fitChain(mk, chain, model, init, init.beta, cfg);
  for (int t = 0; t < 2; ++t) {
    for (int b = 0; b < model.numBones(); ++b) {
      if (b != 1 && b != 3) {
        EXPECT_EQ(fit.params.rotation(t, b), init.rotation(t, b)) << "bone " << b;
      }
    }
  }
  EXPECT_LE(fit.summary.energy, 10.0 * fit.summary.chamferTerm + 0.1 * fit.summary.shapeTerm + 1e-12);
}
