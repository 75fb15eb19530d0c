#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "mocap/model_builder.h"
#include "mocap/objectives.h"
#include "oracles.h"

using namespace mocap;

namespace {

std::vector<bool> randomMask(int T, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(0.7);
  std::vector<bool> mask(T);
  for (int t = 0; t < T; ++t) {
    mask[t] = keep(rng);
  }
  mask[0] = true;
  return mask;
}

} // namespace

TEST(ChamferTest, MatchesBruteForceOnRandomClouds) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 1 + trial % 4;
    const MarkerSequence mk = fixtures::randomMarkers(T, 3 + trial % 7, rng);
    const auto tracks = fixtures::randomTracks(T, 5 + trial % 40, rng);
    EXPECT_LE(fixtures::relativeError(chamferOneWay(mk, tracks), oracle::chamfer(mk, tracks)), 1e-12);
  }
}

TEST(ChamferTest, InvisibleMarkerIsIgnored) {
  std::mt19937_64 rng(3);
  MarkerSequence mk = fixtures::randomMarkers(2, 4, rng, 0.0);
  const auto tracks = fixtures::randomTracks(2, 10, rng);
  mk.visible(1, 2) = false;
  const double withHidden = chamferOneWay(mk, tracks);
  mk.positions[1](2, 0) = 1e6;
  EXPECT_EQ(chamferOneWay(mk, tracks), withHidden);
}

TEST(ChamferTest, ThrowsWithoutVisibleMarkers) {
  std::mt19937_64 rng(4);
  MarkerSequence mk = fixtures::randomMarkers(2, 3, rng, 0.0);
  mk.visible.setConstant(false);
  EXPECT_THROW(chamferOneWay(mk, fixtures::randomTracks(2, 5, rng)), std::invalid_argument);
}

TEST(ShapeRegTest, KnownValuesAndOracle) {
  EXPECT_EQ(shapeReg(Eigen::VectorXd::Zero(10), Eigen::VectorXd::Zero(10)), 0.0);
  EXPECT_DOUBLE_EQ(shapeReg(Eigen::VectorXd::Ones(10), Eigen::VectorXd::Zero(10)), 1.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
    }
    EXPECT_LE(fixtures::relativeError(shapeReg(a, b), oracle::shapeReg(a, b)), 1e-12);
  }
  EXPECT_THROW(shapeReg(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(PoseRegTest, KnownValuesMaskAndOracle) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 69);
  EXPECT_EQ(poseReg(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(poseReg(Eigen::MatrixXd::Ones(4, 69), zero), 1.0);

  Eigen::MatrixXd big = zero;
  big.row(2).setConstant(100.0);
  EXPECT_EQ(poseReg(big, zero, {true, true, false, true}), 0.0);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 1 + trial % 6;
    Eigen::MatrixXd a(T, 69), b(T, 69);
    for (int i = 0; i < a.size(); ++i) {
      a.data()[i] = n(rng);
      b.data()[i] = n(rng);
    }
    const auto mask = randomMask(T, rng);
    EXPECT_LE(fixtures::relativeError(poseReg(a, b, mask), oracle::poseReg(a, b, mask)), 1e-12);
  }
  EXPECT_THROW(poseReg(Eigen::MatrixXd::Zero(2, 69), Eigen::MatrixXd::Zero(3, 69)), std::invalid_argument);
}

TEST(MarkerOffsetTest, KnownValues) {
  MarkerSequence mk;
  mk.positions = {Points(1, 3)};
  mk.positions[0] << 2 * 0.0095, 0.0, 0.0;
  mk.visible = VisibilityMask::Constant(1, 1, true);
  mk.markerIds = {"a"};
  std::vector<Points> tracks = {Points::Zero(1, 3)};
  EXPECT_NEAR(markerOffsetLoss(mk, {0}, tracks, 0.0095), 0.0095 * 0.0095, 1e-18);
  mk.positions[0] << 0.0, 0.0095, 0.0;
  EXPECT_NEAR(markerOffsetLoss(mk, {0}, tracks, 0.0095), 0.0, 1e-18);
  EXPECT_THROW(markerOffsetLoss(mk, {kUnassigned}, tracks, 0.0095), std::invalid_argument);
}

TEST(MarkerOffsetTest, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 1 + trial % 4, M = 2 + trial % 6, V = 4 + trial % 20;
    const MarkerSequence mk = fixtures::randomMarkers(T, M, rng);
    const auto tracks = fixtures::randomTracks(T, V, rng);
    std::uniform_int_distribution<int> pick(0, V - 1);
    Correspondence corr(M);
    for (int& c : corr) {
      c = pick(rng);
    }
    EXPECT_LE(fixtures::relativeError(markerOffsetLoss(mk, corr, tracks, 0.0095),
                                      oracle::markerOffset(mk, corr, tracks, 0.0095)),
              1e-12);
  }
}

TEST(CorrespondenceTest, MatchesExhaustiveAverage) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 6, M = 4, V = 10 + trial % 30;
    const auto tracks = fixtures::randomTracks(T, V, rng);
    const MarkerSequence mk = fixtures::markersNear(tracks, M, rng, 0.3, 0.1);
    const auto mask = trial % 2 == 0 ? std::vector<bool>{} : randomMask(T, rng);
    EXPECT_EQ(closestAverageVertex(mk, tracks, mask), oracle::correspondence(mk, tracks, mask));
  }
}

TEST(CorrespondenceTest, IdenticalVertexAndSingleFrameMasking) {
  std::mt19937_64 rng(9);
  const auto tracks = fixtures::randomTracks(6, 12, rng);
  MarkerSequence mk;
  for (const Points& f : tracks) {
    Points p(2, 3);
    p.row(0) = f.row(7);
    p.row(1) = f.row(3);
    mk.positions.push_back(p);
  }
  mk.visible = VisibilityMask::Constant(6, 2, true);
  mk.markerIds = {"a", "b"};
  // marker b visible only in frame 3; elsewhere it sits on vertex 5
  for (int t = 0; t < 6; ++t) {
    if (t != 3) {
      mk.visible(t, 1) = false;
      mk.positions[t].row(1) = tracks[t].row(5);
    }
  }
  EXPECT_EQ(closestAverageVertex(mk, tracks), (Correspondence{7, 3}));
  mk.visible.col(1).setConstant(false);
  EXPECT_EQ(closestAverageVertex(mk, tracks)[1], kUnassigned);
}

// ---- gradients -------------------------------------------------------------

class GradientTest : public ::testing::Test {
 protected:
  void SetUp() override {
    model_ = std::make_unique<BodyModel>(fixtures::toyModel(21));
  }

  EnergyInputs inputsFor(const BodyParams& params, std::mt19937_64& rng) {
    const auto tracks = posedVertexTracks(*model_, params);
    markers_ = fixtures::markersNear(tracks, 6, rng, 0.25, 0.03);
    std::uniform_int_distribution<int> pick(0, model_->numVertices() - 1);
    corr_.assign(6, 0);
    for (int& c : corr_) {
      c = pick(rng);
    }
    EnergyInputs in;
    in.model = model_.get();
    in.markers = &markers_;
    in.correspondence = &corr_;
    in.betaPrior = fixtures::randomParams(*model_, 1, rng).beta;
    in.thetaRef = fixtures::randomParams(*model_, params.numFrames(), rng).theta;
    in.poseMask = randomMask(params.numFrames(), rng);
    return in;
  }

  std::unique_ptr<BodyModel> model_;
  MarkerSequence markers_;
  Correspondence corr_;
};

TEST_F(GradientTest, EveryTermMatchesCentralDifferences) {
  std::mt19937_64 rng(22);
  const std::vector<EnergyWeights> terms = {
      {.chamfer = 1.0}, {.markerOffset = 1.0}, {.shape = 1.0}, {.pose = 1.0},
      {.chamfer = 10.0, .markerOffset = 1.0, .shape = 0.1, .pose = 1.0}};
  for (int point = 0; point < 10; ++point) {
    const BodyParams params = fixtures::randomParams(*model_, 3, rng);
    const EnergyInputs in = inputsFor(params, rng);
    const double yaw = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    for (const EnergyWeights& w : terms) {
      const auto check = fixtures::checkGradient(in, w, params, yaw);
      EXPECT_LE(check.relError, 1e-4) << "point " << point;
    }
  }
}

TEST_F(GradientTest, PartialChamferVertexSetAndOtherUpAxis) {
  std::mt19937_64 rng(23);
  const BodyParams params = fixtures::randomParams(*model_, 2, rng);
  EnergyInputs in = inputsFor(params, rng);
  const std::vector<int> bones{2, 4};
  in.chamferVertices = partVertices(*model_, bones);
  in.upAxis = Vec3::UnitZ();
  prepareChamferSearch(in);
  const auto check = fixtures::checkGradient(in, {.chamfer = 1.0, .markerOffset = 1.0}, params, 0.7);
  EXPECT_LE(check.relError, 1e-4);
}

TEST(GradientDefaultModelTest, SampledCoordinatesMatch) {
  const BodyModel model = buildDefaultBodyModel();
  std::mt19937_64 rng(24);
  const BodyParams params = fixtures::randomParams(model, 2, rng, 0.2);
  const auto tracks = posedVertexTracks(model, params);
  const MarkerSequence mk = fixtures::markersNear(tracks, 12, rng, 0.1, 0.01);
  std::uniform_int_distribution<int> pick(0, model.numVertices() - 1);
  Correspondence corr(12);
  for (int& c : corr) {
    c = pick(rng);
  }
  EnergyInputs in;
  in.model = &model;
  in.markers = &mk;
  in.correspondence = &corr;
  in.betaPrior = Eigen::VectorXd::Zero(model.numShapes());
  in.thetaRef = Eigen::MatrixXd::Zero(2, model.numPoseCoords());
  prepareChamferSearch(in);

  FreeMask mask = FreeMask::all(model.numBones());
  mask.yaw = true;
  const int n = ParamPacker(params, mask).size();
  std::vector<int> coords;
  std::uniform_int_distribution<int> pickCoord(0, n - 1);
  for (int i = 0; i < 40; ++i) {
    coords.push_back(pickCoord(rng));
  }
  const auto check = fixtures::checkGradient(
      in, {.chamfer = 10.0, .markerOffset = 1.0, .shape = 1.0, .pose = 1.0}, params, 0.3, 1e-5, coords);
  EXPECT_LE(check.relError, 1e-4);
}

TEST(EnergyTest, TermsMatchArrayLevelFunctions) {
  const BodyModel model = fixtures::toyModel(31);
  std::mt19937_64 rng(32);
  const BodyParams params = fixtures::randomParams(model, 3, rng);
  const auto tracks = posedVertexTracks(model, params);
  const MarkerSequence mk = fixtures::markersNear(tracks, 5, rng);
  Correspondence corr{1, 2, 3, 4, 5};
  EnergyInputs in;
  in.model = &model;
  in.markers = &mk;
  in.correspondence = &corr;
  in.betaPrior = Eigen::VectorXd::Ones(model.numShapes());
  in.thetaRef = Eigen::MatrixXd::Zero(3, model.numPoseCoords());
  const EnergyTerms e = evaluateEnergy(in, {.chamfer = 2.0, .markerOffset = 3.0, .shape = 4.0, .pose = 5.0}, params, 0.0);
  EXPECT_NEAR(e.chamfer, oracle::chamfer(mk, tracks), 1e-12);
  EXPECT_NEAR(e.markerOffset, oracle::markerOffset(mk, corr, tracks, 0.0095), 1e-12);
  EXPECT_NEAR(e.shape, oracle::shapeReg(params.beta, in.betaPrior), 1e-12);
  EXPECT_NEAR(e.pose, oracle::poseReg(params.theta, in.thetaRef, {}), 1e-12);
  EXPECT_NEAR(e.total, 2 * e.chamfer + 3 * e.markerOffset + 4 * e.shape + 5 * e.pose, 1e-12);
}

TEST(PackerTest, RoundTripAndFixedEntries) {
  const BodyModel model = fixtures::toyModel(41);
  std::mt19937_64 rng(42);
  const BodyParams params = fixtures::randomParams(model, 3, rng);
  FreeMask mask;
  mask.gamma = true;
  mask.rotations.assign(model.numBones(), 0);
  mask.rotations[2] = 1;
  const ParamPacker packer(params, mask);
  EXPECT_EQ(packer.size(), 3 * (3 + 3));
  Eigen::VectorXd x = packer.pack(params, 0.0);
  x.array() += 1.0;
  BodyParams out = params;
  double yaw = 0.5;
  packer.unpack(x, out, yaw);
  EXPECT_EQ(yaw, 0.5);
  EXPECT_EQ(out.beta, params.beta);
  EXPECT_EQ(out.phi, params.phi);
  EXPECT_TRUE(out.gamma.isApprox((params.gamma.array() + 1.0).matrix()));
  EXPECT_TRUE(out.rotation(1, 2).isApprox(params.rotation(1, 2) + Vec3::Ones()));
  EXPECT_EQ(out.rotation(1, 3), params.rotation(1, 3));
}
