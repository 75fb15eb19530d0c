#pragma once

#include <string>
#include <vector>

#include "mocap/body_model.h"

namespace mocap {

/// SMPL bone vocabulary, index order matches the kinematic tree below.
const std::vector<std::string>& smplBoneNames();
const std::vector<int>& smplParents();

/// Part name -> bone names (left/right arm, leg and shoulder).
std::map<std::string, std::vector<std::string>> defaultPartTable();

/// Procedural low-poly humanoid: one tube per bone, blended skinning weights
/// near joints, and ten linear shape directions (scale, limb lengths, girths).
/// Y is up, the body faces +Z, and its left side is +X.
BodyModel buildDefaultBodyModel();

/// Mirror partner of a bone (left <-> right); returns the bone itself for central bones.
int mirrorBone(const BodyModel& model, int bone);

} // namespace mocap
