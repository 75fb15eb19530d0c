#pragma once

#include <string>

#include "json.hpp"

#include "mocap/body_model.h"

namespace mocap {

inline constexpr const char* kModelFormatVersion = "1.0";

/// Self-describing JSON container; numeric arrays are base64 of little-endian
/// doubles / int32 so a write-read cycle is bit-exact.
nlohmann::json bodyModelToJson(const BodyModel& model);
BodyModel bodyModelFromJson(const nlohmann::json& j);

void saveBodyModel(const BodyModel& model, const std::string& path);
BodyModel loadBodyModel(const std::string& path);

/// Base64 helpers shared with other binary-carrying formats.
std::string encodeBase64(const void* data, size_t bytes);
std::string decodeBase64(const std::string& text);

/// Throws std::runtime_error if `version` has a different major number than `supported`.
void checkFormatVersion(const std::string& version, const std::string& supported, const std::string& what);

} // namespace mocap
