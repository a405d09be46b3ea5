#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::keypoint {

/// Unchecked input shape, as produced by extractors or parsed from external data.
struct RawPose {
    std::vector<Keypoint2D> keypoints;
    double score = 0.0;
};

struct RawFace {
    std::vector<Point2> points;
    double score = 0.0;
};

struct RawKeypointFrame {
    std::uint16_t seq = 0;
    std::uint32_t capture_ts_ms = 0;
    std::optional<RawPose> pose;
    std::optional<RawFace> face;
};

enum class ValidationErrorKind {
    PoseCardinality,
    FaceCardinality,
    NoBlocks,
    NonFinite,
};

struct ValidationError {
    ValidationErrorKind kind;
    std::string field;  // e.g. "pose.keypoints", "face.points[12].x"
    std::string message;
};

struct ValidatedFrame {
    KeypointFrame frame;
    bool clamped = false;
    std::vector<std::string> clamped_fields;
};

Expected<ValidatedFrame, ValidationError> validate_frame(const RawKeypointFrame& raw);

/// Re-validates an already shaped frame (clamps ranges, checks finiteness and block presence).
/// Idempotent: validate(validate(f)) == validate(f).
Expected<ValidatedFrame, ValidationError> validate_frame(const KeypointFrame& frame);

}  // namespace puppetcast::keypoint
