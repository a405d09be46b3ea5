#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "puppetcast/keypoint/keypoint.hpp"
#include "puppetcast/rig/puppet.hpp"

namespace puppetcast::rig {

inline constexpr double kCameraAspect = 4.0 / 3.0;
inline constexpr std::size_t kMaxInfluences = 4;
inline constexpr double kDefaultConfidenceThreshold = 0.3;

/// Axis-aligned rectangle in artwork units onto which the normalized camera frame maps.
struct Viewport {
    double x = 0.0;
    double y = 0.0;
    double width = 1.0;
    double height = 1.0;

    Vec2 to_artwork(keypoint::Point2 p) const noexcept { return {x + p.x * width, y + p.y * height}; }
    keypoint::Point2 to_normalized(Vec2 v) const noexcept { return {(v.x - x) / width, (v.y - y) / height}; }

    /// Smallest rectangle of the camera aspect containing [min, max], centered on it.
    static Viewport cover(Vec2 min, Vec2 max, double aspect = kCameraAspect);
};

struct BoneWeight {
    std::uint32_t bone = 0;
    double weight = 0.0;
};

/// Immutable after bind; safe to share across threads.
struct BoundPuppet {
    PuppetSpec spec;
    std::vector<std::vector<BoneWeight>> weights;  // per vertex, <= 4 entries, sum 1
    std::vector<std::pair<Vec2, Vec2>> bind_segments;
    double bbox_diag = 0.0;
    Viewport viewport;
};

/// Inverse-square distance skin weights, top 4 bones per vertex.
BoundPuppet bind(PuppetSpec spec, double camera_aspect = kCameraAspect);

/// Squared distance from p to segment [a, b].
double segment_distance_sq(Vec2 p, Vec2 a, Vec2 b) noexcept;

/// Similarity transform p -> s R(theta) p + t.
struct BoneTransform {
    double theta = 0.0;
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
    bool degenerate = false;

    Vec2 apply(Vec2 p) const noexcept;

    static BoneTransform identity() noexcept { return {}; }
};

inline constexpr double kMinBoneScale = 1e-6;

/// Maps the bind segment onto the current one; bind_a lands exactly on cur_a.
BoneTransform bone_transform(Vec2 bind_a, Vec2 bind_b, Vec2 cur_a, Vec2 cur_b) noexcept;

/// Caller-owned per-stream state: last confident keypoint positions (artwork units) and
/// last bone transforms for blocks missing from a frame.
struct GateState {
    double threshold = kDefaultConfidenceThreshold;
    std::array<Vec2, keypoint::kPoseKeypointCount> pose{};
    std::array<Vec2, keypoint::kFacePointCount> face{};
    std::vector<BoneTransform> bones;
};

/// Seeds positions with the bind keypoints and every bone with the identity.
GateState make_gate_state(const BoundPuppet& puppet, double threshold = kDefaultConfidenceThreshold);

struct FrameGeometry {
    std::vector<Vec2> vertices;
    std::vector<PuppetPath> paths;
    std::vector<double> bone_confidence;
    std::vector<bool> bone_degenerate;
    Viewport view;
};

/// Linear blend skinning of the puppet to a normalized keypoint frame.
FrameGeometry animate(const BoundPuppet& puppet, const keypoint::KeypointFrame& frame, GateState& gate);

/// Geometry of the artwork as drawn.
FrameGeometry bind_geometry(const BoundPuppet& puppet);

/// The bind keypoints expressed as a normalized frame with full confidence.
keypoint::KeypointFrame bind_frame(const BoundPuppet& puppet);

}  // namespace puppetcast::rig
