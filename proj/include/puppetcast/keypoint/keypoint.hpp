#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace puppetcast::keypoint {

inline constexpr std::size_t kPoseKeypointCount = 17;
inline constexpr std::size_t kFacePointCount = 73;

/// Normalized image-plane point: x in [0,1] of frame width, y in [0,1] of frame height.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Keypoint2D {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;

    friend bool operator==(const Keypoint2D&, const Keypoint2D&) = default;
};

/// Body pose in the frozen 17-point order (see pose_keypoint_names()).
struct PoseFrame {
    std::array<Keypoint2D, kPoseKeypointCount> keypoints{};
    double score = 0.0;  // cumulative confidence

    friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

/// Face mesh subset in the frozen 73-point order (see face_point_names()).
/// Only positions and one cumulative score are carried.
struct FaceFrame {
    std::array<Point2, kFacePointCount> points{};
    double score = 0.0;

    friend bool operator==(const FaceFrame&, const FaceFrame&) = default;
};

/// One capture instant. At least one of pose/face is present once validated.
struct KeypointFrame {
    std::uint16_t seq = 0;
    std::uint32_t capture_ts_ms = 0;
    std::optional<PoseFrame> pose;
    std::optional<FaceFrame> face;

    friend bool operator==(const KeypointFrame&, const KeypointFrame&) = default;
};

enum class PoseKeypoint : std::uint8_t {
    Nose = 0,
    LeftEye,
    RightEye,
    LeftEar,
    RightEar,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
};

enum class KeypointSource : std::uint8_t { Pose, Face };

// Normative index tables shared by the codec, the rig and external clients.
const std::array<std::string_view, kPoseKeypointCount>& pose_keypoint_names();
const std::array<std::string_view, kFacePointCount>& face_point_names();

std::optional<std::size_t> pose_index_of(std::string_view name);
std::optional<std::size_t> face_index_of(std::string_view name);

}  // namespace puppetcast::keypoint
