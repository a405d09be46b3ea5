#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::rig {

/// Point in artwork units.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct PathStyle {
    std::string stroke = "#000000";
    std::string fill = "none";
    double width = 1.0;

    friend bool operator==(const PathStyle&, const PathStyle&) = default;
};

/// Polyline (or polygon when closed) through vertex indices.
struct PuppetPath {
    std::vector<std::size_t> points;
    bool closed = false;
    PathStyle style;

    friend bool operator==(const PuppetPath&, const PuppetPath&) = default;
};

struct Bone {
    std::string name;
    keypoint::KeypointSource source = keypoint::KeypointSource::Pose;
    std::size_t a = 0;  // keypoint index within the source's table
    std::size_t b = 0;

    friend bool operator==(const Bone&, const Bone&) = default;
};

/// Keypoint positions of the drawn pose, in artwork units.
struct BindKeypoints {
    std::optional<std::array<Vec2, keypoint::kPoseKeypointCount>> pose;
    std::optional<std::array<Vec2, keypoint::kFacePointCount>> face;

    friend bool operator==(const BindKeypoints&, const BindKeypoints&) = default;
};

struct PuppetSpec {
    std::string name;
    std::vector<Vec2> vertices;
    std::vector<PuppetPath> paths;
    std::vector<Bone> bones;
    BindKeypoints bind_keypoints;

    friend bool operator==(const PuppetSpec&, const PuppetSpec&) = default;
};

enum class PuppetErrorKind {
    Syntax,
    Schema,
    UnknownKeypoint,
    MissingKeypoint,
    UnknownSource,
    ZeroLengthBone,
    DanglingVertex,
    NoBones,
};

struct PuppetError {
    PuppetErrorKind kind;
    std::string where;  // JSON path of the offending item, e.g. "bones[1].b"
    std::string message;
};

std::string_view to_string(PuppetErrorKind kind) noexcept;

/// Parses and validates a puppet document (JSON; see docs/FORMATS.md).
Expected<PuppetSpec, PuppetError> load_puppet(std::string_view document);
Expected<PuppetSpec, PuppetError> load_puppet_file(const std::filesystem::path& path);

/// Structural checks shared by the loader and programmatically built specs.
Expected<PuppetSpec, PuppetError> validate_puppet(PuppetSpec spec);

std::string puppet_to_json(const PuppetSpec& spec);

/// Bind-pose endpoints of a bone.
std::pair<Vec2, Vec2> bind_segment(const PuppetSpec& spec, const Bone& bone);

}  // namespace puppetcast::rig
