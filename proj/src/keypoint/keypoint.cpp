#include "puppetcast/keypoint/keypoint.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace puppetcast::keypoint {

const std::array<std::string_view, kPoseKeypointCount>& pose_keypoint_names() {
    static constexpr std::array<std::string_view, kPoseKeypointCount> names = {
        "nose",         "leftEye",       "rightEye",  "leftEar",    "rightEar",  "leftShoulder",
        "rightShoulder", "leftElbow",    "rightElbow", "leftWrist", "rightWrist", "leftHip",
        "rightHip",     "leftKnee",      "rightKnee", "leftAnkle",  "rightAnkle",
    };
    return names;
}

namespace {

struct FaceGroup {
    std::string_view prefix;
    std::size_t count;
};

// 17 + 5 + 5 + 4 + 5 + 6 + 6 + 12 + 8 + 5 x 1 = 73
constexpr std::array<FaceGroup, 14> kFaceGroups = {{
    {"contour", 17},
    {"leftBrow", 5},
    {"rightBrow", 5},
    {"noseBridge", 4},
    {"noseBase", 5},
    {"leftEye", 6},
    {"rightEye", 6},
    {"outerLip", 12},
    {"innerLip", 8},
    {"leftPupil", 1},
    {"rightPupil", 1},
    {"foreheadCenter", 1},
    {"leftCheek", 1},
    {"rightCheek", 1},
}};

std::array<std::string, kFacePointCount> build_face_names() {
    std::array<std::string, kFacePointCount> out;
    std::size_t i = 0;
    for (const auto& g : kFaceGroups) {
        for (std::size_t k = 0; k < g.count; ++k) {
            out.at(i++) = g.count == 1 ? std::string(g.prefix)
                                       : std::string(g.prefix) + std::to_string(k);
        }
    }
    return out;
}

}  // namespace

const std::array<std::string_view, kFacePointCount>& face_point_names() {
    static const std::array<std::string, kFacePointCount> storage = build_face_names();
    static const auto views = [] {
        std::array<std::string_view, kFacePointCount> v;
        std::transform(storage.begin(), storage.end(), v.begin(),
                       [](const std::string& s) { return std::string_view(s); });
        return v;
    }();
    return views;
}

std::optional<std::size_t> pose_index_of(std::string_view name) {
    const auto& names = pose_keypoint_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names.begin());
}

std::optional<std::size_t> face_index_of(std::string_view name) {
    const auto& names = face_point_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names.begin());
}

}  // namespace puppetcast::keypoint
