#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::testing {

inline std::string fixture_path(const std::string& rel) {
    return std::string(PUPPETCAST_FIXTURE_DIR) + "/" + rel;
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json golden_manifest() {
    std::ifstream in(fixture_path("golden/vectors.json"));
    return nlohmann::json::parse(in);
}

inline nlohmann::json golden_vector(const std::string& name) {
    const auto manifest = golden_manifest();
    for (const auto& v : manifest["vectors"]) {
        if (v["name"] == name) {
            return v;
        }
    }
    return {};
}

inline keypoint::PoseFrame pose_from_json(const nlohmann::json& j) {
    keypoint::PoseFrame p;
    for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
        const auto& kp = j["keypoints"][i];
        p.keypoints[i] = {kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
    }
    p.score = j["score"].get<double>();
    return p;
}

inline keypoint::FaceFrame face_from_json(const nlohmann::json& j) {
    keypoint::FaceFrame f;
    for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
        f.points[i] = {j["points"][i][0].get<double>(), j["points"][i][1].get<double>()};
    }
    f.score = j["score"].get<double>();
    return f;
}

inline keypoint::KeypointFrame frame_from_json(const nlohmann::json& j) {
    keypoint::KeypointFrame f;
    f.seq = j["seq"].get<std::uint16_t>();
    f.capture_ts_ms = j["capture_ts_ms"].get<std::uint32_t>();
    if (j.contains("pose")) {
        f.pose = pose_from_json(j["pose"]);
    }
    if (j.contains("face")) {
        f.face = face_from_json(j["face"]);
    }
    return f;
}

}  // namespace puppetcast::testing
