#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::keypoint {

/// Sinusoidal motion of one point: center + amplitude * sin(2*pi*(t mod period)/period + phase).
struct JointMotion {
    double center_x = 0.5;
    double center_y = 0.5;
    double amp_x = 0.0;
    double amp_y = 0.0;
    std::uint32_t period_ms = 1000;
    double phase_x = 0.0;
    double phase_y = 0.0;
};

struct SynthParams {
    std::optional<std::array<JointMotion, kPoseKeypointCount>> pose;
    std::optional<std::array<JointMotion, kFacePointCount>> face;
};

/// Deterministic stand-in for a live keypoint extractor. All confidences are 1.0.
class SynthMotion {
public:
    static Expected<SynthMotion, std::string> create(SynthParams params);

    /// Pure function of (t_ms, params). seq and capture_ts_ms are left for the caller.
    KeypointFrame frame_at(std::uint64_t t_ms) const;

    const SynthParams& params() const noexcept { return params_; }

private:
    explicit SynthMotion(SynthParams params) : params_(std::move(params)) {}
    SynthParams params_;
};

/// Knobs for the built-in waving figure used by fixtures and the CLI `synth:` source.
struct SynthOptions {
    double amplitude = 0.04;       // base swing in normalized units; wrists/elbows swing 2x
    std::uint32_t period_ms = 2000;
    double phase = 0.0;
    bool pose = true;
    bool face = true;
};

/// Parses "amp=0.05,period=1500,phase=0.3,pose=1,face=0"; unknown keys and bad numbers are errors.
Expected<SynthOptions, std::string> parse_synth_options(std::string_view text);

SynthParams default_motion_params(const SynthOptions& options);

/// Rest layouts (normalized, 4:3 camera) that the default motion oscillates around.
const std::array<Point2, kPoseKeypointCount>& rest_pose_layout();
const std::array<Point2, kFacePointCount>& rest_face_layout();

}  // namespace puppetcast::keypoint
