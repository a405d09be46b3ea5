#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::keypoint {

struct StabilizerConfig {
    double alpha = 0.5;           // weight of the new observation, in (0,1]
    double conf_threshold = 0.3;  // pose keypoints below this hold their last confident position
};

/// Confidence-gated exponential smoothing of keypoint positions.
///
/// Per coordinate: out = alpha * in + (1 - alpha) * prev_out. For pose keypoints whose
/// confidence is below the threshold, `in` is the keypoint's last confident position.
/// Each block (pose, face) is seeded by the first frame that carries it; a seed below the
/// threshold still seeds last_confident so the first frame renders.
class Stabilizer {
public:
    explicit Stabilizer(StabilizerConfig config = {});

    const StabilizerConfig& config() const noexcept { return config_; }

    KeypointFrame stabilize(const KeypointFrame& frame);

    // Discards seeds; the next frame re-seeds.
    void reset() noexcept;

    const std::optional<std::array<Point2, kPoseKeypointCount>>& last_confident() const noexcept {
        return last_confident_;
    }

private:
    StabilizerConfig config_;
    std::optional<std::array<Point2, kPoseKeypointCount>> last_confident_;
    std::optional<std::array<Point2, kPoseKeypointCount>> pose_ema_;
    std::optional<std::array<Point2, kFacePointCount>> face_ema_;
};

}  // namespace puppetcast::keypoint
