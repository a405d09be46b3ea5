#include "puppetcast/keypoint/stabilizer.hpp"

#include <string>

namespace puppetcast::keypoint {

Stabilizer::Stabilizer(StabilizerConfig config) : config_(config) {
    if (!(config_.alpha > 0.0 && config_.alpha <= 1.0)) {
        throw std::invalid_argument("stabilizer alpha must be in (0,1], got " +
                                    std::to_string(config_.alpha));
    }
    if (!(config_.conf_threshold >= 0.0 && config_.conf_threshold <= 1.0)) {
        throw std::invalid_argument("stabilizer conf_threshold must be in [0,1]");
    }
}

void Stabilizer::reset() noexcept {
    last_confident_.reset();
    pose_ema_.reset();
    face_ema_.reset();
}

namespace {

double blend(double alpha, double in, double prev) {
    // Exact at the fixed point and for alpha == 1.
    if (alpha == 1.0 || in == prev) {
        return in;
    }
    return alpha * in + (1.0 - alpha) * prev;
}

}  // namespace

KeypointFrame Stabilizer::stabilize(const KeypointFrame& frame) {
    KeypointFrame out = frame;
    const double a = config_.alpha;

    if (frame.pose) {
        const auto& in = frame.pose->keypoints;
        auto& res = out.pose->keypoints;
        if (!pose_ema_) {
            std::array<Point2, kPoseKeypointCount> seed{};
            for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
                seed[i] = {in[i].x, in[i].y};
            }
            pose_ema_ = seed;
            last_confident_ = seed;
        } else {
            for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
                Point2 target{in[i].x, in[i].y};
                if (in[i].confidence >= config_.conf_threshold) {
                    (*last_confident_)[i] = target;
                } else {
                    target = (*last_confident_)[i];
                }
                auto& ema = (*pose_ema_)[i];
                ema.x = blend(a, target.x, ema.x);
                ema.y = blend(a, target.y, ema.y);
            }
        }
        for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
            res[i].x = (*pose_ema_)[i].x;
            res[i].y = (*pose_ema_)[i].y;
        }
    }

    if (frame.face) {
        const auto& in = frame.face->points;
        if (!face_ema_) {
            face_ema_ = in;
        } else {
            for (std::size_t i = 0; i < kFacePointCount; ++i) {
                auto& ema = (*face_ema_)[i];
                ema.x = blend(a, in[i].x, ema.x);
                ema.y = blend(a, in[i].y, ema.y);
            }
        }
        out.face->points = *face_ema_;
    }
    return out;
}

}  // namespace puppetcast::keypoint
