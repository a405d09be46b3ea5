#include "puppetcast/keypoint/validate.hpp"

#include <algorithm>
#include <cmath>

namespace puppetcast::keypoint {

namespace {

class Clamper {
public:
    // Returns false when the value is not finite.
    bool apply(double& v, const std::string& field) {
        if (!std::isfinite(v)) {
            bad_field_ = field;
            return false;
        }
        if (v < 0.0 || v > 1.0) {
            v = std::clamp(v, 0.0, 1.0);
            fields_.push_back(field);
        }
        return true;
    }

    const std::string& bad_field() const { return bad_field_; }
    std::vector<std::string> take_fields() { return std::move(fields_); }

private:
    std::vector<std::string> fields_;
    std::string bad_field_;
};

std::string indexed(const char* base, std::size_t i, const char* member) {
    return std::string(base) + "[" + std::to_string(i) + "]." + member;
}

Expected<ValidatedFrame, ValidationError> check_shaped(KeypointFrame frame) {
    if (!frame.pose && !frame.face) {
        return unexpected(ValidationError{ValidationErrorKind::NoBlocks, "frame",
                                          "frame carries neither pose nor face"});
    }
    Clamper clamp;
    auto non_finite = [&clamp] {
        return unexpected(ValidationError{ValidationErrorKind::NonFinite, clamp.bad_field(),
                                          "non-finite value in " + clamp.bad_field()});
    };
    if (frame.pose) {
        auto& kps = frame.pose->keypoints;
        for (std::size_t i = 0; i < kps.size(); ++i) {
            if (!clamp.apply(kps[i].x, indexed("pose.keypoints", i, "x")) ||
                !clamp.apply(kps[i].y, indexed("pose.keypoints", i, "y")) ||
                !clamp.apply(kps[i].confidence, indexed("pose.keypoints", i, "confidence"))) {
                return non_finite();
            }
        }
        if (!clamp.apply(frame.pose->score, "pose.score")) {
            return non_finite();
        }
    }
    if (frame.face) {
        auto& pts = frame.face->points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!clamp.apply(pts[i].x, indexed("face.points", i, "x")) ||
                !clamp.apply(pts[i].y, indexed("face.points", i, "y"))) {
                return non_finite();
            }
        }
        if (!clamp.apply(frame.face->score, "face.score")) {
            return non_finite();
        }
    }
    ValidatedFrame out;
    out.frame = std::move(frame);
    out.clamped_fields = clamp.take_fields();
    out.clamped = !out.clamped_fields.empty();
    return out;
}

}  // namespace

Expected<ValidatedFrame, ValidationError> validate_frame(const RawKeypointFrame& raw) {
    KeypointFrame shaped;
    shaped.seq = raw.seq;
    shaped.capture_ts_ms = raw.capture_ts_ms;
    if (raw.pose) {
        if (raw.pose->keypoints.size() != kPoseKeypointCount) {
            return unexpected(ValidationError{
                ValidationErrorKind::PoseCardinality, "pose.keypoints",
                "pose.keypoints has " + std::to_string(raw.pose->keypoints.size()) +
                    " entries, expected 17"});
        }
        PoseFrame pose;
        std::copy(raw.pose->keypoints.begin(), raw.pose->keypoints.end(), pose.keypoints.begin());
        pose.score = raw.pose->score;
        shaped.pose = pose;
    }
    if (raw.face) {
        if (raw.face->points.size() != kFacePointCount) {
            return unexpected(ValidationError{
                ValidationErrorKind::FaceCardinality, "face.points",
                "face.points has " + std::to_string(raw.face->points.size()) +
                    " entries, expected 73"});
        }
        FaceFrame face;
        std::copy(raw.face->points.begin(), raw.face->points.end(), face.points.begin());
        face.score = raw.face->score;
        shaped.face = face;
    }
    return check_shaped(std::move(shaped));
}

Expected<ValidatedFrame, ValidationError> validate_frame(const KeypointFrame& frame) {
    return check_shaped(frame);
}

}  // namespace puppetcast::keypoint
