#include "puppetcast/keypoint/synth.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

namespace puppetcast::keypoint {

namespace {

std::string check_joint(const JointMotion& j, const std::string& where) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(j.center_x) || !finite(j.center_y) || !finite(j.amp_x) || !finite(j.amp_y) ||
        !finite(j.phase_x) || !finite(j.phase_y)) {
        return where + ": non-finite parameter";
    }
    if (j.period_ms == 0) {
        return where + ": period_ms must be positive";
    }
    auto inside = [](double c, double a) {
        const double m = std::abs(a);
        return c - m >= 0.0 && c + m <= 1.0;
    };
    if (!inside(j.center_x, j.amp_x)) {
        return where + ": x motion leaves [0,1]";
    }
    if (!inside(j.center_y, j.amp_y)) {
        return where + ": y motion leaves [0,1]";
    }
    return {};
}

Point2 evaluate(const JointMotion& j, std::uint64_t t_ms) {
    const double frac =
        static_cast<double>(t_ms % j.period_ms) / static_cast<double>(j.period_ms);
    const double angle = 2.0 * std::numbers::pi * frac;
    return {j.center_x + j.amp_x * std::sin(angle + j.phase_x),
            j.center_y + j.amp_y * std::sin(angle + j.phase_y)};
}

}  // namespace

Expected<SynthMotion, std::string> SynthMotion::create(SynthParams params) {
    if (!params.pose && !params.face) {
        return unexpected(std::string("synthetic motion needs a pose or face block"));
    }
    if (params.pose) {
        for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
            if (auto err = check_joint((*params.pose)[i],
                                       "pose." + std::string(pose_keypoint_names()[i]));
                !err.empty()) {
                return unexpected(err);
            }
        }
    }
    if (params.face) {
        for (std::size_t i = 0; i < kFacePointCount; ++i) {
            if (auto err = check_joint((*params.face)[i],
                                       "face." + std::string(face_point_names()[i]));
                !err.empty()) {
                return unexpected(err);
            }
        }
    }
    return SynthMotion(std::move(params));
}

KeypointFrame SynthMotion::frame_at(std::uint64_t t_ms) const {
    KeypointFrame f;
    if (params_.pose) {
        PoseFrame pose;
        for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
            const Point2 p = evaluate((*params_.pose)[i], t_ms);
            pose.keypoints[i] = {p.x, p.y, 1.0};
        }
        pose.score = 1.0;
        f.pose = pose;
    }
    if (params_.face) {
        FaceFrame face;
        for (std::size_t i = 0; i < kFacePointCount; ++i) {
            face.points[i] = evaluate((*params_.face)[i], t_ms);
        }
        face.score = 1.0;
        f.face = face;
    }
    return f;
}

Expected<SynthOptions, std::string> parse_synth_options(std::string_view text) {
    SynthOptions opts;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            return unexpected("synth option '" + std::string(item) + "' is not key=value");
        }
        const std::string key(item.substr(0, eq));
        const std::string value(item.substr(eq + 1));
        try {
            std::size_t used = 0;
            if (key == "amp") {
                opts.amplitude = std::stod(value, &used);
            } else if (key == "period") {
                const long v = std::stol(value, &used);
                if (v <= 0) {
                    return unexpected(std::string("synth period must be positive"));
                }
                opts.period_ms = static_cast<std::uint32_t>(v);
            } else if (key == "phase") {
                opts.phase = std::stod(value, &used);
            } else if (key == "pose" || key == "face") {
                const bool on = value == "1" || value == "true";
                if (!on && value != "0" && value != "false") {
                    return unexpected("synth option " + key + " expects 0/1");
                }
                (key == "pose" ? opts.pose : opts.face) = on;
                used = value.size();
            } else {
                return unexpected("unknown synth option '" + key + "'");
            }
            if (used != value.size()) {
                return unexpected("bad value for synth option " + key + ": " + value);
            }
        } catch (const std::exception&) {
            return unexpected("bad value for synth option " + key + ": " + value);
        }
    }
    return opts;
}

const std::array<Point2, kPoseKeypointCount>& rest_pose_layout() {
    // Standing figure facing the camera; subject's left is image right.
    static constexpr std::array<Point2, kPoseKeypointCount> layout = {{
        {0.500, 0.180},  // nose
        {0.520, 0.160},  // leftEye
        {0.480, 0.160},  // rightEye
        {0.545, 0.170},  // leftEar
        {0.455, 0.170},  // rightEar
        {0.590, 0.300},  // leftShoulder
        {0.410, 0.300},  // rightShoulder
        {0.640, 0.440},  // leftElbow
        {0.360, 0.440},  // rightElbow
        {0.660, 0.570},  // leftWrist
        {0.340, 0.570},  // rightWrist
        {0.560, 0.580},  // leftHip
        {0.440, 0.580},  // rightHip
        {0.570, 0.730},  // leftKnee
        {0.430, 0.730},  // rightKnee
        {0.575, 0.880},  // leftAnkle
        {0.425, 0.880},  // rightAnkle
    }};
    return layout;
}

namespace {

std::array<Point2, kFacePointCount> build_face_layout() {
    std::array<Point2, kFacePointCount> out{};
    constexpr double cx = 0.5;
    constexpr double cy = 0.175;
    constexpr double rx = 0.045;
    constexpr double ry = 0.06;
    std::size_t i = 0;
    auto ellipse = [&](double ccx, double ccy, double erx, double ery, double a0, double a1,
                       std::size_t n, bool closed) {
        for (std::size_t k = 0; k < n; ++k) {
            const double t = closed ? static_cast<double>(k) / static_cast<double>(n)
                                    : static_cast<double>(k) / static_cast<double>(n - 1);
            const double a = a0 + (a1 - a0) * t;
            out[i++] = {ccx + erx * std::cos(a), ccy + ery * std::sin(a)};
        }
    };
    const double pi = std::numbers::pi;
    ellipse(cx, cy, rx, ry, pi * 0.05, pi * 0.95, 17, false);                     // contour (jaw)
    ellipse(cx + 0.018, cy - 0.028, 0.012, 0.006, pi * 1.1, pi * 1.9, 5, false);  // leftBrow
    ellipse(cx - 0.018, cy - 0.028, 0.012, 0.006, pi * 1.1, pi * 1.9, 5, false);  // rightBrow
    for (std::size_t k = 0; k < 4; ++k) {                                         // noseBridge
        out[i++] = {cx, cy - 0.015 + 0.007 * static_cast<double>(k)};
    }
    ellipse(cx, cy + 0.010, 0.008, 0.004, pi * 0.1, pi * 0.9, 5, false);      // noseBase
    ellipse(cx + 0.018, cy - 0.014, 0.008, 0.004, 0.0, 2.0 * pi, 6, true);   // leftEye
    ellipse(cx - 0.018, cy - 0.014, 0.008, 0.004, 0.0, 2.0 * pi, 6, true);   // rightEye
    ellipse(cx, cy + 0.030, 0.018, 0.008, 0.0, 2.0 * pi, 12, true);          // outerLip
    ellipse(cx, cy + 0.030, 0.012, 0.004, 0.0, 2.0 * pi, 8, true);           // innerLip
    out[i++] = {cx + 0.018, cy - 0.014};                                      // leftPupil
    out[i++] = {cx - 0.018, cy - 0.014};                                      // rightPupil
    out[i++] = {cx, cy - 0.050};                                              // foreheadCenter
    out[i++] = {cx + 0.032, cy + 0.010};                                      // leftCheek
    out[i++] = {cx - 0.032, cy + 0.010};                                      // rightCheek
    return out;
}

}  // namespace

const std::array<Point2, kFacePointCount>& rest_face_layout() {
    static const auto layout = build_face_layout();
    return layout;
}

SynthParams default_motion_params(const SynthOptions& options) {
    SynthParams params;
    const double a = options.amplitude;
    const double pi = std::numbers::pi;
    if (options.pose) {
        std::array<JointMotion, kPoseKeypointCount> pose{};
        const auto& rest = rest_pose_layout();
        for (std::size_t i = 0; i < kPoseKeypointCount; ++i) {
            JointMotion& j = pose[i];
            j.center_x = rest[i].x;
            j.center_y = rest[i].y;
            j.period_ms = options.period_ms;
            j.phase_x = options.phase;
            j.phase_y = options.phase + pi / 2.0;
            // Whole body sways gently; arms wave.
            double gain = 0.25;
            switch (static_cast<PoseKeypoint>(i)) {
                case PoseKeypoint::LeftElbow:
                case PoseKeypoint::RightElbow:
                    gain = 1.0;
                    break;
                case PoseKeypoint::LeftWrist:
                case PoseKeypoint::RightWrist:
                    gain = 2.0;
                    break;
                default:
                    break;
            }
            j.amp_x = a * gain;
            j.amp_y = a * gain * 0.5;
            if (i % 2 == 0 && i >= static_cast<std::size_t>(PoseKeypoint::LeftShoulder)) {
                // right side mirrors the left
                j.phase_x += pi;
            }
        }
        params.pose = pose;
    }
    if (options.face) {
        std::array<JointMotion, kFacePointCount> face{};
        const auto& rest = rest_face_layout();
        const auto lips_begin = *face_index_of("outerLip0");
        const auto lips_end = *face_index_of("innerLip7") + 1;
        for (std::size_t i = 0; i < kFacePointCount; ++i) {
            JointMotion& j = face[i];
            j.center_x = rest[i].x;
            j.center_y = rest[i].y;
            j.period_ms = options.period_ms;
            j.amp_x = a * 0.25;
            j.phase_x = options.phase;
            j.phase_y = options.phase + pi / 2.0;
            j.amp_y = (i >= lips_begin && i < lips_end) ? a * 0.2 : a * 0.125;
        }
        params.face = face;
    }
    return params;
}

}  // namespace puppetcast::keypoint
