#include "puppetcast/rig/rig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace puppetcast::rig {

using keypoint::KeypointSource;

Viewport Viewport::cover(Vec2 min, Vec2 max, double aspect) {
    const double w = max.x - min.x;
    const double h = max.y - min.y;
    Viewport v;
    v.width = std::max(w, h * aspect);
    v.height = v.width / aspect;
    v.x = (min.x + max.x) / 2.0 - v.width / 2.0;
    v.y = (min.y + max.y) / 2.0 - v.height / 2.0;
    return v;
}

double segment_distance_sq(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const double abx = b.x - a.x;
    const double aby = b.y - a.y;
    const double len_sq = abx * abx + aby * aby;
    double t = 0.0;
    if (len_sq > 0.0) {
        t = std::clamp(((p.x - a.x) * abx + (p.y - a.y) * aby) / len_sq, 0.0, 1.0);
    }
    const double dx = p.x - (a.x + t * abx);
    const double dy = p.y - (a.y + t * aby);
    return dx * dx + dy * dy;
}

namespace {

struct Bounds {
    Vec2 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void add(Vec2 p) {
        min = {std::min(min.x, p.x), std::min(min.y, p.y)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y)};
    }
    bool empty() const { return min.x > max.x; }
};

template <typename Fn>
void for_each_bind_keypoint(const PuppetSpec& spec, Fn&& fn) {
    if (spec.bind_keypoints.pose) {
        for (const auto& p : *spec.bind_keypoints.pose) {
            fn(p);
        }
    }
    if (spec.bind_keypoints.face) {
        for (const auto& p : *spec.bind_keypoints.face) {
            fn(p);
        }
    }
}

}  // namespace

BoundPuppet bind(PuppetSpec spec, double camera_aspect) {
    auto checked = validate_puppet(std::move(spec));
    if (!checked) {
        throw std::invalid_argument("bind: " + checked.error().where + ": " + checked.error().message);
    }
    BoundPuppet out;
    out.spec = std::move(*checked);
    const PuppetSpec& s = out.spec;

    Bounds keys;
    for_each_bind_keypoint(s, [&](Vec2 p) { keys.add(p); });
    Bounds all = keys;
    for (const auto& v : s.vertices) {
        all.add(v);
    }
    out.bbox_diag = std::hypot(all.max.x - all.min.x, all.max.y - all.min.y);
    out.viewport = Viewport::cover(keys.min, keys.max, camera_aspect);

    for (const auto& bone : s.bones) {
        out.bind_segments.push_back(bind_segment(s, bone));
    }
    const double eps = 1e-6 * out.bbox_diag * out.bbox_diag;
    out.weights.reserve(s.vertices.size());
    std::vector<BoneWeight> raw(s.bones.size());
    for (const auto& v : s.vertices) {
        for (std::size_t b = 0; b < s.bones.size(); ++b) {
            const auto& [a, e] = out.bind_segments[b];
            raw[b] = {static_cast<std::uint32_t>(b), 1.0 / (segment_distance_sq(v, a, e) + eps)};
        }
        const std::size_t keep = std::min(kMaxInfluences, raw.size());
        std::partial_sort(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(keep), raw.end(),
                          [](const BoneWeight& x, const BoneWeight& y) {
                              return x.weight != y.weight ? x.weight > y.weight : x.bone < y.bone;
                          });
        std::vector<BoneWeight> w(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(keep));
        double sum = 0.0;
        for (const auto& bw : w) {
            sum += bw.weight;
        }
        for (auto& bw : w) {
            bw.weight /= sum;
        }
        out.weights.push_back(std::move(w));
    }
    return out;
}

Vec2 BoneTransform::apply(Vec2 p) const noexcept {
    const double c = scale * std::cos(theta);
    const double s = scale * std::sin(theta);
    return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
}

BoneTransform bone_transform(Vec2 bind_a, Vec2 bind_b, Vec2 cur_a, Vec2 cur_b) noexcept {
    const double bx = bind_b.x - bind_a.x;
    const double by = bind_b.y - bind_a.y;
    const double cx = cur_b.x - cur_a.x;
    const double cy = cur_b.y - cur_a.y;
    BoneTransform t;
    t.scale = std::hypot(cx, cy) / std::hypot(bx, by);
    if (!(t.scale >= kMinBoneScale)) {
        t.scale = kMinBoneScale;
        t.degenerate = true;
    }
    t.theta = std::atan2(cy, cx) - std::atan2(by, bx);
    const double c = t.scale * std::cos(t.theta);
    const double s = t.scale * std::sin(t.theta);
    t.tx = cur_a.x - (c * bind_a.x - s * bind_a.y);
    t.ty = cur_a.y - (s * bind_a.x + c * bind_a.y);
    return t;
}

GateState make_gate_state(const BoundPuppet& puppet, double threshold) {
    GateState g;
    g.threshold = threshold;
    if (puppet.spec.bind_keypoints.pose) {
        g.pose = *puppet.spec.bind_keypoints.pose;
    }
    if (puppet.spec.bind_keypoints.face) {
        g.face = *puppet.spec.bind_keypoints.face;
    }
    g.bones.assign(puppet.spec.bones.size(), BoneTransform::identity());
    return g;
}

FrameGeometry animate(const BoundPuppet& puppet, const keypoint::KeypointFrame& frame, GateState& gate) {
    const PuppetSpec& spec = puppet.spec;
    if (gate.bones.size() != spec.bones.size()) {
        gate.bones.assign(spec.bones.size(), BoneTransform::identity());
    }
    std::array<double, keypoint::kPoseKeypointCount> pose_conf{};
    if (frame.pose) {
        for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
            const auto& kp = frame.pose->keypoints[i];
            pose_conf[i] = kp.confidence;
            if (kp.confidence >= gate.threshold) {
                gate.pose[i] = puppet.viewport.to_artwork({kp.x, kp.y});
            }
        }
    }
    if (frame.face && frame.face->score >= gate.threshold) {
        for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
            gate.face[i] = puppet.viewport.to_artwork(frame.face->points[i]);
        }
    }

    FrameGeometry g;
    g.view = puppet.viewport;
    g.paths = spec.paths;
    g.bone_confidence.assign(spec.bones.size(), 0.0);
    g.bone_degenerate.assign(spec.bones.size(), false);
    for (std::size_t i = 0; i < spec.bones.size(); ++i) {
        const Bone& bone = spec.bones[i];
        const auto& [bind_a, bind_b] = puppet.bind_segments[i];
        if (bone.source == KeypointSource::Pose && frame.pose) {
            gate.bones[i] = bone_transform(bind_a, bind_b, gate.pose[bone.a], gate.pose[bone.b]);
            g.bone_confidence[i] = std::min(pose_conf[bone.a], pose_conf[bone.b]);
        } else if (bone.source == KeypointSource::Face && frame.face) {
            gate.bones[i] = bone_transform(bind_a, bind_b, gate.face[bone.a], gate.face[bone.b]);
            g.bone_confidence[i] = frame.face->score;
        }
        g.bone_degenerate[i] = gate.bones[i].degenerate;
    }

    // Precompute each bone's linear part once.
    struct Affine {
        double c, s, tx, ty;
    };
    std::vector<Affine> affine(spec.bones.size());
    for (std::size_t i = 0; i < spec.bones.size(); ++i) {
        const auto& t = gate.bones[i];
        affine[i] = {t.scale * std::cos(t.theta), t.scale * std::sin(t.theta), t.tx, t.ty};
    }
    g.vertices.resize(spec.vertices.size());
    for (std::size_t v = 0; v < spec.vertices.size(); ++v) {
        const Vec2 p = spec.vertices[v];
        Vec2 acc;
        for (const auto& bw : puppet.weights[v]) {
            const Affine& a = affine[bw.bone];
            acc.x += bw.weight * (a.c * p.x - a.s * p.y + a.tx);
            acc.y += bw.weight * (a.s * p.x + a.c * p.y + a.ty);
        }
        g.vertices[v] = acc;
    }
    return g;
}

FrameGeometry bind_geometry(const BoundPuppet& puppet) {
    FrameGeometry g;
    g.view = puppet.viewport;
    g.paths = puppet.spec.paths;
    g.vertices = puppet.spec.vertices;
    g.bone_confidence.assign(puppet.spec.bones.size(), 1.0);
    g.bone_degenerate.assign(puppet.spec.bones.size(), false);
    return g;
}

keypoint::KeypointFrame bind_frame(const BoundPuppet& puppet) {
    keypoint::KeypointFrame f;
    const auto& bk = puppet.spec.bind_keypoints;
    if (bk.pose) {
        keypoint::PoseFrame p;
        for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
            const auto n = puppet.viewport.to_normalized((*bk.pose)[i]);
            p.keypoints[i] = {n.x, n.y, 1.0};
        }
        p.score = 1.0;
        f.pose = p;
    }
    if (bk.face) {
        keypoint::FaceFrame face;
        for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
            face.points[i] = puppet.viewport.to_normalized((*bk.face)[i]);
        }
        face.score = 1.0;
        f.face = face;
    }
    return f;
}

}  // namespace puppetcast::rig
