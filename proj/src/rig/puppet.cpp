#include "puppetcast/rig/puppet.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace puppetcast::rig {

using nlohmann::json;
using keypoint::KeypointSource;

namespace {

PuppetError error(PuppetErrorKind kind, std::string where, std::string message) {
    return PuppetError{kind, std::move(where), std::move(message)};
}

std::string_view source_name(KeypointSource s) { return s == KeypointSource::Pose ? "pose" : "face"; }

std::optional<std::size_t> index_in(KeypointSource s, std::string_view name) {
    return s == KeypointSource::Pose ? keypoint::pose_index_of(name) : keypoint::face_index_of(name);
}

std::string_view name_in(KeypointSource s, std::size_t i) {
    return s == KeypointSource::Pose ? keypoint::pose_keypoint_names()[i] : keypoint::face_point_names()[i];
}

std::size_t count_in(KeypointSource s) {
    return s == KeypointSource::Pose ? keypoint::kPoseKeypointCount : keypoint::kFacePointCount;
}

Expected<Vec2, PuppetError> parse_point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        return unexpected(error(PuppetErrorKind::Schema, where, "expected [x, y]"));
    }
    Vec2 v{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
        return unexpected(error(PuppetErrorKind::Schema, where, "coordinates must be finite"));
    }
    return v;
}

template <std::size_t N>
Expected<std::array<Vec2, N>, PuppetError> parse_bind_block(const json& j, KeypointSource source,
                                                            const std::string& where) {
    if (!j.is_object()) {
        return unexpected(error(PuppetErrorKind::Schema, where, "expected an object of name: [x, y]"));
    }
    std::array<Vec2, N> out{};
    std::array<bool, N> seen{};
    for (const auto& [name, value] : j.items()) {
        const auto idx = index_in(source, name);
        if (!idx) {
            return unexpected(error(PuppetErrorKind::UnknownKeypoint, where + "." + name,
                                    "unknown " + std::string(source_name(source)) + " keypoint \"" + name + "\""));
        }
        auto p = parse_point(value, where + "." + name);
        if (!p) {
            return unexpected(p.error());
        }
        out[*idx] = *p;
        seen[*idx] = true;
    }
    for (std::size_t i = 0; i < N; ++i) {
        if (!seen[i]) {
            return unexpected(error(PuppetErrorKind::MissingKeypoint, where,
                                    "bind keypoint \"" + std::string(name_in(source, i)) + "\" missing"));
        }
    }
    return out;
}

Expected<PuppetSpec, PuppetError> parse(const json& doc) {
    if (!doc.is_object()) {
        return unexpected(error(PuppetErrorKind::Schema, "", "puppet document must be a JSON object"));
    }
    for (const char* key : {"vertices", "paths", "bones", "bind_keypoints"}) {
        if (!doc.contains(key)) {
            return unexpected(error(PuppetErrorKind::Schema, key, std::string("missing key \"") + key + "\""));
        }
    }
    PuppetSpec spec;
    if (auto it = doc.find("name"); it != doc.end() && it->is_string()) {
        spec.name = it->get<std::string>();
    }

    const json& verts = doc["vertices"];
    if (!verts.is_array()) {
        return unexpected(error(PuppetErrorKind::Schema, "vertices", "expected an array of [x, y]"));
    }
    for (std::size_t i = 0; i < verts.size(); ++i) {
        auto p = parse_point(verts[i], "vertices[" + std::to_string(i) + "]");
        if (!p) {
            return unexpected(p.error());
        }
        spec.vertices.push_back(*p);
    }

    const json& paths = doc["paths"];
    if (!paths.is_array()) {
        return unexpected(error(PuppetErrorKind::Schema, "paths", "expected an array"));
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const std::string where = "paths[" + std::to_string(i) + "]";
        const json& p = paths[i];
        if (!p.is_object() || !p.contains("points") || !p["points"].is_array()) {
            return unexpected(error(PuppetErrorKind::Schema, where, "expected {\"points\": [...]}"));
        }
        PuppetPath path;
        for (const auto& idx : p["points"]) {
            if (!idx.is_number_integer() || idx.get<long long>() < 0) {
                return unexpected(error(PuppetErrorKind::Schema, where + ".points", "indices must be non-negative integers"));
            }
            path.points.push_back(idx.get<std::size_t>());
        }
        path.closed = p.value("closed", false);
        path.style.stroke = p.value("stroke", path.style.stroke);
        path.style.fill = p.value("fill", path.style.fill);
        path.style.width = p.value("width", path.style.width);
        spec.paths.push_back(std::move(path));
    }

    const json& bones = doc["bones"];
    if (!bones.is_array()) {
        return unexpected(error(PuppetErrorKind::Schema, "bones", "expected an array"));
    }
    for (std::size_t i = 0; i < bones.size(); ++i) {
        const std::string where = "bones[" + std::to_string(i) + "]";
        const json& b = bones[i];
        if (!b.is_object() || !b.contains("a") || !b.contains("b") || !b["a"].is_string() || !b["b"].is_string()) {
            return unexpected(error(PuppetErrorKind::Schema, where, "expected {\"name\", \"a\", \"b\", \"source\"}"));
        }
        Bone bone;
        bone.name = b.value("name", "bone" + std::to_string(i));
        const std::string source = b.value("source", "pose");
        if (source == "pose") {
            bone.source = KeypointSource::Pose;
        } else if (source == "face") {
            bone.source = KeypointSource::Face;
        } else {
            return unexpected(error(PuppetErrorKind::UnknownSource, where + ".source",
                                    "source must be \"pose\" or \"face\", got \"" + source + "\""));
        }
        for (const char* end : {"a", "b"}) {
            const std::string name = b[end].get<std::string>();
            const auto idx = index_in(bone.source, name);
            if (!idx) {
                return unexpected(error(PuppetErrorKind::UnknownKeypoint, where + "." + end,
                                        "unknown " + source + " keypoint \"" + name + "\""));
            }
            (end[0] == 'a' ? bone.a : bone.b) = *idx;
        }
        spec.bones.push_back(std::move(bone));
    }

    const json& bind = doc["bind_keypoints"];
    if (!bind.is_object()) {
        return unexpected(error(PuppetErrorKind::Schema, "bind_keypoints", "expected {\"pose\": {...}, \"face\": {...}}"));
    }
    for (const auto& [key, value] : bind.items()) {
        if (key != "pose" && key != "face") {
            return unexpected(error(PuppetErrorKind::UnknownSource, "bind_keypoints." + key,
                                    "bind block must be \"pose\" or \"face\""));
        }
    }
    if (bind.contains("pose")) {
        auto block = parse_bind_block<keypoint::kPoseKeypointCount>(bind["pose"], KeypointSource::Pose,
                                                                    "bind_keypoints.pose");
        if (!block) {
            return unexpected(block.error());
        }
        spec.bind_keypoints.pose = *block;
    }
    if (bind.contains("face")) {
        auto block = parse_bind_block<keypoint::kFacePointCount>(bind["face"], KeypointSource::Face,
                                                                 "bind_keypoints.face");
        if (!block) {
            return unexpected(block.error());
        }
        spec.bind_keypoints.face = *block;
    }
    return spec;
}

}  // namespace

std::string_view to_string(PuppetErrorKind kind) noexcept {
    switch (kind) {
        case PuppetErrorKind::Syntax: return "syntax";
        case PuppetErrorKind::Schema: return "schema";
        case PuppetErrorKind::UnknownKeypoint: return "unknown-keypoint";
        case PuppetErrorKind::MissingKeypoint: return "missing-keypoint";
        case PuppetErrorKind::UnknownSource: return "unknown-source";
        case PuppetErrorKind::ZeroLengthBone: return "zero-length-bone";
        case PuppetErrorKind::DanglingVertex: return "dangling-vertex";
        case PuppetErrorKind::NoBones: return "no-bones";
    }
    return "unknown";
}

std::pair<Vec2, Vec2> bind_segment(const PuppetSpec& spec, const Bone& bone) {
    if (bone.source == KeypointSource::Pose) {
        const auto& p = *spec.bind_keypoints.pose;
        return {p[bone.a], p[bone.b]};
    }
    const auto& f = *spec.bind_keypoints.face;
    return {f[bone.a], f[bone.b]};
}

Expected<PuppetSpec, PuppetError> validate_puppet(PuppetSpec spec) {
    if (spec.bones.empty()) {
        return unexpected(error(PuppetErrorKind::NoBones, "bones", "a puppet needs at least one bone"));
    }
    for (std::size_t i = 0; i < spec.paths.size(); ++i) {
        for (std::size_t k = 0; k < spec.paths[i].points.size(); ++k) {
            if (spec.paths[i].points[k] >= spec.vertices.size()) {
                return unexpected(error(PuppetErrorKind::DanglingVertex,
                                        "paths[" + std::to_string(i) + "].points[" + std::to_string(k) + "]",
                                        "vertex index " + std::to_string(spec.paths[i].points[k]) + " out of range (" +
                                            std::to_string(spec.vertices.size()) + " vertices)"));
            }
        }
    }
    for (std::size_t i = 0; i < spec.bones.size(); ++i) {
        const Bone& bone = spec.bones[i];
        const std::string where = "bones[" + std::to_string(i) + "]";
        if (bone.a >= count_in(bone.source) || bone.b >= count_in(bone.source)) {
            return unexpected(error(PuppetErrorKind::UnknownKeypoint, where, "keypoint index out of range"));
        }
        const bool have_block = bone.source == KeypointSource::Pose ? spec.bind_keypoints.pose.has_value()
                                                                    : spec.bind_keypoints.face.has_value();
        if (!have_block) {
            return unexpected(error(PuppetErrorKind::MissingKeypoint, where,
                                    "bone uses " + std::string(source_name(bone.source)) +
                                        " keypoints but bind_keypoints has no " + std::string(source_name(bone.source)) +
                                        " block"));
        }
        const auto [a, b] = bind_segment(spec, bone);
        if (std::hypot(b.x - a.x, b.y - a.y) <= 0.0) {
            return unexpected(error(PuppetErrorKind::ZeroLengthBone, where,
                                    "bind bone \"" + bone.name + "\" has zero length (" +
                                        std::string(name_in(bone.source, bone.a)) + " == " +
                                        std::string(name_in(bone.source, bone.b)) + ")"));
        }
    }
    return spec;
}

Expected<PuppetSpec, PuppetError> load_puppet(std::string_view document) {
    const json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
        return unexpected(error(PuppetErrorKind::Syntax, "", "puppet document is not valid JSON"));
    }
    auto spec = parse(doc);
    if (!spec) {
        return spec;
    }
    return validate_puppet(std::move(*spec));
}

Expected<PuppetSpec, PuppetError> load_puppet_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return unexpected(error(PuppetErrorKind::Syntax, path.string(), "cannot open puppet file"));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_puppet(ss.str());
}

std::string puppet_to_json(const PuppetSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["vertices"] = json::array();
    for (const auto& v : spec.vertices) {
        j["vertices"].push_back({v.x, v.y});
    }
    j["paths"] = json::array();
    for (const auto& p : spec.paths) {
        nlohmann::ordered_json o;
        o["points"] = p.points;
        o["closed"] = p.closed;
        o["stroke"] = p.style.stroke;
        o["fill"] = p.style.fill;
        o["width"] = p.style.width;
        j["paths"].push_back(o);
    }
    j["bones"] = json::array();
    for (const auto& b : spec.bones) {
        nlohmann::ordered_json o;
        o["name"] = b.name;
        o["source"] = source_name(b.source);
        o["a"] = name_in(b.source, b.a);
        o["b"] = name_in(b.source, b.b);
        j["bones"].push_back(o);
    }
    nlohmann::ordered_json bind = nlohmann::ordered_json::object();
    if (spec.bind_keypoints.pose) {
        for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
            const auto& v = (*spec.bind_keypoints.pose)[i];
            bind["pose"][std::string(name_in(KeypointSource::Pose, i))] = {v.x, v.y};
        }
    }
    if (spec.bind_keypoints.face) {
        for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
            const auto& v = (*spec.bind_keypoints.face)[i];
            bind["face"][std::string(name_in(KeypointSource::Face, i))] = {v.x, v.y};
        }
    }
    j["bind_keypoints"] = bind;
    return j.dump(2);
}

}  // namespace puppetcast::rig
