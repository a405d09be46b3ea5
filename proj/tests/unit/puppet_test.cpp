#include "puppetcast/rig/puppet.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include "golden_vectors.hpp"

namespace puppetcast::rig {
namespace {

using puppetcast::testing::fixture_path;

nlohmann::json stick_json() {
    std::ifstream in(fixture_path("puppets/stick_figure.json"));
    return nlohmann::json::parse(in);
}

TEST(LoadPuppet, StickFigureHasTwoBones) {
    auto spec = load_puppet_file(fixture_path("puppets/stick_figure.json"));
    ASSERT_TRUE(spec) << spec.error().message;
    EXPECT_EQ(spec->bones.size(), 2u);
    EXPECT_EQ(spec->bones[0].name, "upper_arm");
    EXPECT_EQ(spec->bones[0].a, *keypoint::pose_index_of("leftShoulder"));
    EXPECT_TRUE(spec->bind_keypoints.pose);
    EXPECT_FALSE(spec->bind_keypoints.face);
}

TEST(LoadPuppet, ShippedFixturesLoad) {
    for (const char* name : {"mannequin", "face_mask"}) {
        auto spec = load_puppet_file(fixture_path(std::string("puppets/") + name + ".json"));
        ASSERT_TRUE(spec) << name << ": " << spec.error().where << " " << spec.error().message;
    }
    auto face = load_puppet_file(fixture_path("puppets/face_mask.json"));
    EXPECT_EQ(face->bones[0].source, keypoint::KeypointSource::Face);
}

TEST(LoadPuppet, UnknownKeypointIsNamed) {
    auto j = stick_json();
    j["bones"][1]["b"] = "leftToe";
    auto spec = load_puppet(j.dump());
    ASSERT_FALSE(spec);
    EXPECT_EQ(spec.error().kind, PuppetErrorKind::UnknownKeypoint);
    EXPECT_EQ(spec.error().where, "bones[1].b");
    EXPECT_NE(spec.error().message.find("leftToe"), std::string::npos);
}

TEST(LoadPuppet, ZeroLengthBindBone) {
    auto j = stick_json();
    j["bind_keypoints"]["pose"]["leftElbow"] = j["bind_keypoints"]["pose"]["leftShoulder"];
    auto spec = load_puppet(j.dump());
    ASSERT_FALSE(spec);
    EXPECT_EQ(spec.error().kind, PuppetErrorKind::ZeroLengthBone);
    EXPECT_EQ(spec.error().where, "bones[0]");
}

TEST(LoadPuppet, DanglingVertexIndex) {
    auto j = stick_json();
    j["paths"][0]["points"].push_back(999);
    auto spec = load_puppet(j.dump());
    ASSERT_FALSE(spec);
    EXPECT_EQ(spec.error().kind, PuppetErrorKind::DanglingVertex);
    EXPECT_EQ(spec.error().where, "paths[0].points[3]");
}

TEST(LoadPuppet, OtherNamedErrors) {
    EXPECT_EQ(load_puppet("{").error().kind, PuppetErrorKind::Syntax);
    EXPECT_EQ(load_puppet("[]").error().kind, PuppetErrorKind::Schema);
    auto j = stick_json();
    j.erase("bones");
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::Schema);

    j = stick_json();
    j["bones"] = nlohmann::json::array();
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::NoBones);

    j = stick_json();
    j["bones"][0]["source"] = "hand";
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::UnknownSource);

    j = stick_json();
    j["bind_keypoints"]["pose"].erase("nose");
    auto missing = load_puppet(j.dump());
    EXPECT_EQ(missing.error().kind, PuppetErrorKind::MissingKeypoint);
    EXPECT_NE(missing.error().message.find("nose"), std::string::npos);

    j = stick_json();
    j["bind_keypoints"]["pose"]["leftToe"] = {1, 2};
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::UnknownKeypoint);

    j = stick_json();
    j["bones"][0]["source"] = "face";
    j["bones"][0]["a"] = "contour0";
    j["bones"][0]["b"] = "contour1";
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::MissingKeypoint);

    j = stick_json();
    j["vertices"][0] = {1};
    EXPECT_EQ(load_puppet(j.dump()).error().kind, PuppetErrorKind::Schema);
}

TEST(LoadPuppet, JsonRoundTrip) {
    auto spec = load_puppet_file(fixture_path("puppets/face_mask.json"));
    ASSERT_TRUE(spec);
    auto again = load_puppet(puppet_to_json(*spec));
    ASSERT_TRUE(again) << again.error().message;
    EXPECT_EQ(*again, *spec);
}

}  // namespace
}  // namespace puppetcast::rig
