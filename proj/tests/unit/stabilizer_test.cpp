#include "puppetcast/keypoint/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace puppetcast::keypoint {
namespace {

KeypointFrame uniform_pose(double x, double y, double conf) {
    KeypointFrame f;
    PoseFrame p;
    for (auto& kp : p.keypoints) {
        kp = {x, y, conf};
    }
    p.score = conf;
    f.pose = p;
    return f;
}

TEST(Stabilizer, RejectsBadConfig) {
    EXPECT_THROW(Stabilizer({0.0, 0.3}), std::invalid_argument);
    EXPECT_THROW(Stabilizer({1.5, 0.3}), std::invalid_argument);
    EXPECT_THROW(Stabilizer({0.5, -0.1}), std::invalid_argument);
}

TEST(Stabilizer, FirstFrameSeedsOutput) {
    Stabilizer s;
    auto out = s.stabilize(uniform_pose(0.3, 0.6, 1.0));
    EXPECT_EQ(out.pose->keypoints[0].x, 0.3);
    EXPECT_EQ(out.pose->keypoints[0].y, 0.6);
}

TEST(Stabilizer, EmaRecurrenceHalfAlpha) {
    // seed 0.0, then input 1.0 with alpha 0.5 -> 0.5
    Stabilizer s({0.5, 0.3});
    EXPECT_EQ(s.stabilize(uniform_pose(0.0, 0.0, 1.0)).pose->keypoints[3].x, 0.0);
    EXPECT_EQ(s.stabilize(uniform_pose(1.0, 1.0, 1.0)).pose->keypoints[3].x, 0.5);
}

TEST(Stabilizer, AlphaOneIsIdentity) {
    Stabilizer s({1.0, 0.3});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        auto in = uniform_pose(d(rng), d(rng), 1.0);
        in.pose->keypoints[7].x = d(rng);
        auto out = s.stabilize(in);
        EXPECT_EQ(out.pose->keypoints, in.pose->keypoints);
    }
}

TEST(Stabilizer, ConstantInputConverges) {
    const double alpha = 0.3;
    Stabilizer s({alpha, 0.3});
    s.stabilize(uniform_pose(0.0, 1.0, 1.0));
    const int steps = static_cast<int>(std::ceil(std::log(1e-6) / std::log(1.0 - alpha)));
    KeypointFrame out;
    for (int i = 0; i < steps; ++i) {
        out = s.stabilize(uniform_pose(0.8, 0.2, 1.0));
    }
    EXPECT_NEAR(out.pose->keypoints[0].x, 0.8, 1e-6);
    EXPECT_NEAR(out.pose->keypoints[0].y, 0.2, 1e-6);
}

TEST(Stabilizer, LowConfidenceHoldsLastConfident) {
    Stabilizer s({0.5, 0.3});
    s.stabilize(uniform_pose(0.2, 0.2, 0.9));
    // Low confidence jump is ignored: output stays at 0.2.
    for (int i = 0; i < 10; ++i) {
        auto out = s.stabilize(uniform_pose(0.9, 0.9, 0.1));
        EXPECT_EQ(out.pose->keypoints[5].x, 0.2);
        EXPECT_EQ(out.pose->keypoints[5].y, 0.2);
    }
}

TEST(Stabilizer, LowConfidenceFirstFrameStillSeeds) {
    Stabilizer s({0.5, 0.3});
    auto out = s.stabilize(uniform_pose(0.4, 0.7, 0.05));
    EXPECT_EQ(out.pose->keypoints[0].x, 0.4);
    ASSERT_TRUE(s.last_confident());
    EXPECT_EQ((*s.last_confident())[0].x, 0.4);
}

TEST(Stabilizer, FaceSmoothed) {
    Stabilizer s({0.5, 0.3});
    KeypointFrame f;
    f.face = FaceFrame{};
    s.stabilize(f);
    for (auto& p : f.face->points) {
        p = {1.0, 1.0};
    }
    auto out = s.stabilize(f);
    EXPECT_EQ(out.face->points[40].x, 0.5);
}

// Property: every output stays inside the per-coordinate envelope of the seed and all inputs.
TEST(StabilizerProperty, OutputWithinInputEnvelope) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Stabilizer s({std::max(1e-3, d(rng)), 0.0});
        double lo = 1.0;
        double hi = 0.0;
        for (int i = 0; i < 40; ++i) {
            const double x = d(rng);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            auto out = s.stabilize(uniform_pose(x, x, 1.0));
            const double v = out.pose->keypoints[9].x;
            ASSERT_GE(v, lo - 1e-15);
            ASSERT_LE(v, hi + 1e-15);
        }
    }
}

// Property: a keypoint whose confidence never clears the threshold never moves away from
// its last confident position.
TEST(StabilizerProperty, ConfidenceGateFreezesBelowThreshold) {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double threshold = 0.2 + 0.6 * d(rng);
        Stabilizer s({0.05 + 0.95 * d(rng), threshold});
        const double anchor = d(rng);
        s.stabilize(uniform_pose(anchor, anchor, 1.0));
        for (int i = 0; i < 30; ++i) {
            auto in = uniform_pose(d(rng), d(rng), threshold * d(rng) * 0.999);
            auto out = s.stabilize(in);
            for (const auto& kp : out.pose->keypoints) {
                ASSERT_EQ(kp.x, anchor);
                ASSERT_EQ(kp.y, anchor);
            }
        }
    }
}

}  // namespace
}  // namespace puppetcast::keypoint
