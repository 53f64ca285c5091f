#include "boicp/evaluation.hpp"

#include <random>

#include <gtest/gtest.h>

#include "boicp/icp.hpp"
#include "support.hpp"

using namespace boicp;

namespace {

PointCloud grid_cloud(int nx, int ny, double spacing, double x0 = 0.0) {
    PointCloud c;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) c.points.push_back({x0 + i * spacing, j * spacing, 0.0});
    return c;
}

}  // namespace

TEST(OverlapFraction, SelfIsOne) {
    std::mt19937 rng(111);
    PointCloud c = testutil::random_box_cloud(200, {3.0, 2.0, 1.0}, rng);
    for (double r : {0.1, 0.5, 2.0}) EXPECT_DOUBLE_EQ(1.0, overlap_fraction(c, c, r));
}

TEST(OverlapFraction, DisjointIsZero) {
    std::mt19937 rng(113);
    PointCloud a = testutil::random_box_cloud(100, {1.0, 1.0, 1.0}, rng);
    PointCloud b = a;
    for (auto& p : b.points) p.x() += 100.0 * 0.5;  // 100 radii away at r = 0.5
    EXPECT_DOUBLE_EQ(0.0, overlap_fraction(a, b, 0.5));
}

TEST(OverlapFraction, HalfOverlappingGrids) {
    // Two 20 x 10 unit grids offset by half their width share half their area.
    PointCloud a = grid_cloud(20, 10, 1.0, 0.0);
    PointCloud b = grid_cloud(20, 10, 1.0, 10.0);
    double f = overlap_fraction(a, b, 0.5);
    EXPECT_NEAR(0.5, f, 0.06);  // within one voxel layer of an exact half
}

TEST(OverlapFraction, MonotoneInRadius) {
    std::mt19937 rng(127);
    PointCloud a = testutil::random_box_cloud(150, {2.0, 2.0, 1.0}, rng);
    PointCloud b = testutil::random_box_cloud(150, {2.0, 2.0, 1.0}, rng);
    for (auto& p : b.points) p.x() += 0.8;
    double prev = 0.0;
    for (double r = 0.05; r <= 1.6; r *= 2.0) {
        double f = overlap_fraction(a, b, r);
        EXPECT_GE(f, prev - 1e-12);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
        prev = f;
    }
}

TEST(OverlapFraction, InvalidArguments) {
    PointCloud c;
    c.points.push_back({0, 0, 0});
    EXPECT_THROW(overlap_fraction(c, c, 0.0), std::invalid_argument);
    EXPECT_THROW(overlap_fraction(c, PointCloud{}, 1.0), std::invalid_argument);
}

TEST(SelectPairs, ThresholdZeroGivesFirstToLast) {
    std::mt19937 rng(131);
    std::vector<PointCloud> seq;
    for (int i = 0; i < 5; ++i) seq.push_back(testutil::random_box_cloud(100, {2, 2, 1}, rng));
    auto pairs = select_pairs(seq, 0.0, 0.3);
    ASSERT_EQ(1u, pairs.size());
    EXPECT_EQ(0, pairs[0].ref_id);
    EXPECT_EQ(4, pairs[0].target_id);
}

TEST(SelectPairs, ImpossibleThresholdGivesConsecutivePairs) {
    std::mt19937 rng(137);
    std::vector<PointCloud> seq;
    for (int i = 0; i < 4; ++i) {
        PointCloud c = testutil::random_box_cloud(120, {2, 2, 1}, rng);
        for (auto& p : c.points) p.x() += 0.4 * i;  // drifting clouds
        seq.push_back(c);
    }
    auto pairs = select_pairs(seq, 1.1, 0.3);  // nothing reaches a 110% overlap
    ASSERT_EQ(3u, pairs.size());
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(i, pairs[i].ref_id);
        EXPECT_EQ(i + 1, pairs[i].target_id);
    }
}

TEST(SelectPairs, IdenticalCloudsEmitTrailingPair) {
    std::mt19937 rng(139);
    PointCloud c = testutil::random_box_cloud(100, {2, 2, 1}, rng);
    std::vector<PointCloud> seq{c, c, c};
    auto pairs = select_pairs(seq, 0.7, 0.3);
    ASSERT_EQ(1u, pairs.size());
    EXPECT_EQ(0, pairs[0].ref_id);
    EXPECT_EQ(2, pairs[0].target_id);
    EXPECT_DOUBLE_EQ(1.0, pairs[0].overlap);
}

TEST(SelectPairs, HandTracedDriftingSequence) {
    // Clouds drift 0.4 per step over a 2-unit-wide grid; at radius 0.25 the
    // overlap with cloud 0 stays above 0.6 for j = 1, 2 and drops below at
    // j = 3, so the walk emits (0,2) and then (2,4) at the sequence end.
    PointCloud base = grid_cloud(21, 11, 0.1);
    std::vector<PointCloud> seq;
    for (int i = 0; i < 5; ++i) {
        PointCloud c = base;
        for (auto& p : c.points) p.x() += 0.4 * i;
        seq.push_back(c);
    }
    double r = 0.25;
    ASSERT_GE(overlap_fraction(seq[0], seq[1], r), 0.6);
    ASSERT_GE(overlap_fraction(seq[0], seq[2], r), 0.6);
    ASSERT_LT(overlap_fraction(seq[0], seq[3], r), 0.6);

    auto pairs = select_pairs(seq, 0.6, r);
    ASSERT_EQ(2u, pairs.size());
    EXPECT_EQ(0, pairs[0].ref_id);
    EXPECT_EQ(2, pairs[0].target_id);
    EXPECT_EQ(2, pairs[1].ref_id);
    EXPECT_EQ(4, pairs[1].target_id);
}

TEST(SelectPairs, AttachesRelativeGroundTruth) {
    std::mt19937 rng(149);
    PointCloud c = testutil::random_box_cloud(80, {2, 2, 1}, rng);
    std::vector<PointCloud> seq{c, c, c};
    std::vector<RigidTransform> poses(3);
    poses[0] = pose_to_transform({0.0, 0.0, 0.0, 0.0, 0.0, 0.1});
    poses[1] = pose_to_transform({1.0, 0.0, 0.0, 0.0, 0.0, 0.2});
    poses[2] = pose_to_transform({2.0, 0.5, 0.0, 0.0, 0.0, 0.4});
    auto pairs = select_pairs(seq, 0.7, 0.3, &poses);
    ASSERT_EQ(1u, pairs.size());
    ASSERT_TRUE(pairs[0].gt.has_value());
    RigidTransform expected = poses[0].inverse().compose(poses[2]);
    EXPECT_LT(testutil::max_matrix_diff(*pairs[0].gt, expected), 1e-12);
}

TEST(WelchAnova, IdenticalGroups) {
    std::vector<std::vector<double>> groups = {{1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0}};
    auto r = welch_anova(groups);
    EXPECT_DOUBLE_EQ(0.0, r.f_value);
    EXPECT_DOUBLE_EQ(1.0, r.p_value);
}

TEST(WelchAnova, MatchesIndependentOracleFixture) {
    // Frozen from an independent statistics package (scipy-based Welch ANOVA).
    std::vector<std::vector<double>> groups = {
        {27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4},
        {24.5, 23.4, 34.3, 19.7, 27.5, 27.8, 25.3, 28.5, 20.2, 27.4},
        {31.2, 22.4, 23.1, 26.4, 22.8, 29.3, 29.8, 30.2, 21.1, 25.5, 31.2, 26.7}};
    auto r = welch_anova(groups);
    EXPECT_NEAR(12.161195338537, r.f_value, 1e-6);
    EXPECT_NEAR(3.947481793220e-04, r.p_value, 1e-6);
    EXPECT_NEAR(19.053907950434, r.df2, 1e-6);
}

TEST(WelchAnova, TwoGroupOracleFixture) {
    std::vector<std::vector<double>> groups = {{10.0, 11.0, 12.0, 13.0, 14.0},
                                               {20.0, 22.0, 24.0, 26.0, 28.0}};
    auto r = welch_anova(groups);
    EXPECT_NEAR(57.6, r.f_value, 1e-9);
    EXPECT_NEAR(2.991432320527e-04, r.p_value, 1e-9);
    EXPECT_NEAR(5.882352941176, r.df2, 1e-6);
}

TEST(WelchAnova, SeparatedGroupsRejectLikeAPermutationTest) {
    std::mt19937 rng(151);
    std::normal_distribution<double> g0(0.0, 1.0), g5(5.0, 1.0);
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) {
        a.push_back(g0(rng));
        b.push_back(g5(rng));
    }
    std::vector<std::vector<double>> groups = {a, b};
    auto r = welch_anova(groups);
    EXPECT_LT(r.p_value, 1e-10);

    // Permutation oracle: how often does a random relabeling produce a mean
    // gap as large as observed? Never, for separations this extreme.
    double observed_gap = 5.0;
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    int exceed = 0;
    for (int perm = 0; perm < 500; ++perm) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < 100; ++i) m1 += pooled[i];
        for (int i = 100; i < 200; ++i) m2 += pooled[i];
        if (std::abs(m1 - m2) / 100.0 >= observed_gap * 0.8) ++exceed;
    }
    EXPECT_EQ(0, exceed);
}

TEST(WelchAnova, InvariantUnderRelabeling) {
    std::vector<std::vector<double>> groups = {{1.0, 2.0, 3.5}, {4.0, 5.5, 6.0}, {0.5, 2.5, 7.0}};
    auto r1 = welch_anova(groups);
    std::swap(groups[0], groups[2]);
    auto r2 = welch_anova(groups);
    EXPECT_NEAR(r1.f_value, r2.f_value, 1e-12);
    EXPECT_NEAR(r1.p_value, r2.p_value, 1e-12);
    EXPECT_GE(r1.p_value, 0.0);
    EXPECT_LE(r1.p_value, 1.0);
}

TEST(WelchAnova, DegenerateInputsRejected) {
    std::vector<std::vector<double>> one_group = {{1.0, 2.0}};
    EXPECT_THROW(welch_anova(one_group), std::invalid_argument);
    std::vector<std::vector<double>> small = {{1.0}, {2.0, 3.0}};
    EXPECT_THROW(welch_anova(small), std::invalid_argument);
    std::vector<std::vector<double>> flat = {{2.0, 2.0, 2.0}, {1.0, 3.0, 5.0}};
    EXPECT_THROW(welch_anova(flat), std::invalid_argument);
}

TEST(MeanP2pDistance, PerfectAlignmentIsZero) {
    std::mt19937 rng(157);
    PointCloud c = testutil::random_box_cloud(100, {2, 2, 1}, rng);
    EXPECT_DOUBLE_EQ(0.0, mean_p2p_distance(c, c, RigidTransform::identity()));
}

TEST(MeanP2pDistance, UniformOffsetOfIsolatedPoints) {
    PointCloud ref = grid_cloud(5, 5, 10.0);  // spacing 10 keeps neighbors honest
    RigidTransform shift;
    shift.translation = {1.0, 0.0, 0.0};
    EXPECT_NEAR(1.0, mean_p2p_distance(ref, ref, shift), 1e-12);
}

TEST(MeanP2pDistance, MatchesBruteForce) {
    std::mt19937 rng(163);
    PointCloud ref = testutil::random_box_cloud(120, {2, 2, 1}, rng);
    PointCloud src = testutil::random_box_cloud(90, {2, 2, 1}, rng);
    RigidTransform t = testutil::random_transform(0.3, 0.4, rng);
    double sum = 0.0;
    for (const auto& p : src.points) sum += testutil::linear_scan_nn(ref, t.apply(p)).second;
    EXPECT_NEAR(sum / src.size(), mean_p2p_distance(src, ref, t), 1e-12);
}

TEST(MeanP2pDistance, ZeroExactlyWhenObjectiveZero) {
    std::mt19937 rng(167);
    PointCloud c = testutil::random_box_cloud(60, {1, 1, 1}, rng);
    KdTree tree(c);
    RigidTransform id = RigidTransform::identity();
    EXPECT_EQ(0.0, objective(c, tree, id));
    EXPECT_EQ(0.0, mean_p2p_distance(c, c, id));
    RigidTransform off;
    off.translation = {0.01, 0.0, 0.0};
    EXPECT_GT(objective(c, tree, off), 0.0);
    EXPECT_GT(mean_p2p_distance(c, c, off), 0.0);
}

TEST(RegularizedIncompleteBeta, KnownValues) {
    // I_x(1, 1) = x; I_x(2, 2) = 3x^2 - 2x^3.
    for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        EXPECT_NEAR(x, regularized_incomplete_beta(x, 1.0, 1.0), 1e-12);
        EXPECT_NEAR(3 * x * x - 2 * x * x * x, regularized_incomplete_beta(x, 2.0, 2.0), 1e-12);
    }
    EXPECT_DOUBLE_EQ(0.0, regularized_incomplete_beta(0.0, 3.0, 4.0));
    EXPECT_DOUBLE_EQ(1.0, regularized_incomplete_beta(1.0, 3.0, 4.0));
}
