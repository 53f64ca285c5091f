#include <random>

#include <gtest/gtest.h>

#include "boicp/kdtree.hpp"
#include "boicp/point_cloud.hpp"
#include "support.hpp"

using namespace boicp;

namespace {

PointCloud unit_cube_corners() {
    PointCloud c;
    for (int i = 0; i < 8; ++i)
        c.points.push_back({static_cast<double>(i & 1), static_cast<double>((i >> 1) & 1),
                            static_cast<double>((i >> 2) & 1)});
    return c;
}

}  // namespace

TEST(VoxelDownsample, AllPointsInOneCell) {
    PointCloud out = voxel_downsample(unit_cube_corners(), 10.0);
    ASSERT_EQ(1u, out.size());
    EXPECT_LT((out.points[0] - Eigen::Vector3d(0.5, 0.5, 0.5)).norm(), 1e-15);
}

TEST(VoxelDownsample, CornersLandInDistinctCells) {
    // floor(0 / 0.4) = 0 and floor(1 / 0.4) = 2, so all eight corners keep
    // their own cell and survive unchanged.
    PointCloud in = unit_cube_corners();
    PointCloud out = voxel_downsample(in, 0.4);
    ASSERT_EQ(8u, out.size());
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(in.points[i], out.points[i]);
}

TEST(VoxelDownsample, SinglePoint) {
    PointCloud in;
    in.points.push_back({1.5, -2.5, 3.0});
    PointCloud out = voxel_downsample(in, 0.25);
    ASSERT_EQ(1u, out.size());
    EXPECT_EQ(in.points[0], out.points[0]);
}

TEST(VoxelDownsample, InvalidArguments) {
    EXPECT_THROW(voxel_downsample(unit_cube_corners(), 0.0), std::invalid_argument);
    EXPECT_THROW(voxel_downsample(unit_cube_corners(), -1.0), std::invalid_argument);
    EXPECT_THROW(voxel_downsample(PointCloud{}, 1.0), std::invalid_argument);
}

TEST(VoxelDownsample, IdempotentWhenCellsStaySeparate) {
    std::mt19937 rng(41);
    PointCloud in = testutil::random_box_cloud(400, {4.0, 4.0, 4.0}, rng);
    PointCloud once = voxel_downsample(in, 0.5);
    PointCloud twice = voxel_downsample(once, 0.5);
    // Each output point is the centroid of its own cell, so it stays alone.
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i)
        EXPECT_LT((once.points[i] - twice.points[i]).norm(), 1e-15);
}

TEST(VoxelDownsample, BoundingBoxContained) {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        PointCloud in = testutil::random_box_cloud(300, {5.0, 2.0, 3.0}, rng);
        PointCloud out = voxel_downsample(in, 0.7);
        EXPECT_LE(out.size(), in.size());
        Eigen::Vector3d in_lo = in.points[0], in_hi = in.points[0];
        for (const auto& p : in.points) {
            in_lo = in_lo.cwiseMin(p);
            in_hi = in_hi.cwiseMax(p);
        }
        for (const auto& p : out.points) {
            EXPECT_TRUE((p.array() >= in_lo.array() - 1e-12).all());
            EXPECT_TRUE((p.array() <= in_hi.array() + 1e-12).all());
        }
    }
}

TEST(KdTree, SinglePointCloud) {
    PointCloud c;
    c.points.push_back({1.0, 2.0, 3.0});
    KdTree tree(c);
    auto nn = tree.nearest({100.0, 0.0, 0.0});
    EXPECT_EQ(0, nn.index);
    EXPECT_NEAR((Eigen::Vector3d(1, 2, 3) - Eigen::Vector3d(100, 0, 0)).norm(), nn.distance, 1e-12);
}

TEST(KdTree, EmptyCloudThrows) { EXPECT_THROW(KdTree(PointCloud{}), std::invalid_argument); }

TEST(KdTree, QueryAtIndexedPointIsZero) {
    std::mt19937 rng(47);
    PointCloud c = testutil::random_box_cloud(100, {1.0, 1.0, 1.0}, rng);
    KdTree tree(c);
    for (int i = 0; i < static_cast<int>(c.size()); ++i) {
        auto nn = tree.nearest(c.points[i]);
        EXPECT_EQ(0.0, nn.distance);
    }
}

TEST(KdTree, GridNodeQueryIsExact) {
    PointCloud c;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k) c.points.push_back({1.0 * i, 1.0 * j, 1.0 * k});
    KdTree tree(c);
    auto nn = tree.nearest({2.0, 3.0, 1.0});
    EXPECT_EQ(0.0, nn.distance);
}

TEST(KdTree, EquidistantTieGoesToLowerIndex) {
    PointCloud c;
    c.points.push_back({1.0, 0.0, 0.0});
    c.points.push_back({-1.0, 0.0, 0.0});
    c.points.push_back({0.0, 1.0, 0.0});
    c.points.push_back({0.0, -1.0, 0.0});
    KdTree tree(c);
    auto nn = tree.nearest({0.0, 0.0, 0.0});
    EXPECT_EQ(0, nn.index);
    EXPECT_DOUBLE_EQ(1.0, nn.distance);

    // Duplicate coordinates: the lower of the two duplicate ids wins.
    PointCloud d;
    d.points.push_back({5.0, 5.0, 5.0});
    d.points.push_back({2.0, 2.0, 2.0});
    d.points.push_back({2.0, 2.0, 2.0});
    KdTree dup(d);
    EXPECT_EQ(1, dup.nearest({2.1, 2.0, 2.0}).index);
}

TEST(KdTree, MatchesLinearScanRandomized) {
    std::mt19937 rng(53);
    std::uniform_int_distribution<int> size_dist(1, 400);
    int checked = 0;
    while (checked < 1200) {
        int n = size_dist(rng);
        PointCloud c = testutil::random_box_cloud(n, {2.0, 2.0, 2.0}, rng);
        KdTree tree(c);
        for (int q = 0; q < 10; ++q, ++checked) {
            Eigen::Vector3d query(3.0 * (rng() % 1000) / 1000.0 - 0.5,
                                  3.0 * (rng() % 1000) / 1000.0 - 0.5,
                                  3.0 * (rng() % 1000) / 1000.0 - 0.5);
            auto nn = tree.nearest(query);
            auto [oracle_idx, oracle_dist] = testutil::linear_scan_nn(c, query);
            EXPECT_EQ(oracle_idx, nn.index);
            EXPECT_DOUBLE_EQ(oracle_dist, nn.distance);
        }
    }
}

TEST(KdTree, MatchesLinearScanLargeCloud) {
    std::mt19937 rng(59);
    PointCloud c = testutil::random_box_cloud(5000, {10.0, 10.0, 10.0}, rng);
    KdTree tree(c);
    std::uniform_real_distribution<double> u(-1.0, 11.0);
    for (int q = 0; q < 200; ++q) {
        Eigen::Vector3d query(u(rng), u(rng), u(rng));
        auto nn = tree.nearest(query);
        auto [oracle_idx, oracle_dist] = testutil::linear_scan_nn(c, query);
        EXPECT_EQ(oracle_idx, nn.index);
        EXPECT_DOUBLE_EQ(oracle_dist, nn.distance);
    }
}
