#include "boicp/point_cloud.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace boicp {

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
        h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
        h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
    if (!(voxel > 0.0)) throw std::invalid_argument("voxel_downsample: voxel size must be > 0");
    if (cloud.empty()) throw std::invalid_argument("voxel_downsample: empty cloud");

    struct Accum {
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        std::size_t count = 0;
    };
    std::unordered_map<CellKey, std::size_t, CellHash> slot;
    slot.reserve(cloud.size());
    std::vector<Accum> cells;

    for (const auto& p : cloud.points) {
        CellKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                    static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                    static_cast<std::int64_t>(std::floor(p.z() / voxel))};
        auto [it, inserted] = slot.try_emplace(key, cells.size());
        if (inserted) cells.emplace_back();
        Accum& a = cells[it->second];
        a.sum += p;
        a.count += 1;
    }

    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& c : cells) out.points.push_back(c.sum / static_cast<double>(c.count));
    return out;
}

}  // namespace boicp
