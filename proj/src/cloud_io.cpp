#include "boicp/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "boicp/errors.hpp"

namespace boicp {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw ParseError(path.string() + ": " + what);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// ---------------------------------------------------------------------------
// PLY

int ply_type_size(const std::string& t) {
    if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
    if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
    if (t == "int" || t == "int32" || t == "uint" || t == "uint32" || t == "float" || t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    return 0;
}

struct PlyProperty {
    std::string name;
    std::string type;       // scalar type, or item type for lists
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, const std::string& type,
                          const std::filesystem::path& path) {
    unsigned char buf[8];
    int size = ply_type_size(type);
    if (size == 0) fail(path, "unknown ply property type '" + type + "'");
    std::streamoff offset = in.tellg();
    if (!in.read(reinterpret_cast<char*>(buf), size))
        fail(path, "truncated payload at byte offset " + std::to_string(offset));
    auto as = [&]<typename T>() {
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return static_cast<double>(v);
    };
    if (type == "char" || type == "int8") return as.operator()<std::int8_t>();
    if (type == "uchar" || type == "uint8") return as.operator()<std::uint8_t>();
    if (type == "short" || type == "int16") return as.operator()<std::int16_t>();
    if (type == "ushort" || type == "uint16") return as.operator()<std::uint16_t>();
    if (type == "int" || type == "int32") return as.operator()<std::int32_t>();
    if (type == "uint" || type == "uint32") return as.operator()<std::uint32_t>();
    if (type == "float" || type == "float32") return as.operator()<float>();
    return as.operator()<double>();
}

PointCloud load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    std::string line;
    if (!std::getline(in, line)) fail(path, "empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "ply") fail(path, "missing 'ply' magic at byte offset 0");

    bool binary = false;
    std::vector<PlyElement> elements;
    for (;;) {
        if (!std::getline(in, line)) fail(path, "header missing end_header");
        if (line.size() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                fail(path, "unsupported ply format '" + fmt + "'");
        } else if (keyword == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (keyword == "property") {
            if (elements.empty()) fail(path, "property before any element");
            PlyProperty p;
            std::string first;
            ls >> first;
            if (first == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = first;
                ls >> p.name;
            }
            elements.back().properties.push_back(p);
        } else if (keyword == "end_header") {
            break;
        } else {
            fail(path, "unknown header keyword '" + keyword + "'");
        }
    }

    PointCloud cloud;
    auto next_ascii = [&]() {
        std::streamoff offset = in.tellg();
        double v;
        if (!(in >> v))
            fail(path, "truncated ascii payload near byte offset " + std::to_string(offset));
        return v;
    };

    for (const auto& element : elements) {
        int ix = -1, iy = -1, iz = -1;
        if (element.name == "vertex") {
            for (int i = 0; i < static_cast<int>(element.properties.size()); ++i) {
                const auto& p = element.properties[i];
                if (p.is_list) continue;
                if (p.name == "x") ix = i;
                if (p.name == "y") iy = i;
                if (p.name == "z") iz = i;
            }
            if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z properties");
            for (int axis : {ix, iy, iz}) {
                const std::string& t = element.properties[axis].type;
                if (t != "float" && t != "float32" && t != "double" && t != "float64")
                    fail(path, "x/y/z must be float or double");
            }
            cloud.points.reserve(element.count);
        }
        for (std::size_t r = 0; r < element.count; ++r) {
            Eigen::Vector3d pt = Eigen::Vector3d::Zero();
            for (int i = 0; i < static_cast<int>(element.properties.size()); ++i) {
                const auto& p = element.properties[i];
                if (p.is_list) {
                    double n = binary ? read_binary_scalar(in, p.count_type, path) : next_ascii();
                    for (long k = 0; k < static_cast<long>(n); ++k)
                        binary ? read_binary_scalar(in, p.type, path) : next_ascii();
                } else {
                    double v = binary ? read_binary_scalar(in, p.type, path) : next_ascii();
                    if (i == ix) pt.x() = v;
                    if (i == iy) pt.y() = v;
                    if (i == iz) pt.z() = v;
                }
            }
            if (element.name == "vertex") cloud.points.push_back(pt);
        }
    }
    if (cloud.empty()) fail(path, "no vertices");
    return cloud;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\nend_header\n";
    for (const auto& p : cloud.points) {
        float v[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                      static_cast<float>(p.z())};
        out.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
}

// ---------------------------------------------------------------------------
// PCD

PointCloud load_pcd(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    std::vector<std::string> fields;
    std::vector<int> sizes, counts;
    std::vector<char> types;
    std::size_t points = 0;
    std::string data_mode;

    std::string line;
    while (std::getline(in, line)) {
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "FIELDS") {
            std::string f;
            while (ls >> f) fields.push_back(f);
        } else if (keyword == "SIZE") {
            int v;
            while (ls >> v) sizes.push_back(v);
        } else if (keyword == "TYPE") {
            char c;
            while (ls >> c) types.push_back(c);
        } else if (keyword == "COUNT") {
            int v;
            while (ls >> v) counts.push_back(v);
        } else if (keyword == "POINTS") {
            ls >> points;
        } else if (keyword == "DATA") {
            ls >> data_mode;
            break;
        }
        // VERSION / WIDTH / HEIGHT / VIEWPOINT are not needed here.
    }
    if (fields.empty()) fail(path, "missing FIELDS header");
    if (data_mode.empty()) fail(path, "missing DATA header");
    if (sizes.size() != fields.size() || types.size() != fields.size())
        fail(path, "FIELDS/SIZE/TYPE arity mismatch");
    if (counts.empty()) counts.assign(fields.size(), 1);
    if (counts.size() != fields.size()) fail(path, "FIELDS/COUNT arity mismatch");
    if (points == 0) fail(path, "POINTS is zero or missing");

    int ix = -1, iy = -1, iz = -1;
    for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "x") ix = i;
        if (fields[i] == "y") iy = i;
        if (fields[i] == "z") iz = i;
    }
    if (ix < 0 || iy < 0 || iz < 0) fail(path, "FIELDS must contain x y z");

    PointCloud cloud;
    cloud.points.reserve(points);

    if (data_mode == "ascii") {
        // Column index of each field start, honoring COUNT multiplicity.
        std::vector<int> col(fields.size());
        int c = 0;
        for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
            col[i] = c;
            c += counts[i];
        }
        std::size_t line_no = 0;
        std::size_t parsed = 0;
        while (parsed < points && std::getline(in, line)) {
            ++line_no;
            if (line.size() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::vector<double> values;
            double v;
            while (ls >> v) values.push_back(v);
            if (static_cast<int>(values.size()) < c)
                fail(path, "data line " + std::to_string(line_no) + " has too few columns");
            cloud.points.push_back({values[col[ix]], values[col[iy]], values[col[iz]]});
            ++parsed;
        }
        if (parsed < points) fail(path, "payload ended early: expected " + std::to_string(points));
    } else if (data_mode == "binary") {
        int stride = 0;
        std::vector<int> offset(fields.size());
        for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
            offset[i] = stride;
            stride += sizes[i] * counts[i];
        }
        std::vector<char> record(stride);
        auto scalar_at = [&](int field) -> double {
            const char* p = record.data() + offset[field];
            if (types[field] == 'F' && sizes[field] == 4) {
                float f;
                std::memcpy(&f, p, 4);
                return f;
            }
            if (types[field] == 'F' && sizes[field] == 8) {
                double d;
                std::memcpy(&d, p, 8);
                return d;
            }
            fail(path, "x/y/z fields must have TYPE F");
        };
        for (std::size_t r = 0; r < points; ++r) {
            std::streamoff at = in.tellg();
            if (!in.read(record.data(), stride))
                fail(path, "truncated payload at byte offset " + std::to_string(at));
            cloud.points.push_back({scalar_at(ix), scalar_at(iy), scalar_at(iz)});
        }
    } else {
        fail(path, "unsupported DATA mode '" + data_mode + "'");
    }
    if (cloud.empty()) fail(path, "no points");
    return cloud;
}

void save_pcd(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n"
        << "FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
        << "WIDTH " << cloud.size() << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n"
        << "POINTS " << cloud.size() << "\nDATA binary\n";
    for (const auto& p : cloud.points) {
        float v[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                      static_cast<float>(p.z())};
        out.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
}

// ---------------------------------------------------------------------------
// XYZ

PointCloud load_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open file");
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double x, y, z;
        std::string extra;
        if (!(ls >> x >> y >> z) || (ls >> extra))
            fail(path, "line " + std::to_string(line_no) + ": expected exactly 3 numbers");
        cloud.points.push_back({x, y, z});
    }
    if (cloud.empty()) fail(path, "no points");
    return cloud;
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    char buf[128];
    for (const auto& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// KITTI velodyne .bin

PointCloud load_kitti_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) fail(path, "cannot open file");
    std::streamoff size = in.tellg();
    if (size == 0) fail(path, "no points");
    if (size % 16 != 0)
        fail(path, "payload truncated at byte offset " + std::to_string((size / 16) * 16));
    in.seekg(0);
    std::size_t n = static_cast<std::size_t>(size / 16);
    PointCloud cloud;
    cloud.points.reserve(n);
    float rec[4];
    for (std::size_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(rec), sizeof(rec));
        cloud.points.push_back({rec[0], rec[1], rec[2]});  // reflectance dropped
    }
    return cloud;
}

void save_kitti_bin(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    for (const auto& p : cloud.points) {
        float rec[4] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                        static_cast<float>(p.z()), 0.0f};
        out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    }
}

}  // namespace

CloudFormat infer_cloud_format(const std::filesystem::path& path) {
    std::string ext = lower(path.extension().string());
    if (ext == ".ply") return CloudFormat::kPly;
    if (ext == ".pcd") return CloudFormat::kPcd;
    if (ext == ".xyz") return CloudFormat::kXyz;
    if (ext == ".bin") return CloudFormat::kKittiBin;
    throw std::invalid_argument("cannot infer cloud format from '" + path.string() + "'");
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
    switch (format) {
        case CloudFormat::kPly: return load_ply(path);
        case CloudFormat::kPcd: return load_pcd(path);
        case CloudFormat::kXyz: return load_xyz(path);
        case CloudFormat::kKittiBin: return load_kitti_bin(path);
    }
    throw std::invalid_argument("load_cloud: bad format");
}

PointCloud load_cloud(const std::filesystem::path& path) {
    return load_cloud(path, infer_cloud_format(path));
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
    switch (format) {
        case CloudFormat::kPly: return save_ply(cloud, path);
        case CloudFormat::kPcd: return save_pcd(cloud, path);
        case CloudFormat::kXyz: return save_xyz(cloud, path);
        case CloudFormat::kKittiBin: return save_kitti_bin(cloud, path);
    }
    throw std::invalid_argument("save_cloud: bad format");
}

}  // namespace boicp
