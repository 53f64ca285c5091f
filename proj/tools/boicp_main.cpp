#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boicp/baselines.hpp"
#include "boicp/cloud_io.hpp"
#include "boicp/errors.hpp"
#include "boicp/evaluation.hpp"
#include "boicp/optimizer.hpp"
#include "boicp/pose_io.hpp"
#include "boicp/result_json.hpp"

namespace fs = std::filesystem;
using namespace boicp;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct AlignOptions {
    std::string source;
    std::string reference;
    std::string method = "bo";
    std::string preset_name = "B";
    std::string mode = "nested";
    std::vector<std::string> bounds_spec;
    bool degrees = false;
    std::uint64_t seed = 0;
    int n_random = -1;
    int n_iterations = -1;
    double voxel = -1.0;
    int budget = 0;
    double max_corr_dist = 0.0;  // 0 = infinite
    int icp_iters = 50;
    double icp_tol = 1e-6;
    std::string out;
    std::string source_format;
    std::string reference_format;
    bool recenter = false;
};

CloudFormat parse_format(const std::string& name) {
    if (name == "ply") return CloudFormat::kPly;
    if (name == "pcd") return CloudFormat::kPcd;
    if (name == "xyz") return CloudFormat::kXyz;
    if (name == "bin") return CloudFormat::kKittiBin;
    throw CLI::ValidationError("--format", "unknown cloud format '" + name + "'");
}

PointCloud load_cloud_arg(const std::string& path, const std::string& format_override) {
    if (format_override.empty()) return load_cloud(path);
    return load_cloud(path, parse_format(format_override));
}

SearchBounds parse_bounds(const std::vector<std::string>& spec, bool degrees) {
    SearchBounds b = SearchBounds::default_bounds();
    if (spec.empty()) return b;
    if (spec.size() != 6)
        throw CLI::ValidationError("--bounds", "expected six lo:hi pairs (x y z roll pitch yaw)");
    for (int i = 0; i < 6; ++i) {
        auto colon = spec[i].find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--bounds", "'" + spec[i] + "' is not lo:hi");
        double lo = std::stod(spec[i].substr(0, colon));
        double hi = std::stod(spec[i].substr(colon + 1));
        if (degrees && i >= 3) {
            lo *= kDegToRad;
            hi *= kDegToRad;
        }
        b.lo[i] = lo;
        b.hi[i] = hi;
    }
    b.validate();
    return b;
}

BoConfig build_config(const AlignOptions& opt) {
    BoConfig cfg = preset(opt.preset_name);
    if (opt.n_random > 0) cfg.n_random = opt.n_random;
    if (opt.n_iterations >= 0) cfg.n_iterations = opt.n_iterations;
    if (opt.voxel >= 0.0) cfg.voxel = opt.voxel;
    cfg.mode = opt.mode == "full" ? BoMode::kFull6Dof : BoMode::kNested;
    cfg.bounds = parse_bounds(opt.bounds_spec, opt.degrees);
    cfg.seed = opt.seed;
    cfg.icp.max_iterations = opt.icp_iters;
    cfg.icp.rel_tolerance = opt.icp_tol;
    if (opt.max_corr_dist > 0.0) {
        cfg.icp.max_correspondence_dist = opt.max_corr_dist;
        cfg.polish.max_correspondence_dist = opt.max_corr_dist;
    }
    cfg.recenter_rotation = opt.recenter;
    cfg.validate();
    return cfg;
}

int bo_budget(const BoConfig& cfg) {
    int per_stage = cfg.n_random + cfg.n_iterations;
    return cfg.mode == BoMode::kNested ? 2 * per_stage : per_stage;
}

int run_align(const AlignOptions& opt) {
    PointCloud source = load_cloud_arg(opt.source, opt.source_format);
    PointCloud reference = load_cloud_arg(opt.reference, opt.reference_format);
    BoConfig cfg = build_config(opt);

    RegistrationResult result;
    try {
        if (opt.method == "bo") {
            result = optimize(source, reference, cfg);
        } else if (opt.method == "random") {
            PointCloud s = cfg.voxel > 0.0 ? voxel_downsample(source, cfg.voxel) : source;
            PointCloud r = cfg.voxel > 0.0 ? voxel_downsample(reference, cfg.voxel) : reference;
            int budget = opt.budget > 0 ? opt.budget : bo_budget(cfg);
            result = random_search(s, r, budget, cfg.bounds, cfg.icp, cfg.seed);
        } else if (opt.method == "pyramid") {
            PointCloud s = cfg.voxel > 0.0 ? voxel_downsample(source, cfg.voxel) : source;
            PointCloud r = cfg.voxel > 0.0 ? voxel_downsample(reference, cfg.voxel) : reference;
            PyramidConfig pyr;
            pyr.bounds = cfg.bounds;
            pyr.fitness_radius = cfg.voxel > 0.0 ? 2.0 * cfg.voxel : 1.4;
            result = pyramid_search(s, r, pyr, cfg.icp).result;
        } else {
            std::cerr << "unknown method '" << opt.method << "'\n";
            return 1;
        }
    } catch (const RegistrationFailedError& e) {
        std::cerr << "registration failed: " << e.what() << " (" << e.history().size()
                  << " evaluations)\n";
        return 2;
    }

    nlohmann::json j = result_to_json(result, opt.method, cfg);
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) {
            std::cerr << "cannot write " << opt.out << "\n";
            return 1;
        }
        out << j.dump(2) << "\n";
    }
    std::cout << opt.method << ": objective " << result.polished_objective << " m^2, mean p2p "
              << result.mean_p2p << " m, " << result.evaluations << " evaluations, "
              << result.wall_time_s << " s\n";
    return 0;
}

struct BenchOptions {
    std::string clouds_glob;
    std::string poses;
    std::string pose_format;
    double overlap_threshold = 0.6;
    double overlap_radius = 0.0;  // 0 = use voxel
    std::string methods = "bo,random";
    std::string seeds = "0";
    std::string csv;
    AlignOptions align;  // preset/voxel/bounds/icp knobs reused
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
    fs::path p(pattern);
    fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    std::string name_pattern = p.filename().string();
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && glob_match(name_pattern, entry.path().filename().string()))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct Quartiles {
    double q1, median, q3, mean;
};

Quartiles quartiles(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    auto pick = [&](double f) {
        double idx = f * static_cast<double>(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(idx);
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double frac = idx - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    return {pick(0.25), pick(0.5), pick(0.75), mean};
}

int run_bench(const BenchOptions& opt) {
    auto files = expand_glob(opt.clouds_glob);
    if (files.size() < 2) {
        std::cerr << "bench: found " << files.size() << " clouds for pattern '" << opt.clouds_glob
                  << "', need at least 2\n";
        return 2;
    }

    std::vector<PointCloud> clouds;
    clouds.reserve(files.size());
    for (const auto& f : files) clouds.push_back(load_cloud(f));

    std::optional<std::vector<RigidTransform>> poses;
    if (!opt.poses.empty()) {
        if (opt.pose_format == "kitti")
            poses = load_poses(opt.poses, PoseFormat::kKitti12);
        else if (opt.pose_format == "tum")
            poses = load_poses(opt.poses, PoseFormat::kTum8);
        else
            poses = load_poses(opt.poses);
        if (poses->size() != clouds.size()) {
            std::cerr << "bench: " << poses->size() << " poses for " << clouds.size()
                      << " clouds\n";
            return 1;
        }
    }

    BoConfig base_cfg = build_config(opt.align);
    double radius = opt.overlap_radius > 0.0 ? opt.overlap_radius
                    : base_cfg.voxel > 0.0   ? base_cfg.voxel
                                             : 0.5;
    auto pairs = select_pairs(clouds, opt.overlap_threshold, radius,
                              poses ? &poses.value() : nullptr);
    if (pairs.empty()) {
        std::cerr << "bench: no pairs passed the overlap threshold " << opt.overlap_threshold
                  << "\n";
        return 2;
    }

    std::vector<std::string> methods = split_csv(opt.methods);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_csv(opt.seeds)) seeds.push_back(std::stoull(s));
    if (methods.empty() || seeds.empty()) {
        std::cerr << "bench: --methods and --seeds must be non-empty\n";
        return 1;
    }

    struct Job {
        std::size_t pair_idx, method_idx, seed_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < pairs.size(); ++p)
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({p, m, s});

    std::vector<RunRecord> records(jobs.size());

    auto run_job = [&](const Job& job) {
        const PairSpec& pair = pairs[job.pair_idx];
        const std::string& method = methods[job.method_idx];
        std::uint64_t seed = seeds[job.seed_idx];

        const PointCloud& source = clouds[pair.target_id];
        const PointCloud& reference = clouds[pair.ref_id];
        PointCloud s_ds = base_cfg.voxel > 0.0 ? voxel_downsample(source, base_cfg.voxel) : source;
        PointCloud r_ds =
            base_cfg.voxel > 0.0 ? voxel_downsample(reference, base_cfg.voxel) : reference;

        RunRecord rec;
        rec.pair = pair;
        rec.method = method;
        rec.seed = seed;
        auto start = std::chrono::steady_clock::now();
        RigidTransform best;
        try {
            if (method == "bo") {
                BoConfig cfg = base_cfg;
                cfg.seed = seed;
                best = optimize(source, reference, cfg).best_transform;
            } else if (method == "random") {
                int budget = opt.align.budget > 0 ? opt.align.budget : bo_budget(base_cfg);
                best = random_search(s_ds, r_ds, budget, base_cfg.bounds, base_cfg.icp, seed)
                           .best_transform;
            } else if (method == "pyramid") {
                PyramidConfig pyr;
                pyr.bounds = base_cfg.bounds;
                pyr.fitness_radius = base_cfg.voxel > 0.0 ? 2.0 * base_cfg.voxel : 1.4;
                best = pyramid_search(s_ds, r_ds, pyr, base_cfg.icp).result.best_transform;
            } else {
                throw std::invalid_argument("unknown method '" + method + "'");
            }
        } catch (const RegistrationFailedError&) {
            best = RigidTransform::identity();
        }
        rec.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.mean_p2p = mean_p2p_distance(s_ds, r_ds, best);
        if (pair.gt) {
            rec.trans_err = translation_error(best, *pair.gt);
            rec.rot_err = rotation_error(best, *pair.gt);
        }
        return rec;
    };

    unsigned threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("BOICP_THREADS")) {
        unsigned cap = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        if (cap >= 1) threads = std::min(threads, cap);
    }
    threads = std::max(1u, std::min<unsigned>(threads, jobs.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            records[i] = run_job(jobs[i]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Rows already sit in (pair, method, seed) lexicographic order by construction.
    std::ofstream csv(opt.csv);
    if (!csv) {
        std::cerr << "bench: cannot write " << opt.csv << "\n";
        return 1;
    }
    csv << "pair_id,method,seed,mean_p2p_m,trans_err_m,rot_err_rad,runtime_s\r\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const RunRecord& r = records[i];
        std::string pair_id = std::to_string(r.pair.ref_id) + "-" + std::to_string(r.pair.target_id);
        csv << csv_field(pair_id) << "," << csv_field(r.method) << "," << r.seed << ","
            << fmt_double(r.mean_p2p) << "," << (r.trans_err ? fmt_double(*r.trans_err) : "") << ","
            << (r.rot_err ? fmt_double(*r.rot_err) : "") << "," << fmt_double(r.runtime_s)
            << "\r\n";
    }
    csv.close();

    std::cout << pairs.size() << " pairs, " << jobs.size() << " runs -> " << opt.csv << "\n";
    std::cout << "method        n     mean      q1        median    q3\n";
    for (const auto& method : methods) {
        std::vector<double> v;
        for (const auto& r : records)
            if (r.method == method) v.push_back(r.mean_p2p);
        if (v.empty()) continue;
        Quartiles q = quartiles(v);
        std::printf("%-12s %4zu  %-9.4g %-9.4g %-9.4g %-9.4g\n", method.c_str(), v.size(), q.mean,
                    q.q1, q.median, q.q3);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global point cloud registration: Bayesian-optimized ICP initialization"};
    app.require_subcommand(1);

    AlignOptions align_opt;
    CLI::App* align = app.add_subcommand("align", "Register a source cloud to a reference cloud");
    align->add_option("--source", align_opt.source, "source cloud file")->required();
    align->add_option("--reference", align_opt.reference, "reference cloud file")->required();
    align->add_option("--method", align_opt.method, "bo | pyramid | random")
        ->check(CLI::IsMember({"bo", "pyramid", "random"}));
    align->add_option("--preset", align_opt.preset_name, "testing configuration A | B | C")
        ->check(CLI::IsMember({"A", "B", "C"}));
    align->add_option("--mode", align_opt.mode, "nested | full")
        ->check(CLI::IsMember({"nested", "full"}));
    align->add_option("--n-random", align_opt.n_random, "random seed samples (overrides preset)");
    align->add_option("--n-iters", align_opt.n_iterations, "acquisition iterations (overrides preset)");
    align->add_option("--voxel", align_opt.voxel, "downsampling voxel size, meters (overrides preset)");
    align->add_option("--bounds", align_opt.bounds_spec,
                      "six lo:hi pairs: x y z roll pitch yaw")
        ->expected(6);
    align->add_flag("--degrees", align_opt.degrees, "interpret rotation bounds in degrees");
    align->add_option("--seed", align_opt.seed, "random seed");
    align->add_option("--budget", align_opt.budget, "evaluation budget for --method random");
    align->add_option("--max-corr-dist", align_opt.max_corr_dist,
                      "maximum correspondence distance, meters (default: unlimited)");
    align->add_option("--icp-iters", align_opt.icp_iters, "per-evaluation ICP iteration cap");
    align->add_option("--icp-tol", align_opt.icp_tol, "ICP relative objective tolerance");
    align->add_option("--out", align_opt.out, "write the result JSON here");
    align->add_option("--source-format", align_opt.source_format, "ply | pcd | xyz | bin");
    align->add_option("--reference-format", align_opt.reference_format, "ply | pcd | xyz | bin");
    align->add_flag("--recenter", align_opt.recenter,
                    "nested mode: recenter the rotation stage around the best seed");

    BenchOptions bench_opt;
    CLI::App* bench = app.add_subcommand("bench", "Run the benchmark protocol over a cloud sequence");
    bench->add_option("--clouds", bench_opt.clouds_glob, "glob for the ordered cloud files")
        ->required();
    bench->add_option("--poses", bench_opt.poses, "ground-truth pose file (kitti-12 or tum-8)");
    bench->add_option("--pose-format", bench_opt.pose_format, "kitti | tum (default: detect)")
        ->check(CLI::IsMember({"", "kitti", "tum"}));
    bench->add_option("--overlap-threshold", bench_opt.overlap_threshold,
                      "minimum overlap fraction for a pair");
    bench->add_option("--overlap-radius", bench_opt.overlap_radius,
                      "radius for the overlap estimate (default: voxel size)");
    bench->add_option("--methods", bench_opt.methods, "comma list of bo,pyramid,random");
    bench->add_option("--seeds", bench_opt.seeds, "comma list of seeds");
    bench->add_option("--csv", bench_opt.csv, "output CSV path")->required();
    bench->add_option("--preset", bench_opt.align.preset_name, "testing configuration A | B | C")
        ->check(CLI::IsMember({"A", "B", "C"}));
    bench->add_option("--mode", bench_opt.align.mode, "nested | full")
        ->check(CLI::IsMember({"nested", "full"}));
    bench->add_option("--n-random", bench_opt.align.n_random, "random seed samples");
    bench->add_option("--n-iters", bench_opt.align.n_iterations, "acquisition iterations");
    bench->add_option("--voxel", bench_opt.align.voxel, "downsampling voxel size, meters");
    bench->add_option("--budget", bench_opt.align.budget, "random-search budget");
    bench->add_option("--icp-iters", bench_opt.align.icp_iters, "per-evaluation ICP iteration cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (align->parsed()) return run_align(align_opt);
        if (bench->parsed()) return run_bench(bench_opt);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
