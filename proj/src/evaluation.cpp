#include "boicp/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "boicp/kdtree.hpp"

namespace boicp {

namespace {

double directed_overlap(const PointCloud& from, const KdTree& to_index, double radius) {
    long hits = 0;
    for (const auto& p : from.points)
        if (to_index.nearest(p).distance <= radius) ++hits;
    return static_cast<double>(hits) / static_cast<double>(from.size());
}

// Lentz's continued fraction for the incomplete beta function.
double beta_continued_fraction(double x, double a, double b) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(x <= 1.0))
        throw std::invalid_argument("regularized_incomplete_beta: need a,b > 0 and x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double log_front = a * std::log(x) + b * std::log1p(-x) -
                       (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b))) *
                     beta_continued_fraction(1.0 - x, b, a) / b;
}

double overlap_fraction(const PointCloud& a, const PointCloud& b, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("overlap_fraction: radius must be > 0");
    if (a.empty() || b.empty()) throw std::invalid_argument("overlap_fraction: empty cloud");
    PointCloud a_ds = voxel_downsample(a, radius);
    PointCloud b_ds = voxel_downsample(b, radius);
    KdTree a_index(a_ds);
    KdTree b_index(b_ds);
    return std::min(directed_overlap(a_ds, b_index, radius), directed_overlap(b_ds, a_index, radius));
}

std::vector<PairSpec> select_pairs(const std::vector<PointCloud>& sequence, double threshold,
                                   double overlap_radius, const std::vector<RigidTransform>* poses) {
    if (sequence.size() < 2) throw std::invalid_argument("select_pairs: need at least 2 clouds");
    if (poses && poses->size() != sequence.size())
        throw std::invalid_argument("select_pairs: pose count must match cloud count");

    auto make_pair = [&](int ref, int target) {
        PairSpec p;
        p.ref_id = ref;
        p.target_id = target;
        p.overlap = overlap_fraction(sequence[ref], sequence[target], overlap_radius);
        if (poses) p.gt = (*poses)[ref].inverse().compose((*poses)[target]);
        return p;
    };

    std::vector<PairSpec> pairs;
    int ref = 0;
    int j = ref + 1;
    const int n = static_cast<int>(sequence.size());
    while (j < n) {
        double ov = overlap_fraction(sequence[ref], sequence[j], overlap_radius);
        if (ov >= threshold) {
            ++j;
        } else {
            int target = std::max(j - 1, ref + 1);  // last qualifying cloud, at least one step
            pairs.push_back(make_pair(ref, target));
            ref = target;
            j = ref + 1;
        }
    }
    if (ref < n - 1) pairs.push_back(make_pair(ref, n - 1));
    return pairs;
}

WelchAnovaResult welch_anova(std::span<const std::vector<double>> groups) {
    const int k = static_cast<int>(groups.size());
    if (k < 2) throw std::invalid_argument("welch_anova: need at least 2 groups");

    std::vector<double> n(k), mean(k), var(k);
    for (int g = 0; g < k; ++g) {
        const auto& samples = groups[g];
        if (samples.size() < 2)
            throw std::invalid_argument("welch_anova: every group needs at least 2 samples");
        n[g] = static_cast<double>(samples.size());
        double m = 0.0;
        for (double v : samples) m += v;
        m /= n[g];
        double s2 = 0.0;
        for (double v : samples) s2 += (v - m) * (v - m);
        s2 /= (n[g] - 1.0);
        if (!(s2 > 0.0)) throw std::invalid_argument("welch_anova: group has zero variance");
        mean[g] = m;
        var[g] = s2;
    }

    double w_total = 0.0, weighted_mean = 0.0;
    std::vector<double> w(k);
    for (int g = 0; g < k; ++g) {
        w[g] = n[g] / var[g];
        w_total += w[g];
        weighted_mean += w[g] * mean[g];
    }
    weighted_mean /= w_total;

    double between = 0.0;
    for (int g = 0; g < k; ++g) between += w[g] * (mean[g] - weighted_mean) * (mean[g] - weighted_mean);
    between /= (k - 1.0);

    double h = 0.0;
    for (int g = 0; g < k; ++g) {
        double r = 1.0 - w[g] / w_total;
        h += r * r / (n[g] - 1.0);
    }
    double denom = 1.0 + 2.0 * (k - 2.0) / (static_cast<double>(k) * k - 1.0) * h;

    WelchAnovaResult result;
    result.f_value = between / denom;
    result.df1 = k - 1.0;
    result.df2 = (static_cast<double>(k) * k - 1.0) / (3.0 * h);
    // Survival function of the F distribution via the incomplete beta.
    result.p_value = regularized_incomplete_beta(
        result.df2 / (result.df2 + result.df1 * result.f_value), result.df2 / 2.0, result.df1 / 2.0);
    return result;
}

double mean_p2p_distance(const PointCloud& source, const PointCloud& reference,
                         const RigidTransform& t) {
    if (source.empty() || reference.empty())
        throw std::invalid_argument("mean_p2p_distance: empty cloud");
    KdTree index(reference);
    double sum = 0.0;
    for (const auto& p : source.points) sum += index.nearest(t.apply(p)).distance;
    return sum / static_cast<double>(source.size());
}

}  // namespace boicp
