// support.hpp
// Shared test utilities: deterministic data generators, partition metrics,
// and independent second implementations (plain nested-vector code) of the
// normalization / k-means / aggregation pipeline used as oracles.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sic/rng.hpp"

namespace testsupport {

using Grid = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Deterministic generators
// ---------------------------------------------------------------------------

inline double normal_draw(sic::SplitRng& rng) {
    // Box-Muller, one value per call; avoids std::normal_distribution so the
    // stream is identical on every platform.
    double u1 = rng.next_unit();
    while (u1 <= 0.0) u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
    sic::SplitRng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * normal_draw(rng);
    return m;
}

struct Blobs {
    Eigen::MatrixXd points;
    std::vector<int> labels;
};

/// n_blobs groups of n_per points: group centers drawn N(0,1) per coordinate,
/// members jittered with noise_sd. Stocks are interleaved across blobs so
/// cluster structure is independent of row order.
inline Blobs make_blobs(int n_blobs, int n_per, int dim, double noise_sd, std::uint64_t seed) {
    sic::SplitRng rng(seed);
    Eigen::MatrixXd centers(n_blobs, dim);
    for (int b = 0; b < n_blobs; ++b)
        for (int s = 0; s < dim; ++s) centers(b, s) = normal_draw(rng);

    Blobs out;
    out.points = Eigen::MatrixXd(n_blobs * n_per, dim);
    out.labels.resize(static_cast<std::size_t>(n_blobs) * static_cast<std::size_t>(n_per));
    for (int i = 0; i < n_blobs * n_per; ++i) {
        const int b = i % n_blobs;
        out.labels[static_cast<std::size_t>(i)] = b;
        for (int s = 0; s < dim; ++s)
            out.points(i, s) = centers(b, s) + noise_sd * normal_draw(rng);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition metrics
// ---------------------------------------------------------------------------

inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::size_t agree = 0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            const bool same_a = a[i] == a[j];
            const bool same_b = b[i] == b[j];
            if (same_a == same_b) ++agree;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    return rand_index(a, b) == 1.0;
}

/// Independent nesting check: every fine-level cluster must map into exactly
/// one coarse-level cluster.
inline bool nested(const std::vector<int>& fine, const std::vector<int>& coarse) {
    std::vector<int> image;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const std::size_t f = static_cast<std::size_t>(fine[i]);
        if (image.size() <= f) image.resize(f + 1, -1);
        if (image[f] == -1)
            image[f] = coarse[i];
        else if (image[f] != coarse[i])
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Oracle: straight second implementation of the clustering pipeline on
// nested vectors. Matches the library contract step for step but shares no
// code with it beyond the seeded generator.
// ---------------------------------------------------------------------------

namespace oracle {

inline Grid to_grid(const Eigen::MatrixXd& m) {
    Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return g;
}

inline double row_sd(const std::vector<double>& row) {
    double sum = 0.0;
    for (double x : row) sum += x;
    const double mean = sum / static_cast<double>(row.size());
    double ss = 0.0;
    for (double x : row) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(row.size() - 1));
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline Grid demean_columns(const Grid& g) {
    Grid out = g;
    const std::size_t n = g.size();
    const std::size_t d = g[0].size();
    for (std::size_t s = 0; s < d; ++s) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += g[i][s];
        const double mean = sum / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out[i][s] = g[i][s] - mean;
    }
    return out;
}

inline Grid normalize(const Grid& g) {
    const std::size_t n = g.size();
    std::vector<double> sd(n), lg(n);
    for (std::size_t i = 0; i < n; ++i) {
        sd[i] = row_sd(g[i]);
        lg[i] = std::log(sd[i]);
    }
    std::vector<double> dev(n);
    const double med = median_of(lg);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::fabs(lg[i] - med);
    const double threshold = med - 3.0 * (1.4826 * median_of(dev));

    Grid out = g;
    for (std::size_t i = 0; i < n; ++i) {
        double u = std::exp(lg[i] - threshold);
        if (u <= 1.0) u = 1.0;
        for (double& x : out[i]) x = x / sd[i] / u;
    }
    return out;
}

struct LloydResult {
    std::vector<int> labels;
    Grid centers;
};

inline double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
        const double diff = a[s] - b[s];
        acc += diff * diff;
    }
    return acc;
}

inline LloydResult lloyd(const Grid& points, int k, int iter_max, std::uint64_t seed) {
    const int n = static_cast<int>(points.size());
    const int d = static_cast<int>(points[0].size());

    sic::SplitRng rng(seed);
    const std::vector<int> pick = sic::sample_without_replacement(n, k, rng);
    Grid centers(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) centers[static_cast<std::size_t>(a)] = points[static_cast<std::size_t>(pick[static_cast<std::size_t>(a)])];

    const auto nearest = [&](int i) {
        int best = 0;
        double best_d = dist2(points[static_cast<std::size_t>(i)], centers[0]);
        for (int a = 1; a < k; ++a) {
            const double da = dist2(points[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(a)]);
            if (da < best_d) {
                best_d = da;
                best = a;
            }
        }
        return best;
    };

    std::vector<int> assign(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = nearest(i);

    for (int iter = 0; iter < iter_max; ++iter) {
        // update (centers of empty clusters stay put)
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        Grid sums(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d), 0.0));
        for (int i = 0; i < n; ++i) {
            const int a = assign[static_cast<std::size_t>(i)];
            ++count[static_cast<std::size_t>(a)];
            for (int s = 0; s < d; ++s)
                sums[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] += points[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
        }
        for (int a = 0; a < k; ++a) {
            if (count[static_cast<std::size_t>(a)] == 0) continue;
            for (int s = 0; s < d; ++s)
                centers[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] =
                    sums[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] / static_cast<double>(count[static_cast<std::size_t>(a)]);
        }
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int a = nearest(i);
            if (a != assign[static_cast<std::size_t>(i)]) {
                assign[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        if (!changed) break;
    }

    // drop empty clusters in center order, recompute means
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (int a : assign) ++count[static_cast<std::size_t>(a)];
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int kept = 0;
    for (int a = 0; a < k; ++a)
        if (count[static_cast<std::size_t>(a)] > 0) remap[static_cast<std::size_t>(a)] = kept++;

    LloydResult out;
    out.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.labels[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];

    out.centers.assign(static_cast<std::size_t>(kept), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    std::vector<int> kc(static_cast<std::size_t>(kept), 0);
    for (int i = 0; i < n; ++i) {
        const int a = out.labels[static_cast<std::size_t>(i)];
        ++kc[static_cast<std::size_t>(a)];
        for (int s = 0; s < d; ++s)
            out.centers[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] += points[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
    }
    for (int a = 0; a < kept; ++a)
        for (int s = 0; s < d; ++s)
            out.centers[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] /= static_cast<double>(kc[static_cast<std::size_t>(a)]);
    return out;
}

struct AggregateResult {
    std::vector<int> vote;   // chosen aligned column per stock
    std::vector<int> labels; // vote compacted in increasing column order
};

inline AggregateResult aggregate(const Eigen::MatrixXd& returns, int k, int iter_max, int num_try,
                                 std::uint64_t seed, bool demean) {
    Grid panel = to_grid(returns);
    if (demean) panel = demean_columns(panel);
    const Grid normed = normalize(panel);
    const int n = static_cast<int>(normed.size());

    std::vector<LloydResult> runs;
    runs.reserve(static_cast<std::size_t>(num_try));
    for (int r = 0; r < num_try; ++r)
        runs.push_back(lloyd(normed, k, iter_max, seed + static_cast<std::uint64_t>(r)));

    AggregateResult out;
    if (num_try == 1) {
        out.vote = runs[0].labels;
        out.labels = runs[0].labels;
        return out;
    }

    Grid stacked;
    for (const auto& run : runs)
        for (const auto& center : run.centers) stacked.push_back(center);

    const LloydResult aligned =
        lloyd(stacked, k, iter_max, seed + static_cast<std::uint64_t>(num_try));
    const int k_al = static_cast<int>(aligned.centers.size());

    std::vector<std::vector<int>> occurrence(static_cast<std::size_t>(n),
                                             std::vector<int>(static_cast<std::size_t>(k_al), 0));
    std::size_t col = 0;
    for (const auto& run : runs) {
        for (int i = 0; i < n; ++i) {
            const int target = aligned.labels[col + static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])];
            occurrence[static_cast<std::size_t>(i)][static_cast<std::size_t>(target)] += 1;
        }
        col += run.centers.size();
    }

    std::vector<long long> totals(static_cast<std::size_t>(k_al), 0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k_al; ++a) totals[static_cast<std::size_t>(a)] += occurrence[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];

    out.vote.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int best = -1;
        for (int a = 0; a < k_al; ++a) best = std::max(best, occurrence[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]);
        long long best_total = -1;
        for (int a = 0; a < k_al; ++a)
            if (occurrence[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] == best)
                best_total = std::max(best_total, totals[static_cast<std::size_t>(a)]);
        for (int a = 0; a < k_al; ++a) {
            if (occurrence[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] == best &&
                totals[static_cast<std::size_t>(a)] == best_total) {
                out.vote[static_cast<std::size_t>(i)] = a;
                break;
            }
        }
    }

    // compact votes in increasing column order
    std::vector<int> remap(static_cast<std::size_t>(k_al), -1);
    for (int v : out.vote) remap[static_cast<std::size_t>(v)] = 0;
    int next = 0;
    for (auto& r : remap)
        if (r == 0) r = next++;
    out.labels.resize(out.vote.size());
    for (std::size_t i = 0; i < out.vote.size(); ++i) out.labels[i] = remap[static_cast<std::size_t>(out.vote[i])];
    return out;
}

} // namespace oracle

} // namespace testsupport
