#include "sic/kmeans.hpp"

#include <cmath>
#include <thread>

#include "sic/rng.hpp"

namespace sic {

namespace {

// Squared Euclidean distance between row i of a and row c of b, accumulated
// left to right. Keeping the kernels as plain ordered loops makes runs
// reproducible down to the last bit regardless of vectorization settings.
double row_distance2(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b, int c) {
    double acc = 0.0;
    for (int s = 0; s < a.cols(); ++s) {
        const double diff = a(i, s) - b(c, s);
        acc += diff * diff;
    }
    return acc;
}

int nearest_center(const Eigen::MatrixXd& points, int i, const Eigen::MatrixXd& centers) {
    int best = 0;
    double best_dist = row_distance2(points, i, centers, 0);
    for (int c = 1; c < centers.rows(); ++c) {
        const double dist = row_distance2(points, i, centers, c);
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

double objective_of(const Eigen::MatrixXd& points, const std::vector<int>& assign,
                    const Eigen::MatrixXd& centers) {
    double g = 0.0;
    for (int i = 0; i < points.rows(); ++i)
        g += row_distance2(points, i, centers, assign[static_cast<std::size_t>(i)]);
    return g;
}

void update_centers(const Eigen::MatrixXd& points, const std::vector<int>& assign, int k,
                    Eigen::MatrixXd& centers) {
    const int d = static_cast<int>(points.cols());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < points.rows(); ++i) {
        const int a = assign[static_cast<std::size_t>(i)];
        ++counts[static_cast<std::size_t>(a)];
        for (int s = 0; s < d; ++s) sums(a, s) += points(i, s);
    }
    for (int a = 0; a < k; ++a) {
        if (counts[static_cast<std::size_t>(a)] == 0) continue; // stale center kept
        for (int s = 0; s < d; ++s)
            centers(a, s) = sums(a, s) / static_cast<double>(counts[static_cast<std::size_t>(a)]);
    }
}

} // namespace

Eigen::MatrixXd ClusterAssignment::membership() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<int>(labels.size()), num_clusters());
    for (std::size_t i = 0; i < labels.size(); ++i)
        m(static_cast<int>(i), labels[i]) = 1.0;
    return m;
}

ClusterAssignment kmeans_cluster(const Eigen::MatrixXd& points, int k, int iter_max,
                                 std::uint64_t seed) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (k < 1) throw DataError("cluster count must be positive");
    if (k > n)
        throw DataError("cluster count " + std::to_string(k) + " exceeds " + std::to_string(n) +
                        " observations");
    if (iter_max < 1) throw DataError("iter_max must be at least 1");
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < d; ++s)
            if (!std::isfinite(points(i, s))) throw DataError("non-finite value in clustering input");

    SplitRng rng(seed);
    const std::vector<int> start = sample_without_replacement(n, k, rng);
    Eigen::MatrixXd centers(k, d);
    for (int a = 0; a < k; ++a) centers.row(a) = points.row(start[static_cast<std::size_t>(a)]);

    std::vector<int> assign(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = nearest_center(points, i, centers);

    ClusterAssignment result;
    result.objective_trace.push_back(objective_of(points, assign, centers));

    for (int iter = 0; iter < iter_max; ++iter) {
        update_centers(points, assign, k, centers);
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int a = nearest_center(points, i, centers);
            if (a != assign[static_cast<std::size_t>(i)]) {
                assign[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        result.objective_trace.push_back(objective_of(points, assign, centers));
        if (!changed) break;
    }

    // Drop empty clusters, renumbering in center-index order, and recompute
    // centers so each row is exactly its members' mean.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assign) ++counts[static_cast<std::size_t>(a)];
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int kept = 0;
    for (int a = 0; a < k; ++a)
        if (counts[static_cast<std::size_t>(a)] > 0) remap[static_cast<std::size_t>(a)] = kept++;

    result.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        result.labels[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];

    result.centers = Eigen::MatrixXd::Zero(kept, d);
    update_centers(points, result.labels, kept, result.centers);
    result.objective = objective_of(points, result.labels, result.centers);
    return result;
}

namespace detail {

AggregationResult aggregate_with_state(const Eigen::MatrixXd& returns, int k, int iter_max,
                                       int num_try, std::uint64_t seed, bool demean,
                                       const std::vector<std::string>* ids) {
    if (num_try < 1) throw DataError("num_try must be at least 1");
    const int n = static_cast<int>(returns.rows());

    Eigen::MatrixXd panel = demean ? demean_cross_sectionally(returns) : returns;
    const Eigen::MatrixXd normed = normalize_returns(panel, ids);

    std::vector<ClusterAssignment> runs(static_cast<std::size_t>(num_try));
    const auto run_range = [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r)
            runs[static_cast<std::size_t>(r)] =
                kmeans_cluster(normed, k, iter_max, seed + static_cast<std::uint64_t>(r));
    };
    const unsigned hw = std::thread::hardware_concurrency();
    if (num_try >= 8 && hw > 1 && n >= 40) {
        const int workers = static_cast<int>(std::min<unsigned>(hw, 8));
        std::vector<std::thread> pool;
        const int chunk = (num_try + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * chunk;
            const int hi = std::min(num_try, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    } else {
        run_range(0, num_try);
    }

    AggregationResult out;
    if (num_try == 1) {
        out.classification = BinaryClassification(runs[0].labels);
        out.state.occurrence = Eigen::MatrixXi::Zero(n, out.classification.num_clusters());
        for (int i = 0; i < n; ++i) out.state.occurrence(i, out.classification.label(i)) = 1;
        out.state.column_totals = out.state.occurrence.colwise().sum();
        out.state.vote = out.classification.labels();
        return out;
    }

    int total_centers = 0;
    for (const auto& run : runs) total_centers += run.num_clusters();
    Eigen::MatrixXd stacked(total_centers, returns.cols());
    int row = 0;
    for (const auto& run : runs) {
        stacked.middleRows(row, run.num_clusters()) = run.centers;
        row += run.num_clusters();
    }

    const ClusterAssignment aligned =
        kmeans_cluster(stacked, k, iter_max, seed + static_cast<std::uint64_t>(num_try));
    const int k_aligned = aligned.num_clusters();

    Eigen::MatrixXi occurrence = Eigen::MatrixXi::Zero(n, k_aligned);
    int col = 0;
    for (const auto& run : runs) {
        for (std::size_t i = 0; i < run.labels.size(); ++i) {
            const int target = aligned.labels[static_cast<std::size_t>(col) + static_cast<std::size_t>(run.labels[i])];
            occurrence(static_cast<int>(i), target) += 1;
        }
        col += run.num_clusters();
    }

    const Eigen::VectorXi totals = occurrence.colwise().sum();
    std::vector<int> vote(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int best_count = -1;
        for (int a = 0; a < k_aligned; ++a) best_count = std::max(best_count, occurrence(i, a));
        int best_total = -1;
        for (int a = 0; a < k_aligned; ++a)
            if (occurrence(i, a) == best_count) best_total = std::max(best_total, totals(a));
        int chosen = -1;
        for (int a = 0; a < k_aligned; ++a) {
            if (occurrence(i, a) == best_count && totals(a) == best_total) {
                chosen = a;
                break;
            }
        }
        vote[static_cast<std::size_t>(i)] = chosen;
    }

    out.classification = BinaryClassification(vote);
    out.state.occurrence = std::move(occurrence);
    out.state.column_totals = totals;
    out.state.vote = std::move(vote);
    return out;
}

} // namespace detail

BinaryClassification aggregate_samplings(const Eigen::MatrixXd& returns, int k, int iter_max,
                                         int num_try, std::uint64_t seed, bool demean,
                                         const std::vector<std::string>* ids) {
    return detail::aggregate_with_state(returns, k, iter_max, num_try, seed, demean, ids)
        .classification;
}

BinaryClassification aggregate_samplings(const ReturnMatrix& ret, int k, int iter_max, int num_try,
                                         std::uint64_t seed, bool demean) {
    return aggregate_samplings(ret.values, k, iter_max, num_try, seed, demean, &ret.stock_ids);
}

} // namespace sic
