#include "sic/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

namespace sic {

namespace {

void check_level_counts(const std::vector<int>& k_vec, int n) {
    if (k_vec.empty()) throw DataError("empty cluster-count vector");
    for (std::size_t mu = 0; mu < k_vec.size(); ++mu) {
        if (k_vec[mu] < 1) throw DataError("cluster counts must be positive");
        if (mu > 0 && k_vec[mu] >= k_vec[mu - 1])
            throw DataError("cluster counts must be strictly decreasing across levels");
    }
    if (k_vec[0] > n)
        throw DataError("level-1 cluster count " + std::to_string(k_vec[0]) + " exceeds " +
                        std::to_string(n) + " stocks");
}

std::vector<int> compose_labels(const std::vector<int>& outer, const BinaryClassification& inner) {
    std::vector<int> out(outer.size());
    for (std::size_t i = 0; i < outer.size(); ++i)
        out[i] = inner.label(outer[i]);
    return out;
}

std::vector<std::string> cluster_row_names(int level, int count) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (int a = 0; a < count; ++a)
        names.push_back("level-" + std::to_string(level) + " cluster " + std::to_string(a + 1));
    return names;
}

// Shared scaffold for bottom_up and relaxation_all: per-level engine plus the
// carried within-cluster column sums.
MultilevelClassification multilevel_build(
    const ReturnMatrix& ret, const std::vector<int>& k_vec, const std::vector<bool>& do_demean,
    bool norm_cl_ret,
    const std::function<BinaryClassification(const Eigen::MatrixXd&, int, bool, int,
                                             const std::vector<std::string>*)>& engine) {
    ret.validate();
    check_level_counts(k_vec, ret.num_stocks());
    if (!do_demean.empty() && do_demean.size() != k_vec.size())
        throw DataError("demeaning flags must match the number of levels");

    const int levels = static_cast<int>(k_vec.size());
    Eigen::MatrixXd cur = ret.values;
    std::vector<std::string> cur_ids = ret.stock_ids;

    MultilevelClassification out;
    std::vector<int> stock_labels;
    for (int mu = 0; mu < levels; ++mu) {
        const bool demean = do_demean.empty() ? false : do_demean[static_cast<std::size_t>(mu)];
        const int k_eff = std::min<int>(k_vec[static_cast<std::size_t>(mu)],
                                        static_cast<int>(cur.rows()));
        const BinaryClassification level_map = engine(cur, k_eff, demean, mu, &cur_ids);

        if (mu + 1 < levels) {
            const Eigen::MatrixXd basis = norm_cl_ret ? normalize_returns(cur, &cur_ids) : cur;
            cur = level_map.membership().transpose() * basis;
            cur_ids = cluster_row_names(mu + 2, level_map.num_clusters());
        }

        stock_labels = (mu == 0) ? level_map.labels() : compose_labels(stock_labels, level_map);
        out.levels.emplace_back(stock_labels);
    }
    return out;
}

} // namespace

MultilevelClassification bottom_up(const ReturnMatrix& ret, const std::vector<int>& k_vec,
                                   int iter_max, int num_try, const std::vector<bool>& do_demean,
                                   bool norm_cl_ret, std::uint64_t seed) {
    const std::uint64_t stride = static_cast<std::uint64_t>(num_try) + 1;
    return multilevel_build(
        ret, k_vec, do_demean, norm_cl_ret,
        [&](const Eigen::MatrixXd& values, int k, bool demean, int level,
            const std::vector<std::string>* ids) {
            return aggregate_samplings(values, k, iter_max, num_try,
                                       seed + static_cast<std::uint64_t>(level) * stride, demean,
                                       ids);
        });
}

MultilevelClassification relaxation_all(const ReturnMatrix& ret, const std::vector<int>& k_vec,
                                        const std::vector<bool>& do_demean, bool norm_cl_ret) {
    return multilevel_build(ret, k_vec, do_demean, norm_cl_ret,
                            [](const Eigen::MatrixXd& values, int k, bool demean, int,
                               const std::vector<std::string>* ids) {
                                return relaxation_cluster(values, k, demean, ids);
                            });
}

MultilevelClassification top_down(const ReturnMatrix& ret, const std::vector<int>& levels_rev,
                                  int iter_max, int num_try, std::uint64_t seed) {
    ret.validate();
    if (levels_rev.empty()) throw DataError("empty split-count vector");
    for (int l : levels_rev)
        if (l < 1) throw DataError("split counts must be positive");

    const int n = ret.num_stocks();
    const std::uint64_t stride = static_cast<std::uint64_t>(num_try) + 1;
    std::uint64_t calls = 0;

    std::vector<int> prev(static_cast<std::size_t>(n), 0);
    int prev_k = 1;
    std::vector<BinaryClassification> descending; // least granular first

    for (int split : levels_rev) {
        std::vector<int> next(static_cast<std::size_t>(n), -1);
        int next_k = 0;
        for (int a = 0; a < prev_k; ++a) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (prev[static_cast<std::size_t>(i)] == a) members.push_back(i);
            if (members.empty()) continue;

            if (static_cast<int>(members.size()) <= split) {
                // Too small to split: roll the cluster forward unchanged.
                for (int i : members) next[static_cast<std::size_t>(i)] = next_k;
                ++next_k;
                continue;
            }

            Eigen::MatrixXd sub(static_cast<int>(members.size()), ret.num_obs());
            std::vector<std::string> sub_ids;
            sub_ids.reserve(members.size());
            for (std::size_t j = 0; j < members.size(); ++j) {
                sub.row(static_cast<int>(j)) = ret.values.row(members[j]);
                sub_ids.push_back(ret.stock_ids[static_cast<std::size_t>(members[j])]);
            }
            const BinaryClassification part = aggregate_samplings(
                sub, split, iter_max, num_try, seed + calls * stride, /*demean=*/false, &sub_ids);
            ++calls;
            for (std::size_t j = 0; j < members.size(); ++j)
                next[static_cast<std::size_t>(members[j])] = next_k + part.label(static_cast<int>(j));
            next_k += part.num_clusters();
        }
        prev = std::move(next);
        prev_k = next_k;
        descending.emplace_back(prev);
    }

    MultilevelClassification out;
    out.levels.assign(descending.rbegin(), descending.rend());
    return out;
}

Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& values) {
    const Eigen::MatrixXd gram = values * values.transpose();
    const Eigen::VectorXd diag = gram.diagonal();
    Eigen::MatrixXd dist = (-2.0 * gram).colwise() + diag;
    dist.rowwise() += diag.transpose();
    return dist;
}

BinaryClassification relaxation_cluster(const Eigen::MatrixXd& values, int k, bool demean,
                                        const std::vector<std::string>* ids) {
    const int n = static_cast<int>(values.rows());
    if (k < 1) throw DataError("cluster count must be positive");
    if (n < 2) throw DataError("relaxation clustering needs at least 2 stocks");

    Eigen::MatrixXd panel = demean ? demean_cross_sectionally(values) : values;
    const Eigen::MatrixXd normed = normalize_returns(panel, ids);
    const Eigen::MatrixXd dist = pairwise_squared_distances(normed);

    struct Pair {
        double d;
        int i;
        int j;
        bool operator>(const Pair& o) const {
            if (d != o.d) return d > o.d;
            if (i != o.i) return i > o.i;
            return j > o.j;
        }
    };
    std::priority_queue<Pair, std::vector<Pair>, std::greater<Pair>> heap;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            if (!std::isfinite(d)) throw DataError("non-finite pair distance in relaxation");
            heap.push({d, i, j});
        }
    }

    std::vector<int> cluster(static_cast<std::size_t>(n), -1);
    // Pairs skipped while the cluster budget is exhausted, parked per stock
    // and revived the moment that stock is placed.
    std::vector<std::vector<Pair>> parked(static_cast<std::size_t>(n));
    int formed = 0;
    int placed = 0;

    const auto revive = [&](int stock) {
        for (const Pair& p : parked[static_cast<std::size_t>(stock)]) heap.push(p);
        parked[static_cast<std::size_t>(stock)].clear();
    };

    while (placed < n && !heap.empty()) {
        const Pair p = heap.top();
        heap.pop();
        const bool i_set = cluster[static_cast<std::size_t>(p.i)] >= 0;
        const bool j_set = cluster[static_cast<std::size_t>(p.j)] >= 0;
        if (i_set && j_set) continue;
        if (!i_set && !j_set) {
            if (formed < k) {
                cluster[static_cast<std::size_t>(p.i)] = formed;
                cluster[static_cast<std::size_t>(p.j)] = formed;
                ++formed;
                placed += 2;
                revive(p.i);
                revive(p.j);
            } else {
                parked[static_cast<std::size_t>(p.i)].push_back(p);
                parked[static_cast<std::size_t>(p.j)].push_back(p);
            }
            continue;
        }
        const int target = i_set ? p.j : p.i;
        const int source = i_set ? p.i : p.j;
        cluster[static_cast<std::size_t>(target)] = cluster[static_cast<std::size_t>(source)];
        ++placed;
        revive(target);
    }
    if (placed < n) throw NumericalError("relaxation clustering failed to place every stock");

    return BinaryClassification(cluster);
}

BinaryClassification relaxation_cluster(const ReturnMatrix& ret, int k, bool demean) {
    ret.validate();
    return relaxation_cluster(ret.values, k, demean, &ret.stock_ids);
}

} // namespace sic
