// kmeans.hpp
// Lloyd k-means with seeded Forgy initialization and aggregation of many
// independent samplings into a single consensus partition.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sic/classification.hpp"
#include "sic/returns.hpp"

namespace sic {

/// Result of one k-means run. Cluster ids are 0-based and compacted in
/// center-index order after empty clusters are dropped, so `centers` row a is
/// exactly the mean of the rows assigned label a.
struct ClusterAssignment {
    std::vector<int> labels;
    Eigen::MatrixXd centers;
    double objective = 0.0;
    std::vector<double> objective_trace; // within-cluster SSQ after every update/assign round

    int num_clusters() const { return static_cast<int>(centers.rows()); }
    Eigen::MatrixXd membership() const;
};

/// Lloyd iteration on the rows of `points`:
///   - initial centers are k distinct rows picked by a partial Fisher-Yates
///     shuffle driven by SplitRng(seed) (k bounded draws);
///   - each row joins the nearest center by squared Euclidean distance, ties
///     to the lowest center index;
///   - centers are recomputed as member means; a center that loses all its
///     members keeps its previous position;
///   - stops when no assignment changes or after iter_max update rounds;
///     empty clusters are dropped from the output only.
/// Throws DataError for k out of range or non-finite input.
ClusterAssignment kmeans_cluster(const Eigen::MatrixXd& points, int k, int iter_max,
                                 std::uint64_t seed);

/// Occurrence bookkeeping from aggregating M samplings: occurrence(i,a)
/// counts how often stock i landed in aligned cluster a, column_totals are
/// its column sums, vote is the chosen column per stock before relabeling.
struct AggregationState {
    Eigen::MatrixXi occurrence;
    Eigen::VectorXi column_totals;
    std::vector<int> vote;
};

/// Consensus classification from num_try independent k-means samplings of the
/// volatility-normalized panel:
///   1. optionally demean the panel cross-sectionally, then normalize;
///   2. run kmeans_cluster with seeds seed, seed+1, ..., seed+num_try-1
///      (num_try == 1 returns that single partition directly);
///   3. stack all run centers by row and k-means the stack into k clusters
///      (seed seed+num_try) to align cluster ids across runs;
///   4. accumulate occurrence counts and assign each stock to its
///      most-frequent aligned cluster, ties broken by largest column total,
///      then lowest column index;
///   5. drop empty columns.
/// The output can have fewer than k clusters. Deterministic in all inputs.
BinaryClassification aggregate_samplings(const Eigen::MatrixXd& returns, int k, int iter_max,
                                         int num_try, std::uint64_t seed, bool demean,
                                         const std::vector<std::string>* ids = nullptr);
BinaryClassification aggregate_samplings(const ReturnMatrix& ret, int k, int iter_max,
                                         int num_try, std::uint64_t seed, bool demean);

namespace detail {

/// aggregate_samplings plus the intermediate occurrence state; used by tests
/// that pin the voting procedure down to exact counts.
struct AggregationResult {
    BinaryClassification classification;
    AggregationState state;
};
AggregationResult aggregate_with_state(const Eigen::MatrixXd& returns, int k, int iter_max,
                                       int num_try, std::uint64_t seed, bool demean,
                                       const std::vector<std::string>* ids = nullptr);

} // namespace detail

} // namespace sic
