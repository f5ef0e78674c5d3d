// hierarchy.hpp
// Multilevel classification builders: bottom-up cluster-of-clusters,
// recursive top-down splitting, and a deterministic relaxation scheme.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sic/classification.hpp"
#include "sic/kmeans.hpp"
#include "sic/returns.hpp"

namespace sic {

/// Bottom-up multilevel build. Level 1 aggregates the stock panel into
/// k_vec[0] clusters; every later level clusters the within-cluster column
/// sums of the previous level's input (sums of normalized returns when
/// norm_cl_ret is set). do_demean[mu] demeans that level's clustering input
/// only; the carried sums stay undemeaned. Stock-level membership at level mu
/// is the composition of the level maps. k_vec must be strictly decreasing
/// with k_vec[0] <= N; a level whose input has fewer rows than its target is
/// capped at that row count. Level mu draws seeds from
/// seed + mu*(num_try+1) following the aggregate_samplings schedule.
MultilevelClassification bottom_up(const ReturnMatrix& ret, const std::vector<int>& k_vec,
                                   int iter_max, int num_try, const std::vector<bool>& do_demean,
                                   bool norm_cl_ret, std::uint64_t seed);

/// Top-down multilevel build. levels_rev lists per-level split counts from
/// the least granular level down (the whole universe is first clustered into
/// levels_rev[0] clusters, each of those into levels_rev[1], ...). Each
/// subset is re-normalized by the aggregation itself; clusters with at most
/// as many stocks as the split count roll forward unchanged; no demeaning at
/// any level. Output levels are ordered most granular first. Every
/// sub-clustering call consumes num_try+1 seeds from a running schedule
/// starting at seed.
MultilevelClassification top_down(const ReturnMatrix& ret, const std::vector<int>& levels_rev,
                                  int iter_max, int num_try, std::uint64_t seed);

/// Deterministic relaxation clustering of the volatility-normalized rows.
/// All row pairs are processed in ascending squared-distance order (ties by
/// index): a both-unassigned pair founds a new cluster while fewer than k
/// exist, a half-assigned pair attaches the free stock, and once k clusters
/// exist both-unassigned pairs wait until one member is placed. Output has
/// min(k, clusters formed) clusters labeled in founding order.
BinaryClassification relaxation_cluster(const Eigen::MatrixXd& values, int k, bool demean,
                                        const std::vector<std::string>* ids = nullptr);
BinaryClassification relaxation_cluster(const ReturnMatrix& ret, int k, bool demean);

/// Multilevel variant of relaxation_cluster with the bottom_up carrying
/// scheme (within-cluster column sums between levels).
MultilevelClassification relaxation_all(const ReturnMatrix& ret, const std::vector<int>& k_vec,
                                        const std::vector<bool>& do_demean, bool norm_cl_ret);

/// Pairwise squared Euclidean distances between rows, via the Gram identity
/// D = diag*1' + 1*diag' - 2*X*X'.
Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& values);

} // namespace sic
