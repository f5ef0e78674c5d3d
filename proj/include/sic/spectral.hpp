// spectral.hpp
// Eigen-analysis of the sample correlation matrix, effective rank, dynamic
// cluster-count selection and the statistical (PCA) risk model.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sic/classification.hpp"
#include "sic/returns.hpp"

namespace sic {

/// Strictly positive eigenpairs of a correlation matrix, descending.
/// `vectors` columns are the matching orthonormal eigenvectors (length N).
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    int count() const { return static_cast<int>(values.size()); }
};

/// Sample correlation matrix of the panel rows (rows sigma-normalized, then
/// demeaned, Gram divided by d-1).
Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& values);

/// Positive eigenpairs of the sample correlation matrix. When d-1 <= N the
/// spectrum is computed from the d x d Gram of the demeaned normalized series
/// and mapped back to stock space, which is much cheaper than the N x N
/// problem; otherwise the N x N matrix is decomposed directly. Eigenvalues
/// below 1e-12 of the largest are treated as numerically zero.
EigenSystem correlation_eigen(const Eigen::MatrixXd& values,
                              const std::vector<std::string>* ids = nullptr);
EigenSystem correlation_eigen(const ReturnMatrix& ret);

/// Effective rank: exp of the Shannon entropy of the normalized eigenvalue
/// distribution. Values below 1e-12 of the largest are dropped first; the
/// result lies in [1, count of retained values]. Throws DataError when no
/// positive value remains.
double erank(const Eigen::VectorXd& eigenvalues);

/// Level cluster counts, log-equidistant between K_1 = Round(N/(d-1)) and
/// K_P = Round(erank_value). Degenerate inputs collapse: K_1 < K_P drops to a
/// single level, a trailing count of 1 is removed, and K_1 is floored at 1.
std::vector<int> dynamic_cluster_numbers(int num_stocks, int num_obs, double erank_value,
                                         int levels);

/// Per-level split counts for the top-down builder: Round(K_mu / K_{mu+1})
/// with K_{P+1} = 1, reversed to least-granular-first order. k_vec must be
/// strictly decreasing.
std::vector<int> derive_topdown_counts(const std::vector<int>& k_vec);

/// Dynamic multilevel classification: cluster counts from the panel's eRank,
/// then bottom_up (demeaning every level except the first) or, when top_down
/// is set, the top-down builder on the derived split counts.
MultilevelClassification classify_dynamic(const ReturnMatrix& ret, int levels, int iter_max,
                                          int num_try, bool top_down, std::uint64_t seed);

/// Factor risk model. gamma = diag(specific_variance) + L * L' with L the
/// scaled loadings; assembled once at construction.
struct RiskModel {
    Eigen::VectorXd specific_variance;
    Eigen::MatrixXd factor_loadings;
    Eigen::MatrixXd gamma;

    int size() const { return static_cast<int>(gamma.rows()); }
};

inline constexpr int kAutoFactors = -1;

/// Statistical risk model on the correlation scale: the top F eigenpairs of
/// the sample correlation matrix plus the diagonal completion that restores
/// unit variance, Gamma_ij = xi_i^2 delta_ij + sum_a lambda_a V_i V_j.
/// factors == kAutoFactors picks F = Round(eRank) (floor_factors switches the
/// rounding to floor). F is clamped to the available positive eigenpairs;
/// explicit F outside [1, d-1] raises DataError.
RiskModel statistical_risk_model(const Eigen::MatrixXd& values, int factors = kAutoFactors,
                                 bool floor_factors = false,
                                 const std::vector<std::string>* ids = nullptr);
RiskModel statistical_risk_model(const ReturnMatrix& ret, int factors = kAutoFactors,
                                 bool floor_factors = false);

} // namespace sic
