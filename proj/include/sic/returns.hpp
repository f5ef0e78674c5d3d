// returns.hpp
// Return-panel container, volatility-normalization and cross-sectional
// demeaning of stock returns.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sic/types.hpp"

namespace sic {

/// N x d panel of per-stock log-returns. Rows are stocks, columns are
/// observation dates with column 0 the most recent.
struct ReturnMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> stock_ids;
    std::vector<std::string> dates;

    ReturnMatrix() = default;
    ReturnMatrix(Eigen::MatrixXd v, std::vector<std::string> ids, std::vector<std::string> dts)
        : values(std::move(v)), stock_ids(std::move(ids)), dates(std::move(dts)) {}

    /// Convenience constructor for synthetic panels: ids/dates filled as S1..SN / D1..Dd.
    explicit ReturnMatrix(Eigen::MatrixXd v);

    int num_stocks() const { return static_cast<int>(values.rows()); }
    int num_obs() const { return static_cast<int>(values.cols()); }

    /// Enforces the panel invariants: at least 2x2, labels consistent with the
    /// matrix shape, all entries finite, every row with strictly positive
    /// serial standard deviation. Throws DataError otherwise.
    void validate() const;
};

/// Per-row volatility statistics backing the normalization.
///   sigma : serial standard deviations (sample, d-1 denominator)
///   u     : clamped normalizers, u_i = max(sigma_i / v, 1)
///   v     : cross-sectional low-volatility threshold
struct RowStats {
    Eigen::VectorXd sigma;
    Eigen::VectorXd u;
    double v = 0.0;
};

/// Serial (per-row) variance with d-1 denominator.
Eigen::VectorXd row_variances(const Eigen::MatrixXd& values);

/// Serial (per-row) standard deviation.
Eigen::VectorXd row_stddevs(const Eigen::MatrixXd& values);

/// Computes sigma, u and v for a panel. The threshold is
///   v = exp(median(ln sigma) - 3 * MAD(ln sigma))
/// with MAD the scaled median absolute deviation (constant 1.4826) and both
/// statistics taken across rows. Rows with sigma == 0 raise DataError naming
/// the stock (ids optional, indices used when absent).
RowStats compute_row_stats(const Eigen::MatrixXd& values,
                           const std::vector<std::string>* ids = nullptr);

/// Volatility-normalized returns: out(i,s) = values(i,s) / sigma_i / u_i.
/// Rows at or below the threshold keep plain 1/sigma scaling (u_i = 1); more
/// volatile rows are damped by the extra sigma_i / v factor.
Eigen::MatrixXd normalize_returns(const Eigen::MatrixXd& values,
                                  const std::vector<std::string>* ids = nullptr);
ReturnMatrix normalize_returns(const ReturnMatrix& ret);

/// Subtracts each column's cross-sectional mean. Idempotent.
Eigen::MatrixXd demean_cross_sectionally(const Eigen::MatrixXd& values);
ReturnMatrix demean_cross_sectionally(const ReturnMatrix& ret);

/// Cross-sectional median (exact middle for odd n, midpoint average for even).
double median(std::vector<double> values);

/// Scaled median absolute deviation, 1.4826 * median(|x - median(x)|).
double mad(const std::vector<double>& values);

} // namespace sic
