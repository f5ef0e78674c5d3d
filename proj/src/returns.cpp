#include "sic/returns.hpp"

#include <algorithm>
#include <cmath>

namespace sic {

namespace {

std::string row_name(const std::vector<std::string>* ids, int i) {
    if (ids != nullptr && i < static_cast<int>(ids->size())) return (*ids)[static_cast<std::size_t>(i)];
    return "row " + std::to_string(i + 1);
}

} // namespace

ReturnMatrix::ReturnMatrix(Eigen::MatrixXd v) : values(std::move(v)) {
    stock_ids.reserve(static_cast<std::size_t>(values.rows()));
    for (int i = 0; i < values.rows(); ++i) stock_ids.push_back("S" + std::to_string(i + 1));
    dates.reserve(static_cast<std::size_t>(values.cols()));
    for (int s = 0; s < values.cols(); ++s) dates.push_back("D" + std::to_string(s + 1));
}

void ReturnMatrix::validate() const {
    if (values.rows() < 2 || values.cols() < 2)
        throw DataError("return panel must be at least 2x2, got " + std::to_string(values.rows()) +
                        "x" + std::to_string(values.cols()));
    if (static_cast<int>(stock_ids.size()) != values.rows())
        throw DataError("stock id count does not match row count");
    if (static_cast<int>(dates.size()) != values.cols())
        throw DataError("date label count does not match column count");
    for (int i = 0; i < values.rows(); ++i)
        for (int s = 0; s < values.cols(); ++s)
            if (!std::isfinite(values(i, s)))
                throw DataError("non-finite return for " + stock_ids[static_cast<std::size_t>(i)] +
                                " at " + dates[static_cast<std::size_t>(s)]);
    compute_row_stats(values, &stock_ids); // throws on zero-variance rows
}

Eigen::VectorXd row_variances(const Eigen::MatrixXd& values) {
    const int n = static_cast<int>(values.rows());
    const int d = static_cast<int>(values.cols());
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int s = 0; s < d; ++s) sum += values(i, s);
        const double mean = sum / static_cast<double>(d);
        double ss = 0.0;
        for (int s = 0; s < d; ++s) {
            const double dev = values(i, s) - mean;
            ss += dev * dev;
        }
        out(i) = ss / static_cast<double>(d - 1);
    }
    return out;
}

Eigen::VectorXd row_stddevs(const Eigen::MatrixXd& values) {
    Eigen::VectorXd var = row_variances(values);
    for (int i = 0; i < var.size(); ++i) var(i) = std::sqrt(var(i));
    return var;
}

double median(std::vector<double> values) {
    if (values.empty()) throw DataError("median of empty vector");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mad(const std::vector<double>& values) {
    const double med = median(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::fabs(values[i] - med);
    return 1.4826 * median(dev);
}

RowStats compute_row_stats(const Eigen::MatrixXd& values, const std::vector<std::string>* ids) {
    const int n = static_cast<int>(values.rows());
    RowStats stats;
    stats.sigma = row_stddevs(values);
    for (int i = 0; i < n; ++i) {
        if (!(stats.sigma(i) > 0.0))
            throw DataError("degenerate row variance: " + row_name(ids, i));
    }

    std::vector<double> log_sigma(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) log_sigma[static_cast<std::size_t>(i)] = std::log(stats.sigma(i));
    const double threshold = median(log_sigma) - 3.0 * mad(log_sigma);
    stats.v = std::exp(threshold);

    stats.u = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
        const double u = std::exp(log_sigma[static_cast<std::size_t>(i)] - threshold);
        stats.u(i) = u > 1.0 ? u : 1.0;
    }
    return stats;
}

Eigen::MatrixXd normalize_returns(const Eigen::MatrixXd& values, const std::vector<std::string>* ids) {
    const RowStats stats = compute_row_stats(values, ids);
    Eigen::MatrixXd out(values.rows(), values.cols());
    for (int i = 0; i < values.rows(); ++i)
        for (int s = 0; s < values.cols(); ++s)
            out(i, s) = values(i, s) / stats.sigma(i) / stats.u(i);
    return out;
}

ReturnMatrix normalize_returns(const ReturnMatrix& ret) {
    return ReturnMatrix(normalize_returns(ret.values, &ret.stock_ids), ret.stock_ids, ret.dates);
}

Eigen::MatrixXd demean_cross_sectionally(const Eigen::MatrixXd& values) {
    const int n = static_cast<int>(values.rows());
    const int d = static_cast<int>(values.cols());
    Eigen::MatrixXd out(n, d);
    for (int s = 0; s < d; ++s) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += values(i, s);
        const double mean = sum / static_cast<double>(n);
        for (int i = 0; i < n; ++i) out(i, s) = values(i, s) - mean;
    }
    return out;
}

ReturnMatrix demean_cross_sectionally(const ReturnMatrix& ret) {
    return ReturnMatrix(demean_cross_sectionally(ret.values), ret.stock_ids, ret.dates);
}

} // namespace sic
