#include "sic/spectral.hpp"

#include <cmath>

#include "sic/hierarchy.hpp"

namespace sic {

namespace {

constexpr double kEigenCutoff = 1e-12;

long long round_positive(double x) { return std::llround(x); }

// Rows sigma-normalized and demeaned; correlation = X X' / (d-1).
Eigen::MatrixXd normalized_demeaned(const Eigen::MatrixXd& values,
                                    const std::vector<std::string>* ids) {
    const Eigen::VectorXd sd = row_stddevs(values);
    for (int i = 0; i < sd.size(); ++i)
        if (!(sd(i) > 0.0))
            throw DataError("degenerate row variance: " +
                            (ids != nullptr && i < static_cast<int>(ids->size())
                                 ? (*ids)[static_cast<std::size_t>(i)]
                                 : "row " + std::to_string(i + 1)));
    Eigen::MatrixXd x = values.array().colwise() / sd.array();
    const Eigen::VectorXd means = x.rowwise().mean();
    x.colwise() -= means;
    return x;
}

EigenSystem keep_positive_descending(const Eigen::VectorXd& ascending_values,
                                     const Eigen::MatrixXd& ascending_vectors) {
    const int total = static_cast<int>(ascending_values.size());
    const double largest = ascending_values(total - 1);
    const double cutoff = largest * kEigenCutoff;

    int kept = 0;
    for (int a = 0; a < total; ++a)
        if (ascending_values(a) > cutoff) ++kept;
    if (kept == 0 || !(largest > 0.0)) throw DataError("correlation matrix has no positive eigenvalues");

    EigenSystem out;
    out.values = Eigen::VectorXd(kept);
    out.vectors = Eigen::MatrixXd(ascending_vectors.rows(), kept);
    for (int a = 0; a < kept; ++a) {
        const int src = total - 1 - a;
        out.values(a) = ascending_values(src);
        out.vectors.col(a) = ascending_vectors.col(src);
    }
    return out;
}

} // namespace

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& values) {
    const Eigen::MatrixXd x = normalized_demeaned(values, nullptr);
    return (x * x.transpose()) / static_cast<double>(values.cols() - 1);
}

EigenSystem correlation_eigen(const Eigen::MatrixXd& values, const std::vector<std::string>* ids) {
    const int n = static_cast<int>(values.rows());
    const int d = static_cast<int>(values.cols());
    if (n < 2 || d < 2) throw DataError("correlation eigen needs at least a 2x2 panel");

    const Eigen::MatrixXd x = normalized_demeaned(values, ids);

    if (d - 1 <= n) {
        // Spectrum of X X'/(d-1) from the small Gram matrix X'X/(d-1): a
        // positive pair (lambda, u) maps to the stock-space eigenvector
        // X u / sqrt(lambda (d-1)), orthonormal by construction.
        const Eigen::MatrixXd gram = (x.transpose() * x) / static_cast<double>(d - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        const Eigen::VectorXd vals = solver.eigenvalues();
        const double cutoff = vals(vals.size() - 1) * kEigenCutoff;
        if (!(vals(vals.size() - 1) > 0.0))
            throw DataError("correlation matrix has no positive eigenvalues");

        int kept = 0;
        for (int a = 0; a < vals.size(); ++a)
            if (vals(a) > cutoff) ++kept;

        EigenSystem out;
        out.values = Eigen::VectorXd(kept);
        out.vectors = Eigen::MatrixXd(n, kept);
        for (int a = 0; a < kept; ++a) {
            const int src = static_cast<int>(vals.size()) - 1 - a;
            const double lambda = vals(src);
            out.values(a) = lambda;
            out.vectors.col(a) =
                x * solver.eigenvectors().col(src) / std::sqrt(lambda * static_cast<double>(d - 1));
        }
        return out;
    }

    const Eigen::MatrixXd psi = (x * x.transpose()) / static_cast<double>(d - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(psi);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    return keep_positive_descending(solver.eigenvalues(), solver.eigenvectors());
}

EigenSystem correlation_eigen(const ReturnMatrix& ret) {
    return correlation_eigen(ret.values, &ret.stock_ids);
}

double erank(const Eigen::VectorXd& eigenvalues) {
    if (eigenvalues.size() == 0) throw DataError("erank of empty spectrum");
    double largest = 0.0;
    for (int a = 0; a < eigenvalues.size(); ++a) largest = std::max(largest, eigenvalues(a));
    if (!(largest > 0.0)) throw DataError("erank needs at least one positive eigenvalue");
    const double cutoff = largest * kEigenCutoff;

    double total = 0.0;
    for (int a = 0; a < eigenvalues.size(); ++a)
        if (eigenvalues(a) > cutoff) total += eigenvalues(a);

    double entropy = 0.0;
    for (int a = 0; a < eigenvalues.size(); ++a) {
        if (eigenvalues(a) <= cutoff) continue;
        const double p = eigenvalues(a) / total;
        entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

std::vector<int> dynamic_cluster_numbers(int num_stocks, int num_obs, double erank_value,
                                         int levels) {
    if (levels < 1) throw DataError("level count must be positive");
    if (num_obs < 2) throw DataError("need at least 2 observations");

    const int k1 = std::max<long long>(
        1, round_positive(static_cast<double>(num_stocks) / static_cast<double>(num_obs - 1)));
    int p = levels;
    int kp = 0;
    if (p > 1) {
        kp = static_cast<int>(round_positive(erank_value));
        if (k1 < kp) p = 1;
    }

    std::vector<int> k;
    if (p == 1) {
        k.push_back(k1);
    } else {
        for (int mu = 1; mu <= p; ++mu) {
            const double q = static_cast<double>(p - mu) / static_cast<double>(p - 1);
            k.push_back(static_cast<int>(round_positive(
                std::pow(static_cast<double>(k1), q) * std::pow(static_cast<double>(kp), 1.0 - q))));
        }
    }
    if (k.back() == 1 && k.size() > 1) k.pop_back();
    return k;
}

std::vector<int> derive_topdown_counts(const std::vector<int>& k_vec) {
    if (k_vec.empty()) throw DataError("empty cluster-count vector");
    for (std::size_t mu = 1; mu < k_vec.size(); ++mu)
        if (k_vec[mu] >= k_vec[mu - 1])
            throw DataError("cluster counts must be strictly decreasing");

    std::vector<int> ratios(k_vec.size());
    for (std::size_t mu = 0; mu < k_vec.size(); ++mu) {
        const int next = (mu + 1 < k_vec.size()) ? k_vec[mu + 1] : 1;
        ratios[mu] = static_cast<int>(
            round_positive(static_cast<double>(k_vec[mu]) / static_cast<double>(next)));
    }
    return {ratios.rbegin(), ratios.rend()};
}

MultilevelClassification classify_dynamic(const ReturnMatrix& ret, int levels, int iter_max,
                                          int num_try, bool top_down_mode, std::uint64_t seed) {
    ret.validate();
    double erank_value = 1.0;
    if (levels > 1) erank_value = erank(correlation_eigen(ret).values);

    const std::vector<int> k_vec =
        dynamic_cluster_numbers(ret.num_stocks(), ret.num_obs(), erank_value, levels);

    if (top_down_mode)
        return top_down(ret, derive_topdown_counts(k_vec), iter_max, num_try, seed);

    std::vector<bool> do_demean(k_vec.size(), true);
    do_demean[0] = false;
    return bottom_up(ret, k_vec, iter_max, num_try, do_demean, /*norm_cl_ret=*/false, seed);
}

RiskModel statistical_risk_model(const Eigen::MatrixXd& values, int factors, bool floor_factors,
                                 const std::vector<std::string>* ids) {
    const int d = static_cast<int>(values.cols());
    const EigenSystem eig = correlation_eigen(values, ids);

    int f = factors;
    if (factors == kAutoFactors) {
        const double er = erank(eig.values);
        f = static_cast<int>(floor_factors ? std::floor(er) : round_positive(er));
        f = std::max(1, f);
    } else if (factors < 1 || factors > d - 1) {
        throw DataError("factor count must lie in [1, " + std::to_string(d - 1) + "]");
    }
    f = std::min(f, eig.count());

    const int n = static_cast<int>(values.rows());
    RiskModel model;
    model.factor_loadings = Eigen::MatrixXd(n, f);
    for (int a = 0; a < f; ++a)
        model.factor_loadings.col(a) = std::sqrt(eig.values(a)) * eig.vectors.col(a);

    model.specific_variance = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
        const double explained = model.factor_loadings.row(i).squaredNorm();
        model.specific_variance(i) = std::max(0.0, 1.0 - explained);
    }

    model.gamma = model.factor_loadings * model.factor_loadings.transpose();
    model.gamma.diagonal().setOnes();
    return model;
}

RiskModel statistical_risk_model(const ReturnMatrix& ret, int factors, bool floor_factors) {
    return statistical_risk_model(ret.values, factors, floor_factors, &ret.stock_ids);
}

} // namespace sic
