#include "sic/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sic/hierarchy.hpp"

namespace sic {

namespace {

constexpr double kConstraintTol = 1e-6; // relative to the investment level
constexpr double kTradingDays = 252.0;

void check_grid(const Eigen::MatrixXd& m, const PricePanel& panel, const std::string& name,
                bool price) {
    if (m.rows() != panel.open_unadj.rows() || m.cols() != panel.open_unadj.cols())
        throw DataError(name + " grid shape differs from the open-price grid");
    for (int i = 0; i < m.rows(); ++i) {
        for (int s = 0; s < m.cols(); ++s) {
            const double x = m(i, s);
            if (!std::isfinite(x))
                throw DataError("non-finite " + name + " for " +
                                panel.stock_ids[static_cast<std::size_t>(i)] + " at " +
                                panel.dates[static_cast<std::size_t>(s)]);
            if (price && !(x > 0.0))
                throw DataError("non-positive " + name + " for " +
                                panel.stock_ids[static_cast<std::size_t>(i)] + " at " +
                                panel.dates[static_cast<std::size_t>(s)]);
            if (!price && x < 0.0)
                throw DataError("negative " + name + " for " +
                                panel.stock_ids[static_cast<std::size_t>(i)] + " at " +
                                panel.dates[static_cast<std::size_t>(s)]);
        }
    }
}

} // namespace

void PricePanel::validate() const {
    if (num_stocks() < 1 || num_dates() < 2) throw DataError("price panel too small");
    if (static_cast<int>(stock_ids.size()) != num_stocks())
        throw DataError("stock id count does not match price rows");
    if (static_cast<int>(dates.size()) != num_dates())
        throw DataError("date count does not match price columns");
    check_grid(open_unadj, *this, "open price", true);
    check_grid(close_unadj, *this, "close price", true);
    check_grid(open_adj, *this, "adjusted open price", true);
    check_grid(close_adj, *this, "adjusted close price", true);
    check_grid(volume, *this, "volume", false);
}

double overnight_return(const PricePanel& panel, int stock, int day) {
    if (stock < 0 || stock >= panel.num_stocks()) throw DataError("stock index out of range");
    if (day < 0 || day + 1 >= panel.num_dates())
        throw DataError("overnight return needs the previous close");
    return std::log(panel.open_adj(stock, day) / panel.close_adj(stock, day + 1));
}

double close_return(const PricePanel& panel, int stock, int day) {
    if (stock < 0 || stock >= panel.num_stocks()) throw DataError("stock index out of range");
    if (day < 0 || day + 1 >= panel.num_dates())
        throw DataError("close return needs the previous close");
    return std::log(panel.close_adj(stock, day) / panel.close_adj(stock, day + 1));
}

double addv(const PricePanel& panel, int stock, int day, int window) {
    if (window < 1) throw DataError("ADDV window must be positive");
    if (stock < 0 || stock >= panel.num_stocks()) throw DataError("stock index out of range");
    if (day < 0 || day + window >= panel.num_dates())
        throw DataError("insufficient history for ADDV at date index " + std::to_string(day));
    double acc = 0.0;
    for (int r = 1; r <= window; ++r)
        acc += panel.volume(stock, day + r) * panel.close_unadj(stock, day + r);
    return acc / static_cast<double>(window);
}

std::vector<int> select_universe(const PricePanel& panel, int day, int top_n, int addv_window) {
    const int n = panel.num_stocks();
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ranked.emplace_back(addv(panel, i, day, addv_window), i);
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return panel.stock_ids[static_cast<std::size_t>(a.second)] <
               panel.stock_ids[static_cast<std::size_t>(b.second)];
    });
    const int take = std::min(top_n, n);
    std::vector<int> universe;
    universe.reserve(static_cast<std::size_t>(take));
    for (int r = 0; r < take; ++r) universe.push_back(ranked[static_cast<std::size_t>(r)].second);
    return universe;
}

RiskModel build_risk_model(const ReturnMatrix& window,
                           const MultilevelClassification* classification) {
    window.validate();
    const int n = window.num_stocks();
    const int d = window.num_obs();
    const Eigen::VectorXd sd = row_stddevs(window.values);

    if (classification == nullptr) {
        RiskModel corr = statistical_risk_model(window);
        RiskModel model;
        model.factor_loadings = sd.asDiagonal() * corr.factor_loadings;
        model.specific_variance = (sd.array().square() * corr.specific_variance.array()).matrix();
        model.gamma = sd.asDiagonal() * corr.gamma * sd.asDiagonal();
        return model;
    }

    classification->validate();
    if (classification->num_stocks() != n)
        throw DataError("classification covers a different stock count than the window");

    // Loadings: cluster indicators for every level plus a unit market column.
    int total_factors = 1;
    for (const auto& level : classification->levels) total_factors += level.num_clusters();
    Eigen::MatrixXd loadings = Eigen::MatrixXd::Zero(n, total_factors);
    int col = 0;
    for (const auto& level : classification->levels) {
        loadings.middleCols(col, level.num_clusters()) = level.membership();
        col += level.num_clusters();
    }
    loadings.col(col).setOnes();

    const Eigen::MatrixXd normed = normalize_returns(window.values, &window.stock_ids);
    const Eigen::MatrixXd factor_returns = loadings.transpose() * normed;

    Eigen::MatrixXd centered = factor_returns;
    const Eigen::VectorXd means = centered.rowwise().mean();
    centered.colwise() -= means;
    const Eigen::MatrixXd factor_cov =
        (centered * centered.transpose()) / static_cast<double>(d - 1);

    const Eigen::MatrixXd diag_part = factor_cov.diagonal().asDiagonal();
    Eigen::MatrixXd shrunk;
    bool ok = false;
    for (double w = 0.1; w <= 0.5 + 1e-12; w += 0.1) {
        shrunk = (1.0 - w) * factor_cov + w * diag_part;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shrunk);
        if (solver.info() == Eigen::Success &&
            solver.eigenvalues()(0) > 1e-12 * std::max(1e-300, shrunk.diagonal().maxCoeff())) {
            ok = true;
            break;
        }
    }
    if (!ok) throw NumericalError("factor covariance is singular even at maximum shrinkage");

    const Eigen::MatrixXd factor_part = loadings * shrunk * loadings.transpose();
    const Eigen::VectorXd sample_var = row_variances(window.values);
    RiskModel model;
    model.specific_variance = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i)
        model.specific_variance(i) =
            std::max(sample_var(i) - factor_part(i, i), 0.1 * sample_var(i));
    model.factor_loadings = loadings * Eigen::LLT<Eigen::MatrixXd>(shrunk).matrixL();
    model.gamma = factor_part;
    model.gamma.diagonal() += model.specific_variance;
    return model;
}

namespace {

// Largest eta >= 0 with sum |eta*u + shift| == gross; the sum is piecewise
// linear and convex in eta, so the rightmost crossing is found by scanning
// segment ends from the right. Returns false when no crossing exists.
bool solve_gross_scale(const Eigen::VectorXd& u, const Eigen::VectorXd& shift, double gross,
                       double* eta_out) {
    const auto phi = [&](double eta) {
        double acc = 0.0;
        for (int i = 0; i < u.size(); ++i) acc += std::fabs(eta * u(i) + shift(i));
        return acc;
    };

    std::vector<double> breaks;
    double tail_slope = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        if (u(i) == 0.0) continue;
        tail_slope += std::fabs(u(i));
        const double b = -shift(i) / u(i);
        if (b > 0.0) breaks.push_back(b);
    }
    if (tail_slope == 0.0) {
        if (std::fabs(phi(0.0) - gross) <= 1e-12 * std::max(1.0, gross)) {
            *eta_out = 0.0;
            return true;
        }
        return false;
    }
    std::sort(breaks.begin(), breaks.end());

    std::vector<double> points;
    points.push_back(0.0);
    for (double b : breaks) points.push_back(b);

    const double last = points.back();
    const double phi_last = phi(last);
    if (phi_last <= gross) {
        *eta_out = last + (gross - phi_last) / tail_slope;
        return true;
    }
    for (int j = static_cast<int>(points.size()) - 2; j >= 0; --j) {
        const double lo = points[static_cast<std::size_t>(j)];
        const double hi = points[static_cast<std::size_t>(j) + 1];
        const double phi_lo = phi(lo);
        const double phi_hi = phi(hi);
        if (phi_lo <= gross && gross <= phi_hi) {
            if (phi_hi == phi_lo) {
                *eta_out = hi;
            } else {
                *eta_out = lo + (gross - phi_lo) * (hi - lo) / (phi_hi - phi_lo);
            }
            return true;
        }
    }
    return false;
}

// Dollar-neutral directions on a subset: u has zero sum (the alpha
// direction), v sums to one (the minimum-variance shift).
void neutral_directions(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& expected,
                        Eigen::VectorXd* u, Eigen::VectorXd* v) {
    const Eigen::VectorXd a = llt.solve(expected);
    const Eigen::VectorXd w = llt.solve(Eigen::VectorXd::Ones(expected.size()));
    const double denom = w.sum();
    if (!(denom > 0.0)) throw NumericalError("risk covariance is not positive definite");
    *u = -(a - w * (a.sum() / denom));
    *v = w / denom;
}

// Sharpe ratio of the mean-reversion alpha -E for a full holdings vector.
double contrarian_sharpe(const Eigen::VectorXd& expected, const Eigen::MatrixXd& gamma,
                         const Eigen::VectorXd& holdings) {
    const double var = holdings.dot(gamma * holdings);
    if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
    return -expected.dot(holdings) / std::sqrt(var);
}

// Exact Sharpe-stationary point on the face spanned by the free stocks with
// clipped positions held fixed: maximizes -E'H / sqrt(H'Gamma H) subject to
// sum(H_F) = net_target and sign'H_F = gross_target, iterating the sign
// pattern to self-consistency. Returns false when the iteration fails to
// settle (degenerate numerators, oscillating signs).
bool refine_on_face(const Eigen::VectorXd& expected, const Eigen::MatrixXd& gamma,
                    const std::vector<int>& free, const std::vector<bool>& is_clipped,
                    const Eigen::VectorXd& full, double net_target, double gross_target,
                    Eigen::VectorXd* refined_free) {
    const int nf = static_cast<int>(free.size());
    const int n = static_cast<int>(expected.size());
    if (nf <= 2) return false;

    Eigen::MatrixXd gamma_ff(nf, nf);
    Eigen::VectorXd alpha_f(nf);
    Eigen::VectorXd couple(nf); // Gamma_FB H_B
    for (int r = 0; r < nf; ++r) {
        const int i = free[static_cast<std::size_t>(r)];
        alpha_f(r) = -expected(i);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (is_clipped[static_cast<std::size_t>(j)]) acc += gamma(i, j) * full(j);
        }
        couple(r) = acc;
        for (int c = 0; c < nf; ++c) gamma_ff(r, c) = gamma(i, free[static_cast<std::size_t>(c)]);
    }
    double alpha_const = 0.0;
    double var_const = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!is_clipped[static_cast<std::size_t>(i)]) continue;
        alpha_const += -expected(i) * full(i);
        for (int j = 0; j < n; ++j)
            if (is_clipped[static_cast<std::size_t>(j)]) var_const += full(i) * gamma(i, j) * full(j);
    }

    Eigen::VectorXd sign(nf);
    for (int r = 0; r < nf; ++r) {
        const double h = (*refined_free)(r);
        sign(r) = h >= 0.0 ? 1.0 : -1.0;
    }

    for (int pass = 0; pass < 20; ++pass) {
        // Affine face {1'x = net_target, sign'x = gross_target}: particular
        // solution by least norm, tangent basis from the QR null space.
        Eigen::MatrixXd constraints(2, nf);
        constraints.row(0).setOnes();
        constraints.row(1) = sign.transpose();
        Eigen::Vector2d rhs(net_target, gross_target);
        const Eigen::VectorXd x0 =
            constraints.transpose() *
            (constraints * constraints.transpose()).ldlt().solve(rhs);

        Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraints.transpose());
        const Eigen::MatrixXd q_full = qr.householderQ();
        const Eigen::MatrixXd tangent = q_full.rightCols(nf - 2);

        const Eigen::MatrixXd m = tangent.transpose() * gamma_ff * tangent;
        const Eigen::VectorXd b = tangent.transpose() * (gamma_ff * x0 + couple);
        const Eigen::VectorXd q = tangent.transpose() * alpha_f;
        const double p = alpha_const + alpha_f.dot(x0);
        const double r0 = var_const + x0.dot(gamma_ff * x0) + 2.0 * x0.dot(couple);

        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd y1 = llt.solve(q);
        const Eigen::VectorXd y0 = llt.solve(b);
        const double d0 = r0 - b.dot(y0);
        const double n0 = p - q.dot(y0);
        if (!(d0 > 0.0) || !(n0 > 0.0)) return false;
        const double tau = d0 / n0;

        const Eigen::VectorXd x = x0 + tangent * (tau * y1 - y0);
        bool consistent = true;
        for (int r = 0; r < nf; ++r) {
            const double s = x(r) >= 0.0 ? 1.0 : -1.0;
            if (s != sign(r)) {
                sign(r) = s;
                consistent = false;
            }
        }
        if (consistent) {
            *refined_free = x;
            return true;
        }
    }
    return false;
}

} // namespace

Holdings optimize_holdings(const Eigen::VectorXd& expected, const RiskModel& risk,
                           double investment, const Eigen::VectorXd* bounds) {
    const int n = static_cast<int>(expected.size());
    if (risk.size() != n) throw DataError("risk model size does not match expected returns");
    if (!(investment > 0.0)) throw DataError("investment level must be positive");

    if (bounds != nullptr) {
        if (bounds->size() != n) throw DataError("bound vector size mismatch");
        double capacity = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!((*bounds)(i) > 0.0)) throw DataError("position bounds must be positive");
            capacity += (*bounds)(i);
        }
        if (capacity < investment) throw NumericalError("gross target unattainable");
    }

    const double tol = kConstraintTol * investment;

    std::vector<bool> clipped(static_cast<std::size_t>(n), false);
    Eigen::VectorXd holdings = Eigen::VectorXd::Zero(n);
    double eta = 0.0;

    for (int round = 0; round < 50; ++round) {
        std::vector<int> free;
        double clipped_sum = 0.0;
        double clipped_gross = 0.0;
        for (int i = 0; i < n; ++i) {
            if (clipped[static_cast<std::size_t>(i)]) {
                clipped_sum += holdings(i);
                clipped_gross += std::fabs(holdings(i));
            } else {
                free.push_back(i);
            }
        }
        const double net_target = -clipped_sum;
        const double gross_target = investment - clipped_gross;
        if (free.empty()) break;
        if (gross_target < -tol)
            throw NumericalError("clipped positions exceed the gross target");

        const int nf = static_cast<int>(free.size());
        Eigen::MatrixXd sub_gamma(nf, nf);
        Eigen::VectorXd sub_e(nf);
        Eigen::VectorXd coupling = Eigen::VectorXd::Zero(nf);
        for (int r = 0; r < nf; ++r) {
            const int i = free[static_cast<std::size_t>(r)];
            sub_e(r) = expected(i);
            for (int c = 0; c < nf; ++c)
                sub_gamma(r, c) = risk.gamma(i, free[static_cast<std::size_t>(c)]);
            for (int j = 0; j < n; ++j)
                if (clipped[static_cast<std::size_t>(j)]) coupling(r) += risk.gamma(i, j) * holdings(j);
        }

        Eigen::LLT<Eigen::MatrixXd> llt(sub_gamma);
        if (llt.info() != Eigen::Success)
            throw NumericalError("risk covariance is not positive definite");
        Eigen::VectorXd u, v;
        neutral_directions(llt, sub_e, &u, &v);
        // Sharpe stationarity on the face of clipped positions carries the
        // covariance coupling term Gamma_FF^{-1} Gamma_FB H_B into the shift.
        const Eigen::VectorXd c_free = llt.solve(coupling);
        const Eigen::VectorXd shift = -c_free + v * (net_target + c_free.sum());

        if (u.lpNorm<1>() <= 0.0 && std::fabs(gross_target - shift.lpNorm<1>()) > tol)
            throw NumericalError("degenerate expected returns: no alpha direction");

        if (!solve_gross_scale(u, shift, gross_target, &eta))
            throw NumericalError("cannot reach the gross target on the free set");

        for (int r = 0; r < nf; ++r)
            holdings(free[static_cast<std::size_t>(r)]) = eta * u(r) + shift(r);

        if (bounds == nullptr) break;

        if (nf < n) {
            // With positions pinned at their bounds the scale invariance of
            // the Sharpe ratio is broken; polish the free side to the exact
            // stationary point on the active face and keep it if it helps.
            Eigen::VectorXd free_vals(nf);
            for (int r = 0; r < nf; ++r) free_vals(r) = holdings(free[static_cast<std::size_t>(r)]);
            if (refine_on_face(expected, risk.gamma, free, clipped, holdings, net_target,
                               gross_target, &free_vals)) {
                Eigen::VectorXd candidate = holdings;
                for (int r = 0; r < nf; ++r)
                    candidate(free[static_cast<std::size_t>(r)]) = free_vals(r);
                if (contrarian_sharpe(expected, risk.gamma, candidate) >=
                    contrarian_sharpe(expected, risk.gamma, holdings))
                    holdings = candidate;
            }
        }

        bool new_violation = false;
        for (int i : free) {
            const double limit = (*bounds)(i);
            if (std::fabs(holdings(i)) > limit * (1.0 + 1e-12)) {
                holdings(i) = holdings(i) > 0.0 ? limit : -limit;
                clipped[static_cast<std::size_t>(i)] = true;
                new_violation = true;
            }
        }
        if (!new_violation) break;
    }

    const double net = holdings.sum();
    const double gross = holdings.lpNorm<1>();
    if (std::fabs(net) > tol || std::fabs(gross - investment) > tol)
        throw NumericalError("holdings failed the neutrality/gross contract");
    if (bounds != nullptr) {
        for (int i = 0; i < n; ++i)
            if (std::fabs(holdings(i)) > (*bounds)(i) * (1.0 + 1e-9) + tol)
                throw NumericalError("holdings failed the bound contract");
    }

    Holdings out;
    out.dollars = std::move(holdings);
    out.eta = eta;
    out.investment = investment;
    return out;
}

DailyResult simulate_day(const PricePanel& panel, int day, const std::vector<int>& universe,
                         const Eigen::VectorXd& holdings) {
    if (static_cast<int>(universe.size()) != holdings.size())
        throw DataError("holdings size does not match universe size");
    if (day < 0 || day >= panel.num_dates()) throw DataError("day index out of range");

    DailyResult result;
    result.date = panel.dates[static_cast<std::size_t>(day)];
    for (std::size_t j = 0; j < universe.size(); ++j) {
        const double h = holdings(static_cast<int>(j));
        if (h == 0.0) continue;
        const int i = universe[j];
        const double open = panel.open_unadj(i, day);
        const double close = panel.close_unadj(i, day);
        if (!(open > 0.0) || !(close > 0.0) || !std::isfinite(open) || !std::isfinite(close))
            throw DataError("missing fill price for held stock " +
                            panel.stock_ids[static_cast<std::size_t>(i)]);
        result.pnl += h * (close / open - 1.0);
        result.traded_shares += 2.0 * std::fabs(h) / open;
        result.gross += std::fabs(h);
    }
    result.traded = result.gross > 0.0;
    return result;
}

namespace {

// Cap a target count vector at the universe size, keeping it strictly
// decreasing; levels that collapse onto the previous one are dropped.
std::vector<int> cap_counts(const std::vector<int>& k_vec, int n) {
    std::vector<int> out;
    int prev = n + 1;
    for (int k : k_vec) {
        const int v = std::min(k, n);
        if (v >= prev || v < 1) continue;
        out.push_back(v);
        prev = v;
    }
    if (out.empty()) out.push_back(1);
    return out;
}

MultilevelClassification build_interval_classification(const ReturnMatrix& window,
                                                       const ClassifierConfig& cfg,
                                                       std::uint64_t interval_seed) {
    const int n = window.num_stocks();
    std::vector<bool> demean = cfg.do_demean;
    using Kind = ClassifierConfig::Kind;
    switch (cfg.kind) {
        case Kind::BottomUp: {
            const std::vector<int> k = cap_counts(cfg.k_vec, n);
            if (demean.empty()) {
                demean.assign(k.size(), true);
                demean[0] = false;
            }
            demean.resize(k.size(), true);
            return bottom_up(window, k, cfg.iter_max, cfg.num_try, demean, cfg.norm_cl_ret,
                             interval_seed);
        }
        case Kind::Relax: {
            const std::vector<int> k = cap_counts(cfg.k_vec, n);
            if (demean.empty()) {
                demean.assign(k.size(), true);
                demean[0] = false;
            }
            demean.resize(k.size(), true);
            return relaxation_all(window, k, demean, cfg.norm_cl_ret);
        }
        case Kind::TopDown:
            return top_down(window, cfg.l_vec, cfg.iter_max, cfg.num_try, interval_seed);
        case Kind::Dynamic:
            return classify_dynamic(window, cfg.levels, cfg.iter_max, cfg.num_try,
                                    cfg.dynamic_top_down, interval_seed);
        case Kind::Statistical:
            break;
    }
    throw DataError("statistical classifier has no classification to build");
}

} // namespace

MetricsReport run_backtest(const PricePanel& panel, const BacktestConfig& config) {
    panel.validate();
    if (config.days < 1) throw DataError("day count must be positive");
    if (config.rebalance_every < 1) throw DataError("rebalance interval must be positive");
    if (!(config.bound_fraction > 0.0) || config.bound_fraction > 1.0)
        throw DataError("bound fraction must lie in (0, 1]");

    const int lookback = std::max(config.addv_window, config.return_window + 1);
    if (panel.num_dates() < config.days + lookback)
        throw DataError("price panel too short: need at least " +
                        std::to_string(config.days + lookback) + " dates, have " +
                        std::to_string(panel.num_dates()));

    MetricsReport report;
    report.days = config.days;

    std::vector<int> universe;
    RiskModel risk;
    MultilevelClassification classification;
    bool interval_ok = false;
    int interval_index = -1;

    for (int step = 0; step < config.days; ++step) {
        const int day = config.days - 1 - step; // chronological, oldest first

        if (step % config.rebalance_every == 0) {
            ++interval_index;
            universe = select_universe(panel, day, config.top_n, config.addv_window);
            const int nu = static_cast<int>(universe.size());

            Eigen::MatrixXd window(nu, config.return_window);
            std::vector<std::string> ids;
            ids.reserve(universe.size());
            for (int j = 0; j < nu; ++j) {
                ids.push_back(panel.stock_ids[static_cast<std::size_t>(universe[static_cast<std::size_t>(j)])]);
                for (int s = 0; s < config.return_window; ++s)
                    window(j, s) = close_return(panel, universe[static_cast<std::size_t>(j)],
                                                day + 1 + s);
            }
            std::vector<std::string> window_dates;
            for (int s = 0; s < config.return_window; ++s)
                window_dates.push_back(panel.dates[static_cast<std::size_t>(day + 1 + s)]);
            ReturnMatrix ret(std::move(window), std::move(ids), std::move(window_dates));

            try {
                const std::uint64_t interval_seed =
                    config.classifier.seed +
                    static_cast<std::uint64_t>(interval_index) * 1000003ULL;
                if (config.classifier.kind == ClassifierConfig::Kind::Statistical) {
                    risk = build_risk_model(ret, nullptr);
                } else {
                    classification =
                        build_interval_classification(ret, config.classifier, interval_seed);
                    risk = build_risk_model(ret, &classification);
                }
                interval_ok = true;
            } catch (const DataError&) {
                interval_ok = false; // degenerate window: sit out the interval
            }
        }

        DailyResult day_result;
        day_result.date = panel.dates[static_cast<std::size_t>(day)];
        if (interval_ok) {
            const int nu = static_cast<int>(universe.size());
            Eigen::VectorXd expected(nu);
            Eigen::VectorXd bounds(nu);
            for (int j = 0; j < nu; ++j) {
                const int i = universe[static_cast<std::size_t>(j)];
                expected(j) = overnight_return(panel, i, day);
                bounds(j) = config.bound_fraction * addv(panel, i, day, config.addv_window);
            }
            const double span = expected.maxCoeff() - expected.minCoeff();
            if (span > 1e-15) {
                const Holdings holdings =
                    optimize_holdings(expected, risk, config.investment, &bounds);
                day_result = simulate_day(panel, day, universe, holdings.dollars);
            }
        }
        if (!day_result.traded) ++report.no_trade_days;
        report.total_pnl += day_result.pnl;
        report.total_shares += day_result.traded_shares;
        report.daily.push_back(std::move(day_result));
    }

    const double nd = static_cast<double>(config.days);
    const double mean_pnl = report.total_pnl / nd;
    report.roc = mean_pnl / config.investment * kTradingDays;

    double var = 0.0;
    for (const auto& day : report.daily) {
        const double dev = day.pnl - mean_pnl;
        var += dev * dev;
    }
    if (config.days > 1) var /= (nd - 1.0);
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
        report.sharpe = mean_pnl / sd * std::sqrt(kTradingDays);
        report.sharpe_defined = true;
    } else {
        report.sharpe = std::numeric_limits<double>::quiet_NaN();
        report.sharpe_defined = false;
    }
    report.cps = report.total_shares > 0.0 ? 100.0 * report.total_pnl / report.total_shares : 0.0;
    return report;
}

} // namespace sic
