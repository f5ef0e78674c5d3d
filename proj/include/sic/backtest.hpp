// backtest.hpp
// Intraday mean-reversion evaluation harness: universe selection by dollar
// volume, overnight-return alpha, dollar-neutral Sharpe-maximized holdings
// with position bounds, and ROC/SR/CPS reporting.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sic/classification.hpp"
#include "sic/spectral.hpp"

namespace sic {

/// Aligned open/close (unadjusted and adjusted) prices plus share volume.
/// Rows are stocks, columns are trading dates with column 0 the most recent.
struct PricePanel {
    Eigen::MatrixXd open_unadj;
    Eigen::MatrixXd close_unadj;
    Eigen::MatrixXd open_adj;
    Eigen::MatrixXd close_adj;
    Eigen::MatrixXd volume;
    std::vector<std::string> stock_ids;
    std::vector<std::string> dates;

    int num_stocks() const { return static_cast<int>(open_unadj.rows()); }
    int num_dates() const { return static_cast<int>(open_unadj.cols()); }

    /// All five grids share the same shape, prices are positive and finite,
    /// volume non-negative and finite. Throws DataError otherwise.
    void validate() const;
};

/// Previous-close-to-open log return ln(open_adj(i,s) / close_adj(i,s+1)).
double overnight_return(const PricePanel& panel, int stock, int day);

/// Close-to-close log return ln(close_adj(i,s) / close_adj(i,s+1)).
double close_return(const PricePanel& panel, int stock, int day);

/// Average daily dollar volume over the m days strictly before `day`:
/// (1/m) * sum_{r=1..m} volume(i, day+r) * close_unadj(i, day+r).
double addv(const PricePanel& panel, int stock, int day, int window = 21);

/// Stock indices ranked by ADDV at `day`, descending, ties broken by stock
/// id. At most top_n entries; the full universe when top_n >= N.
std::vector<int> select_universe(const PricePanel& panel, int day, int top_n = 2000,
                                 int addv_window = 21);

/// Risk model on the covariance scale for a window of close-to-close
/// returns. With no classification this is the statistical model (auto
/// factor count) rescaled by the sample volatilities. With a classification
/// it is a block-factor substitute: one factor per cluster per level (factor
/// return = within-cluster sum of normalized returns) plus a unit-loading
/// market factor; the factor covariance is shrunk toward its diagonal
/// (weight 0.1, stepped up to 0.5 if needed) and specific variance tops the
/// diagonal up to the sample variance, floored at 10% of it.
RiskModel build_risk_model(const ReturnMatrix& window,
                           const MultilevelClassification* classification);

/// Dollar positions with the Lagrange scale that met the gross target.
struct Holdings {
    Eigen::VectorXd dollars;
    double eta = 0.0;
    double investment = 0.0;
};

/// Sharpe-maximizing dollar-neutral holdings: the unbounded solution is
///   H = -eta * (Gamma^{-1} E - Gamma^{-1} 1 * (1' Gamma^{-1} E)/(1' Gamma^{-1} 1))
/// with eta > 0 scaled so sum |H_i| equals the investment level. With bounds,
/// violators are clipped to the bound and the free set is re-solved at the
/// Sharpe stationarity point of the clipped face (including the covariance
/// coupling to clipped positions) with the overall neutrality and gross
/// targets re-imposed, up to 50 rounds. The result satisfies neutrality,
/// gross and bounds within 1e-6 * investment or a NumericalError is thrown.
/// Infeasible bounds (sum below the investment level) raise "gross target
/// unattainable".
Holdings optimize_holdings(const Eigen::VectorXd& expected, const RiskModel& risk,
                           double investment, const Eigen::VectorXd* bounds = nullptr);

/// One day's realized result for a set of holdings.
struct DailyResult {
    double pnl = 0.0;
    double traded_shares = 0.0;
    double gross = 0.0;
    bool traded = false;
    std::string date;
};

/// Intraday P&L of holdings established at the open and closed at the close:
/// pnl = sum H_i (close_unadj/open_unadj - 1), shares = sum 2|H_i|/open_unadj.
DailyResult simulate_day(const PricePanel& panel, int day, const std::vector<int>& universe,
                         const Eigen::VectorXd& holdings);

/// Which classification feeds the risk model in a backtest run.
struct ClassifierConfig {
    enum class Kind { Statistical, BottomUp, TopDown, Relax, Dynamic };
    Kind kind = Kind::Statistical;
    std::vector<int> k_vec;      // BottomUp / Relax target counts
    std::vector<int> l_vec;      // TopDown split counts, least granular first
    int levels = 1;              // Dynamic
    bool dynamic_top_down = false;
    int iter_max = 100;
    int num_try = 100;
    std::uint64_t seed = 0;
    std::vector<bool> do_demean; // empty = demean all levels except level 1
    bool norm_cl_ret = false;
};

struct BacktestConfig {
    int days = 0;
    double investment = 20e6;
    int addv_window = 21;
    int return_window = 21;
    int rebalance_every = 21;
    int top_n = 2000;
    double bound_fraction = 0.01;
    ClassifierConfig classifier;
};

struct MetricsReport {
    double roc = 0.0;            // annualized return on capital, fraction
    double sharpe = 0.0;         // annualized, valid only when sharpe_defined
    bool sharpe_defined = false;
    double cps = 0.0;            // cents per share traded
    double total_pnl = 0.0;
    double total_shares = 0.0;
    int days = 0;
    int no_trade_days = 0;
    std::vector<DailyResult> daily; // chronological, oldest first
};

/// Day-by-day simulation over the `days` most recent dates. The universe and
/// the risk model refresh every rebalance_every days from data strictly older
/// than the rebalance date; expected returns are the day's overnight returns;
/// position bounds are bound_fraction * ADDV. Days whose risk window is
/// degenerate (zero-variance rows) or whose signal is flat are skipped with
/// zero holdings. ROC = mean daily pnl / investment * 252, SR = mean/sd of
/// daily pnl * sqrt(252), CPS = 100 * total pnl / total shares.
MetricsReport run_backtest(const PricePanel& panel, const BacktestConfig& config);

} // namespace sic
