// io.hpp
// CSV/JSON ingestion and serialization: return panels, price panel sets,
// classification files, fundamental taxonomies, metrics and validation.

#pragma once

#include <string>
#include <vector>

#include "sic/backtest.hpp"
#include "sic/classification.hpp"
#include "sic/returns.hpp"

namespace sic {

/// Return panel CSV: header `stock_id,<date_1>,...,<date_d>` with date_1 the
/// most recent, one row per stock, decimal log-returns.
ReturnMatrix load_return_matrix(const std::string& path);
void save_return_matrix(const std::string& path, const ReturnMatrix& ret);

struct PricePanelPaths {
    std::string open_unadj;
    std::string close_unadj;
    std::string open_adj;
    std::string close_adj;
    std::string volume;
};

/// Loads the five aligned grids; throws DataError on the first inconsistency.
PricePanel load_price_panel(const PricePanelPaths& paths);
void save_price_panel(const PricePanelPaths& paths, const PricePanel& panel);

/// Classification CSV: `stock_id,level_1,...,level_P` with 1-based contiguous
/// cluster labels per level, renumbered in first-appearance order. The JSON
/// variant adds cluster_counts metadata.
void save_classification_csv(const std::string& path, const std::vector<std::string>& stock_ids,
                             const MultilevelClassification& classification);
MultilevelClassification load_classification_csv(const std::string& path,
                                                 std::vector<std::string>* stock_ids = nullptr);
void save_classification_json(const std::string& path, const std::vector<std::string>& stock_ids,
                              const MultilevelClassification& classification);
MultilevelClassification load_classification_json(const std::string& path,
                                                  std::vector<std::string>* stock_ids = nullptr);

/// Fundamental classification CSV: `stock_id,subindustry_label`; rows are
/// matched to panel_ids (every panel stock must appear exactly once).
FundamentalClassification load_fundamental_csv(const std::string& path,
                                               const std::vector<std::string>& panel_ids);

/// Result of validating a price panel file set without loading it: grid
/// alignment across the five files, price positivity, NaN locations.
struct PanelReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};
PanelReport validate_panel(const PricePanelPaths& paths);

/// Backtest metrics as a single-row CSV and as a human-readable block.
void save_metrics_csv(const std::string& path, const MetricsReport& report);
std::string format_metrics_table(const MetricsReport& report);

struct SweepRow {
    int k = 0;
    MetricsReport metrics;
};
/// Sweep output: `K,ROC,SR,CPS`, one row per swept cluster count.
void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

/// Distribution statistics in the usual summary order.
struct SummaryStats {
    double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
    double stdev = 0.0, mad = 0.0;
};
SummaryStats summarize_counts(const std::vector<int>& counts);
std::string format_cluster_summary(const MultilevelClassification& classification);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double x);

} // namespace sic
