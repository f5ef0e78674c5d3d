#include "sic/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace sic {

namespace {

struct ParsedCsv {
    std::string path;
    std::vector<std::string> header; // column labels after the id column
    std::vector<std::string> ids;
    Eigen::MatrixXd values;
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_number(const std::string& text, const std::string& path, int line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse number '" + text +
                        "'");
    return value;
}

ParsedCsv parse_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    ParsedCsv out;
    out.path = path;
    std::string line;
    int line_no = 0;
    std::vector<std::vector<double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<std::string> fields = split_line(line);
        if (line_no == 1) {
            if (fields.size() < 2)
                throw DataError(path + ":1: header needs an id column and at least one date");
            out.header.assign(fields.begin() + 1, fields.end());
            continue;
        }
        if (fields.size() != out.header.size() + 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(out.header.size() + 1) + " fields, got " +
                            std::to_string(fields.size()));
        out.ids.push_back(fields[0]);
        std::vector<double> row(out.header.size());
        for (std::size_t c = 0; c < out.header.size(); ++c)
            row[c] = parse_number(fields[c + 1], path, line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    out.values = Eigen::MatrixXd(static_cast<int>(rows.size()), static_cast<int>(out.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < out.header.size(); ++c)
            out.values(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    return out;
}

void write_numeric_csv(const std::string& path, const std::string& id_label,
                       const std::vector<std::string>& header, const std::vector<std::string>& ids,
                       const Eigen::MatrixXd& values) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write " + path);
    outf << id_label;
    for (const auto& h : header) outf << ',' << h;
    outf << '\n';
    for (int i = 0; i < values.rows(); ++i) {
        outf << ids[static_cast<std::size_t>(i)];
        for (int c = 0; c < values.cols(); ++c) outf << ',' << format_double(values(i, c));
        outf << '\n';
    }
}

} // namespace

std::string format_double(double x) {
    char buf[40];
    // Shortest representation that parses back to the same bits.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        double back = 0.0;
        std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
        if (back == x) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

ReturnMatrix load_return_matrix(const std::string& path) {
    ParsedCsv csv = parse_numeric_csv(path);
    ReturnMatrix ret(std::move(csv.values), std::move(csv.ids), std::move(csv.header));
    ret.validate();
    return ret;
}

void save_return_matrix(const std::string& path, const ReturnMatrix& ret) {
    write_numeric_csv(path, "stock_id", ret.dates, ret.stock_ids, ret.values);
}

PricePanel load_price_panel(const PricePanelPaths& paths) {
    const ParsedCsv open_u = parse_numeric_csv(paths.open_unadj);
    const ParsedCsv close_u = parse_numeric_csv(paths.close_unadj);
    const ParsedCsv open_a = parse_numeric_csv(paths.open_adj);
    const ParsedCsv close_a = parse_numeric_csv(paths.close_adj);
    const ParsedCsv vol = parse_numeric_csv(paths.volume);

    for (const ParsedCsv* other : {&close_u, &open_a, &close_a, &vol}) {
        if (other->ids != open_u.ids)
            throw DataError(other->path + ": stock ids differ from " + open_u.path);
        if (other->header != open_u.header)
            throw DataError(other->path + ": date columns differ from " + open_u.path);
    }

    PricePanel panel;
    panel.open_unadj = open_u.values;
    panel.close_unadj = close_u.values;
    panel.open_adj = open_a.values;
    panel.close_adj = close_a.values;
    panel.volume = vol.values;
    panel.stock_ids = open_u.ids;
    panel.dates = open_u.header;
    panel.validate();
    return panel;
}

void save_price_panel(const PricePanelPaths& paths, const PricePanel& panel) {
    write_numeric_csv(paths.open_unadj, "stock_id", panel.dates, panel.stock_ids, panel.open_unadj);
    write_numeric_csv(paths.close_unadj, "stock_id", panel.dates, panel.stock_ids,
                      panel.close_unadj);
    write_numeric_csv(paths.open_adj, "stock_id", panel.dates, panel.stock_ids, panel.open_adj);
    write_numeric_csv(paths.close_adj, "stock_id", panel.dates, panel.stock_ids, panel.close_adj);
    write_numeric_csv(paths.volume, "stock_id", panel.dates, panel.stock_ids, panel.volume);
}

void save_classification_csv(const std::string& path, const std::vector<std::string>& stock_ids,
                             const MultilevelClassification& classification) {
    if (classification.num_stocks() != static_cast<int>(stock_ids.size()))
        throw DataError("stock id count does not match classification");
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write " + path);
    outf << "stock_id";
    for (int mu = 1; mu <= classification.num_levels(); ++mu) outf << ",level_" << mu;
    outf << '\n';

    std::vector<BinaryClassification> canonical;
    canonical.reserve(classification.levels.size());
    for (const auto& level : classification.levels) canonical.push_back(level.canonicalized());

    for (int i = 0; i < classification.num_stocks(); ++i) {
        outf << stock_ids[static_cast<std::size_t>(i)];
        for (const auto& level : canonical) outf << ',' << (level.label(i) + 1);
        outf << '\n';
    }
}

MultilevelClassification load_classification_csv(const std::string& path,
                                                 std::vector<std::string>* stock_ids) {
    ParsedCsv csv = parse_numeric_csv(path);
    MultilevelClassification out;
    for (int mu = 0; mu < csv.values.cols(); ++mu) {
        std::vector<int> labels(csv.ids.size());
        for (std::size_t i = 0; i < csv.ids.size(); ++i) {
            const double raw = csv.values(static_cast<int>(i), mu);
            const int label = static_cast<int>(raw);
            if (raw != label || label < 1)
                throw DataError(path + ": cluster labels must be positive integers");
            labels[i] = label - 1;
        }
        out.levels.emplace_back(std::move(labels));
    }
    out.validate();
    if (stock_ids != nullptr) *stock_ids = std::move(csv.ids);
    return out;
}

void save_classification_json(const std::string& path, const std::vector<std::string>& stock_ids,
                              const MultilevelClassification& classification) {
    if (classification.num_stocks() != static_cast<int>(stock_ids.size()))
        throw DataError("stock id count does not match classification");

    std::vector<BinaryClassification> canonical;
    canonical.reserve(classification.levels.size());
    for (const auto& level : classification.levels) canonical.push_back(level.canonicalized());

    nlohmann::json doc;
    doc["levels"] = classification.num_levels();
    doc["cluster_counts"] = classification.cluster_counts();
    doc["stocks"] = stock_ids;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < classification.num_stocks(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& level : canonical) row.push_back(level.label(i) + 1);
        rows.push_back(std::move(row));
    }
    doc["assignments"] = std::move(rows);

    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write " + path);
    outf << doc.dump(2) << '\n';
}

MultilevelClassification load_classification_json(const std::string& path,
                                                  std::vector<std::string>* stock_ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    try {
        const auto stocks = doc.at("stocks").get<std::vector<std::string>>();
        const auto rows = doc.at("assignments");
        const int levels = doc.at("levels").get<int>();
        if (rows.size() != stocks.size()) throw DataError(path + ": assignment row count mismatch");
        MultilevelClassification out;
        for (int mu = 0; mu < levels; ++mu) {
            std::vector<int> labels(stocks.size());
            for (std::size_t i = 0; i < stocks.size(); ++i)
                labels[i] = rows.at(i).at(static_cast<std::size_t>(mu)).get<int>() - 1;
            out.levels.emplace_back(std::move(labels));
        }
        out.validate();
        if (stock_ids != nullptr) *stock_ids = stocks;
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

FundamentalClassification load_fundamental_csv(const std::string& path,
                                               const std::vector<std::string>& panel_ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::map<std::string, std::string> group_of;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> fields = split_line(line);
        if (line_no == 1) {
            if (fields.size() != 2)
                throw DataError(path + ":1: expected header `stock_id,subindustry_label`");
            continue;
        }
        if (fields.size() != 2)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
        if (!group_of.emplace(fields[0], fields[1]).second)
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate stock " +
                            fields[0]);
    }

    FundamentalClassification out;
    std::map<std::string, int> group_index;
    for (const auto& id : panel_ids) {
        const auto it = group_of.find(id);
        if (it == group_of.end())
            throw DataError(path + ": no sub-industry for panel stock " + id);
        const auto ins = group_index.emplace(it->second, static_cast<int>(out.label_names.size()));
        if (ins.second) out.label_names.push_back(it->second);
        out.labels.push_back(ins.first->second);
    }
    if (group_of.size() != panel_ids.size())
        throw DataError(path + ": file lists stocks that are not in the panel");
    out.validate();
    return out;
}

PanelReport validate_panel(const PricePanelPaths& paths) {
    PanelReport report;
    std::vector<ParsedCsv> grids;
    const std::vector<std::pair<std::string, bool>> spec = {{paths.open_unadj, true},
                                                            {paths.close_unadj, true},
                                                            {paths.open_adj, true},
                                                            {paths.close_adj, true},
                                                            {paths.volume, false}};
    for (const auto& [path, is_price] : spec) {
        (void)is_price;
        try {
            grids.push_back(parse_numeric_csv(path));
        } catch (const DataError& e) {
            report.issues.push_back(e.what());
        }
    }
    if (!report.issues.empty() || grids.size() != spec.size()) return report;

    const ParsedCsv& base = grids[0];
    for (std::size_t g = 1; g < grids.size(); ++g) {
        if (grids[g].ids != base.ids)
            report.issues.push_back(grids[g].path + ": stock ids misaligned with " + base.path);
        if (grids[g].header != base.header) {
            std::size_t pos = 0;
            while (pos < std::min(grids[g].header.size(), base.header.size()) &&
                   grids[g].header[pos] == base.header[pos])
                ++pos;
            report.issues.push_back(grids[g].path + ": date columns misaligned with " + base.path +
                                    " (first difference at column " + std::to_string(pos + 2) +
                                    ")");
        }
    }
    if (!report.issues.empty()) return report;

    for (std::size_t g = 0; g < grids.size(); ++g) {
        const bool is_price = spec[g].second;
        const Eigen::MatrixXd& m = grids[g].values;
        for (int i = 0; i < m.rows(); ++i) {
            for (int c = 0; c < m.cols(); ++c) {
                const double x = m(i, c);
                const std::string where = grids[g].path + ": stock " +
                                          base.ids[static_cast<std::size_t>(i)] + ", date " +
                                          base.header[static_cast<std::size_t>(c)];
                if (std::isnan(x))
                    report.issues.push_back(where + ": NaN value");
                else if (!std::isfinite(x))
                    report.issues.push_back(where + ": non-finite value");
                else if (is_price && !(x > 0.0))
                    report.issues.push_back(where + ": non-positive price " + format_double(x));
                else if (!is_price && x < 0.0)
                    report.issues.push_back(where + ": negative volume " + format_double(x));
            }
        }
    }
    return report;
}

void save_metrics_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write " + path);
    outf << "days,roc,sr,cps,total_pnl,total_shares,no_trade_days\n";
    outf << report.days << ',' << format_double(report.roc) << ','
         << (report.sharpe_defined ? format_double(report.sharpe) : std::string("nan")) << ','
         << format_double(report.cps) << ',' << format_double(report.total_pnl) << ','
         << format_double(report.total_shares) << ',' << report.no_trade_days << '\n';
}

std::string format_metrics_table(const MetricsReport& report) {
    char buf[160];
    std::ostringstream out;
    out << "days simulated     " << report.days << "\n";
    std::snprintf(buf, sizeof(buf), "ROC (annualized)   %.3f%%\n", report.roc * 100.0);
    out << buf;
    if (report.sharpe_defined)
        std::snprintf(buf, sizeof(buf), "SR (annualized)    %.3f\n", report.sharpe);
    else
        std::snprintf(buf, sizeof(buf), "SR (annualized)    undefined (zero pnl variance)\n");
    out << buf;
    std::snprintf(buf, sizeof(buf), "CPS                %.3f\n", report.cps);
    out << buf;
    std::snprintf(buf, sizeof(buf), "total P&L          %.2f\n", report.total_pnl);
    out << buf;
    std::snprintf(buf, sizeof(buf), "total shares       %.2f\n", report.total_shares);
    out << buf;
    out << "no-trade days      " << report.no_trade_days << "\n";
    return out.str();
}

void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write " + path);
    outf << "K,ROC,SR,CPS\n";
    for (const auto& row : rows) {
        outf << row.k << ',' << format_double(row.metrics.roc) << ','
             << (row.metrics.sharpe_defined ? format_double(row.metrics.sharpe)
                                            : std::string("nan"))
             << ',' << format_double(row.metrics.cps) << '\n';
    }
}

namespace {

// Type-7 quantile: linear interpolation between order statistics.
double quantile7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

SummaryStats summarize_counts(const std::vector<int>& counts) {
    if (counts.empty()) throw DataError("summary of empty count vector");
    std::vector<double> x(counts.begin(), counts.end());
    std::sort(x.begin(), x.end());

    SummaryStats s;
    s.min = x.front();
    s.max = x.back();
    s.q1 = quantile7(x, 0.25);
    s.median = quantile7(x, 0.5);
    s.q3 = quantile7(x, 0.75);
    double sum = 0.0;
    for (double v : x) sum += v;
    s.mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.stdev = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    s.mad = mad(x);
    return s;
}

std::string format_cluster_summary(const MultilevelClassification& classification) {
    std::ostringstream out;
    out << "level  clusters  Min  1stQu  Median  Mean  3rdQu  Max  StDev  MAD\n";
    char buf[200];
    for (int mu = 0; mu < classification.num_levels(); ++mu) {
        const auto sizes = classification.levels[static_cast<std::size_t>(mu)].cluster_sizes();
        const SummaryStats s = summarize_counts(sizes);
        std::snprintf(buf, sizeof(buf),
                      "%-6d %-9d %-4.0f %-6.2f %-7.2f %-5.2f %-6.2f %-4.0f %-6.3f %-6.3f\n", mu + 1,
                      static_cast<int>(sizes.size()), s.min, s.q1, s.median, s.mean, s.q3, s.max,
                      s.stdev, s.mad);
        out << buf;
    }
    return out.str();
}

} // namespace sic
