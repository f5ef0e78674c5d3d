// sic: statistical industry classification toolkit.
//
// Subcommands: classify {bottom-up|top-down|relax|dynamic}, hybrid, erank,
// risk-model, backtest, sweep, validate. Exit codes: 0 success, 1 usage,
// 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "sic/backtest.hpp"
#include "sic/hierarchy.hpp"
#include "sic/hybrid.hpp"
#include "sic/io.hpp"
#include "sic/spectral.hpp"

namespace {

struct ClassifyArgs {
    std::string returns_path;
    std::string out_path;
    std::string json_path;
    std::vector<int> k_vec;
    std::vector<int> l_vec;
    int levels = 3;
    int iter_max = 100;
    int num_try = 100;
    std::uint64_t seed = 0;
    std::vector<int> demean; // 0/1 per level; empty = demean all but level 1
    bool norm_cl_ret = false;
    bool top_down = false;
};

std::vector<bool> demean_flags(const std::vector<int>& demean, std::size_t levels) {
    std::vector<bool> flags;
    if (demean.empty()) {
        flags.assign(levels, true);
        if (!flags.empty()) flags[0] = false;
    } else {
        if (demean.size() != levels)
            throw sic::DataError("--demean needs one 0/1 flag per level");
        for (int v : demean) flags.push_back(v != 0);
    }
    return flags;
}


// Line-based `key = value` config support. Values fill options the command
// line left unset, so explicit flags always win. '#' starts a comment.
std::string config_path; // shared slot; each leaf subcommand registers it

void add_config_option(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file; command-line flags win");
}

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

void apply_config(CLI::App* cmd) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw sic::DataError("cannot open config file " + config_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw sic::DataError(config_path + ":" + std::to_string(line_no) +
                                 ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw sic::DataError(config_path + ":" + std::to_string(line_no) + ": unknown key '" +
                                 key + "'");
        if (opt->count() > 0) continue; // the command line wins
        opt->add_result(value);
        opt->run_callback();
    }
}

void require_seed(const CLI::App* cmd) {
    if (cmd->count("--seed") == 0) throw CLI::RequiredError("--seed");
}

void emit_classification(const ClassifyArgs& args, const std::vector<std::string>& ids,
                         const sic::MultilevelClassification& result) {
    result.validate();
    sic::save_classification_csv(args.out_path, ids, result);
    if (!args.json_path.empty()) sic::save_classification_json(args.json_path, ids, result);
    std::cout << "wrote " << args.out_path << "\n" << sic::format_cluster_summary(result);
}

struct PanelArgs {
    sic::PricePanelPaths paths;
    void add_options(CLI::App* cmd) {
        cmd->add_option("--open", paths.open_unadj, "unadjusted open prices CSV")->required();
        cmd->add_option("--close", paths.close_unadj, "unadjusted close prices CSV")->required();
        cmd->add_option("--open-adj", paths.open_adj, "adjusted open prices CSV")->required();
        cmd->add_option("--close-adj", paths.close_adj, "adjusted close prices CSV")->required();
        cmd->add_option("--volume", paths.volume, "share volume CSV")->required();
    }
};

struct BacktestArgs {
    PanelArgs panel;
    sic::BacktestConfig config;
    std::string classifier = "statistical";
    std::vector<int> k_vec;
    std::vector<int> l_vec;
    int levels = 3;
    bool dynamic_top_down = false;
    std::string out_path;

    void add_options(CLI::App* cmd, bool with_classifier) {
        add_config_option(cmd);
        panel.add_options(cmd);
        cmd->add_option("--days", config.days, "trading days to simulate")->required();
        cmd->add_option("--invest", config.investment, "gross investment level")
            ->capture_default_str();
        cmd->add_option("--top-n", config.top_n, "universe size by dollar volume")
            ->capture_default_str();
        cmd->add_option("--addv-window", config.addv_window, "dollar-volume lookback")
            ->capture_default_str();
        cmd->add_option("--return-window", config.return_window, "risk-model return lookback")
            ->capture_default_str();
        cmd->add_option("--rebalance", config.rebalance_every,
                        "universe/risk refresh interval in days")
            ->capture_default_str();
        cmd->add_option("--bound-fraction", config.bound_fraction,
                        "position bound as a fraction of ADDV")
            ->capture_default_str();
        cmd->add_option("--iter-max", config.classifier.iter_max, "k-means iteration cap")
            ->capture_default_str();
        cmd->add_option("--num-try", config.classifier.num_try, "samplings to aggregate")
            ->capture_default_str();
        cmd->add_option("--seed", config.classifier.seed, "random seed (required)");
        if (with_classifier) {
            cmd->add_option("--classifier", classifier,
                            "statistical|bottom-up|top-down|relax|dynamic")
                ->capture_default_str();
            cmd->add_option("--k", k_vec, "cluster counts for bottom-up/relax")->delimiter(',');
            cmd->add_option("--L", l_vec, "split counts for top-down, least granular first")
                ->delimiter(',');
            cmd->add_option("--levels", levels, "levels for dynamic")->capture_default_str();
            cmd->add_flag("--dynamic-top-down", dynamic_top_down,
                          "dispatch dynamic cluster counts to the top-down builder");
        }
    }

    void finalize_classifier() {
        using Kind = sic::ClassifierConfig::Kind;
        if (classifier == "statistical") {
            config.classifier.kind = Kind::Statistical;
        } else if (classifier == "bottom-up") {
            config.classifier.kind = Kind::BottomUp;
            config.classifier.k_vec = k_vec;
        } else if (classifier == "relax") {
            config.classifier.kind = Kind::Relax;
            config.classifier.k_vec = k_vec;
        } else if (classifier == "top-down") {
            config.classifier.kind = Kind::TopDown;
            config.classifier.l_vec = l_vec;
        } else if (classifier == "dynamic") {
            config.classifier.kind = Kind::Dynamic;
            config.classifier.levels = levels;
            config.classifier.dynamic_top_down = dynamic_top_down;
        } else {
            throw sic::DataError("unknown classifier: " + classifier);
        }
        if ((config.classifier.kind == Kind::BottomUp || config.classifier.kind == Kind::Relax) &&
            config.classifier.k_vec.empty())
            throw sic::DataError("--k is required for this classifier");
        if (config.classifier.kind == Kind::TopDown && config.classifier.l_vec.empty())
            throw sic::DataError("--L is required for the top-down classifier");
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical industry classification toolkit"};
    app.require_subcommand(1);

    // ----- classify -------------------------------------------------------
    auto* classify = app.add_subcommand("classify", "build a classification from a return panel");
    classify->require_subcommand(1);
    ClassifyArgs cls;

    const auto add_common = [&cls](CLI::App* cmd, bool with_seed) {
        add_config_option(cmd);
        cmd->add_option("--returns", cls.returns_path, "return panel CSV")->required();
        cmd->add_option("--out", cls.out_path, "classification CSV output")->required();
        cmd->add_option("--json", cls.json_path, "optional JSON output");
        cmd->add_option("--iter-max", cls.iter_max, "k-means iteration cap")
            ->capture_default_str();
        if (with_seed) {
            cmd->add_option("--num-try", cls.num_try, "samplings to aggregate")
                ->capture_default_str();
            cmd->add_option("--seed", cls.seed, "random seed (required)");
        }
    };

    auto* bottom_up_cmd = classify->add_subcommand("bottom-up", "cluster-of-clusters hierarchy");
    add_common(bottom_up_cmd, true);
    bottom_up_cmd->add_option("--k", cls.k_vec, "cluster counts, most granular first")
        ->required()
        ->delimiter(',');
    bottom_up_cmd->add_option("--demean", cls.demean,
                              "0/1 per level; default demeans all levels except the first")
        ->delimiter(',');
    bottom_up_cmd->add_flag("--norm-cl-ret", cls.norm_cl_ret,
                            "carry normalized instead of raw cluster returns");
    bottom_up_cmd->callback([&] {
        apply_config(bottom_up_cmd);
        require_seed(bottom_up_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(cls.returns_path);
        emit_classification(cls, ret.stock_ids,
                            sic::bottom_up(ret, cls.k_vec, cls.iter_max, cls.num_try,
                                           demean_flags(cls.demean, cls.k_vec.size()),
                                           cls.norm_cl_ret, cls.seed));
    });

    auto* top_down_cmd = classify->add_subcommand("top-down", "recursive splitting hierarchy");
    add_common(top_down_cmd, true);
    top_down_cmd->add_option("--L", cls.l_vec, "split counts, least granular first")
        ->required()
        ->delimiter(',');
    top_down_cmd->callback([&] {
        apply_config(top_down_cmd);
        require_seed(top_down_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(cls.returns_path);
        emit_classification(
            cls, ret.stock_ids,
            sic::top_down(ret, cls.l_vec, cls.iter_max, cls.num_try, cls.seed));
    });

    auto* relax_cmd = classify->add_subcommand("relax", "deterministic relaxation hierarchy");
    add_common(relax_cmd, false);
    relax_cmd->add_option("--k", cls.k_vec, "cluster counts, most granular first")
        ->required()
        ->delimiter(',');
    relax_cmd->add_option("--demean", cls.demean,
                          "0/1 per level; default demeans all levels except the first")
        ->delimiter(',');
    relax_cmd->add_flag("--norm-cl-ret", cls.norm_cl_ret,
                        "carry normalized instead of raw cluster returns");
    relax_cmd->callback([&] {
        apply_config(relax_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(cls.returns_path);
        emit_classification(cls, ret.stock_ids,
                            sic::relaxation_all(ret, cls.k_vec,
                                                demean_flags(cls.demean, cls.k_vec.size()),
                                                cls.norm_cl_ret));
    });

    auto* dynamic_cmd = classify->add_subcommand("dynamic", "eRank-driven cluster counts");
    add_common(dynamic_cmd, true);
    dynamic_cmd->add_option("--levels", cls.levels, "number of levels")->capture_default_str();
    dynamic_cmd->add_flag("--top-down", cls.top_down, "use the top-down builder");
    dynamic_cmd->callback([&] {
        apply_config(dynamic_cmd);
        require_seed(dynamic_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(cls.returns_path);
        emit_classification(cls, ret.stock_ids,
                            sic::classify_dynamic(ret, cls.levels, cls.iter_max, cls.num_try,
                                                  cls.top_down, cls.seed));
    });

    // ----- hybrid ---------------------------------------------------------
    auto* hybrid_cmd =
        app.add_subcommand("hybrid", "split oversized sub-industries of a fundamental taxonomy");
    std::string fundamental_path;
    add_common(hybrid_cmd, true);
    hybrid_cmd->add_option("--fundamental", fundamental_path, "stock_id,subindustry_label CSV")
        ->required();
    hybrid_cmd->callback([&] {
        apply_config(hybrid_cmd);
        require_seed(hybrid_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(cls.returns_path);
        const sic::FundamentalClassification fund =
            sic::load_fundamental_csv(fundamental_path, ret.stock_ids);
        sic::MultilevelClassification result;
        result.levels.push_back(
            sic::improve_classification(ret, fund, cls.iter_max, cls.num_try, cls.seed));
        emit_classification(cls, ret.stock_ids, result);
    });

    // ----- erank ----------------------------------------------------------
    auto* erank_cmd = app.add_subcommand("erank", "effective rank of the correlation spectrum");
    std::string erank_returns, erank_out;
    add_config_option(erank_cmd);
    erank_cmd->add_option("--returns", erank_returns, "return panel CSV")->required();
    erank_cmd->add_option("--out", erank_out, "eigenvalue CSV output");
    erank_cmd->callback([&] {
        apply_config(erank_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(erank_returns);
        const sic::EigenSystem eig = sic::correlation_eigen(ret);
        const double er = sic::erank(eig.values);
        std::cout << "eRank = " << sic::format_double(er) << " over " << eig.count()
                  << " positive eigenvalues\n";
        if (!erank_out.empty()) {
            std::ofstream out(erank_out);
            if (!out) throw sic::DataError("cannot write " + erank_out);
            out << "index,eigenvalue\n";
            for (int a = 0; a < eig.count(); ++a)
                out << (a + 1) << ',' << sic::format_double(eig.values(a)) << '\n';
        }
    });

    // ----- risk-model -----------------------------------------------------
    auto* risk_cmd = app.add_subcommand("risk-model", "statistical factor model covariance");
    std::string risk_returns, risk_out, risk_factors = "auto";
    add_config_option(risk_cmd);
    bool risk_floor = false;
    risk_cmd->add_option("--returns", risk_returns, "return panel CSV")->required();
    risk_cmd->add_option("--out", risk_out, "covariance CSV output")->required();
    risk_cmd->add_option("--factors", risk_factors, "factor count or 'auto'")
        ->capture_default_str();
    risk_cmd->add_flag("--floor", risk_floor, "floor instead of round the auto factor count");
    risk_cmd->callback([&] {
        apply_config(risk_cmd);
        const sic::ReturnMatrix ret = sic::load_return_matrix(risk_returns);
        const int f = risk_factors == "auto" ? sic::kAutoFactors : std::stoi(risk_factors);
        const sic::RiskModel model = sic::statistical_risk_model(ret, f, risk_floor);
        std::ofstream out(risk_out);
        if (!out) throw sic::DataError("cannot write " + risk_out);
        out << "stock_id";
        for (const auto& id : ret.stock_ids) out << ',' << id;
        out << '\n';
        for (int i = 0; i < model.size(); ++i) {
            out << ret.stock_ids[static_cast<std::size_t>(i)];
            for (int j = 0; j < model.size(); ++j)
                out << ',' << sic::format_double(model.gamma(i, j));
            out << '\n';
        }
        std::cout << "wrote " << risk_out << " (" << model.factor_loadings.cols()
                  << " factors)\n";
    });

    // ----- backtest -------------------------------------------------------
    auto* backtest_cmd = app.add_subcommand("backtest", "intraday mean-reversion evaluation");
    BacktestArgs bt;
    bt.add_options(backtest_cmd, true);
    backtest_cmd->add_option("--out", bt.out_path, "metrics CSV output");
    backtest_cmd->callback([&] {
        apply_config(backtest_cmd);
        require_seed(backtest_cmd);
        bt.finalize_classifier();
        const sic::PricePanel panel = sic::load_price_panel(bt.panel.paths);
        const sic::MetricsReport report = sic::run_backtest(panel, bt.config);
        std::cout << sic::format_metrics_table(report);
        if (!bt.out_path.empty()) sic::save_metrics_csv(bt.out_path, report);
    });

    // ----- sweep ----------------------------------------------------------
    auto* sweep_cmd =
        app.add_subcommand("sweep", "backtest a list of single-level cluster counts");
    BacktestArgs sw;
    std::vector<int> sweep_ks;
    std::string sweep_out;
    sw.add_options(sweep_cmd, false);
    sweep_cmd->add_option("--K", sweep_ks, "cluster counts to sweep")->required()->delimiter(',');
    sweep_cmd->add_option("--out", sweep_out, "K,ROC,SR,CPS output CSV")->required();
    sweep_cmd->callback([&] {
        apply_config(sweep_cmd);
        require_seed(sweep_cmd);
        const sic::PricePanel panel = sic::load_price_panel(sw.panel.paths);
        std::vector<sic::SweepRow> rows;
        for (int k : sweep_ks) {
            sic::BacktestConfig config = sw.config;
            config.classifier.kind = sic::ClassifierConfig::Kind::BottomUp;
            config.classifier.k_vec = {k};
            sic::SweepRow row;
            row.k = k;
            row.metrics = sic::run_backtest(panel, config);
            std::cout << "K = " << k << ": ROC " << row.metrics.roc << ", SR "
                      << (row.metrics.sharpe_defined ? row.metrics.sharpe : 0.0) << ", CPS "
                      << row.metrics.cps << "\n";
            rows.push_back(std::move(row));
        }
        sic::save_sweep_csv(sweep_out, rows);
    });

    // ----- validate -------------------------------------------------------
    auto* validate_cmd = app.add_subcommand("validate", "check a price panel file set");
    PanelArgs vp;
    add_config_option(validate_cmd);
    vp.add_options(validate_cmd);
    bool validate_failed = false;
    validate_cmd->callback([&] {
        apply_config(validate_cmd);
        const sic::PanelReport report = sic::validate_panel(vp.paths);
        if (report.ok()) {
            std::cout << "panel ok\n";
        } else {
            for (const auto& issue : report.issues) std::cout << issue << "\n";
            validate_failed = true;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const sic::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const sic::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return validate_failed ? 2 : 0;
}
