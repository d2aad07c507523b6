#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairsens/error.hpp"
#include "fairsens/experiments.hpp"
#include "fairsens/external_model.hpp"
#include "fairsens/fairness.hpp"
#include "fairsens/report.hpp"

namespace fs = fairsens;

namespace {

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) fs::fail(fs::errc::invalid_argument, "cannot open output file '" + out_path + "'");
    f << text;
}

bool is_discrete_column(const std::vector<double>& v, std::size_t max_levels = 12) {
    std::set<double> uniq(v.begin(), v.end());
    return uniq.size() <= max_levels;
}

struct AuditOptions {
    std::string input;
    std::vector<std::string> sensitive;
    std::string target;
    std::string prediction;
    std::string loss_column;
    std::string loss_kind = "squared";
    std::vector<std::string> measures;
    double epsilon = 0.02;
    std::int64_t n_mc = 20000;
    std::uint64_t seed = 0;
    std::uint64_t tie_seed = 0;
    int bootstrap = 0;
    double level = 0.95;
    std::string model_spec;
    std::string model_cmd;
    int batch_size = 256;
    int timeout_ms = 60000;
    std::string format = "json";
    std::string out;
};

int run_audit(const AuditOptions& opt) {
    if (opt.sensitive.empty())
        fs::fail(fs::errc::schema_error, "audit needs at least one --sensitive column");

    fs::CsvSchema schema;
    for (const auto& s : opt.sensitive) schema.roles[s] = fs::Role::sensitive;
    if (!opt.target.empty()) schema.roles[opt.target] = fs::Role::target;
    if (!opt.prediction.empty()) schema.roles[opt.prediction] = fs::Role::prediction;
    if (!opt.loss_column.empty()) schema.roles[opt.loss_column] = fs::Role::loss;
    const fs::DataTable table = fs::load_table_file(opt.input, schema);

    // model inputs: feature + sensitive columns, in table order
    std::vector<std::string> input_names;
    for (const auto& c : table.columns())
        if (c.role == fs::Role::feature || c.role == fs::Role::sensitive)
            input_names.push_back(c.name);
    std::vector<int> sensitive_idx;
    for (std::size_t j = 0; j < input_names.size(); ++j)
        if (table.column(input_names[j]).role == fs::Role::sensitive)
            sensitive_idx.push_back(static_cast<int>(j));

    std::unique_ptr<fs::ExternalModel> external;
    fs::ModelFn model_fn;
    if (!opt.model_cmd.empty()) {
        external = std::make_unique<fs::ExternalModel>(
            fs::ExternalModelProtocol{opt.model_cmd, opt.batch_size, opt.timeout_ms});
        model_fn = external->as_fn();
    }

    std::optional<fs::GaussianModel> model;
    std::string model_source = "none";
    if (!opt.model_spec.empty()) {
        model = fs::load_model_spec_file(opt.model_spec);
        if (model->dimension() != static_cast<int>(input_names.size()))
            fs::fail(fs::errc::length_mismatch,
                     "model spec dimension != number of feature/sensitive columns");
        model_source = "spec_file";
    } else if (model_fn) {
        model = fs::fit_gaussian_copula(table);
        model_source = "fitted_copula";
    }

    // predictions: an explicit column, else one query of the external model
    std::vector<double> predictions;
    if (!opt.prediction.empty()) {
        predictions = table.column(opt.prediction).values;
    } else if (model_fn) {
        predictions = model_fn(table.matrix(input_names));
    } else if (opt.loss_column.empty()) {
        fs::fail(fs::errc::missing_model,
                 "audit needs --prediction, --loss-column or --model-cmd");
    }

    std::vector<std::string> measures = opt.measures;
    if (measures.empty()) {
        if (!predictions.empty()) measures.push_back("statistical_parity");
        if (!predictions.empty() && !opt.target.empty()) {
            measures.push_back("equality_of_odds");
            measures.push_back("disparate_mistreatment");
        }
        if (!opt.loss_column.empty()) measures.push_back("disparate_mistreatment");
        if (model_fn && model) {
            measures.push_back("disparate_treatment");
            measures.push_back("causal");
            if (sensitive_idx.size() >= 2) measures.push_back("intersectional");
        }
        measures.push_back("cvm");
        std::sort(measures.begin(), measures.end());
        measures.erase(std::unique(measures.begin(), measures.end()), measures.end());
    }

    std::vector<std::span<const double>> s_cols;
    bool all_sensitive_discrete = true;
    for (const auto& name : opt.sensitive) {
        const auto& v = table.column(name).values;
        s_cols.emplace_back(v);
        if (!is_discrete_column(v)) all_sensitive_discrete = false;
    }

    fs::AuditReport report;
    report.n_rows = table.n_rows();
    for (const auto& c : table.columns()) report.column_names.push_back(c.name);
    report.dataset_hash = table.fingerprint();
    report.seed = opt.seed;
    report.tie_seed = opt.tie_seed;
    report.n_mc = opt.n_mc;
    report.epsilon = opt.epsilon;
    report.model_source = model_source;
    if (model_source == "fitted_copula")
        report.notes.push_back(
            "pick-freeze indices assume a Gaussian copula fitted to the observed inputs");

    const fs::BootstrapOptions boot{opt.bootstrap, opt.level, opt.seed};

    for (const auto& m : measures) {
        if (m == "statistical_parity") {
            if (predictions.empty())
                fs::fail(fs::errc::missing_model, "statistical_parity needs predictions");
            if (all_sensitive_discrete) {
                fs::StatisticalParityResult r =
                    fs::statistical_parity(predictions, s_cols, opt.sensitive, opt.epsilon, boot);
                report.verdicts.push_back({r.verdict, r.di_check});
            } else if (model_fn && model) {
                report.verdicts.push_back(
                    {fs::statistical_parity_model(model_fn, *model, sensitive_idx, opt.sensitive,
                                                  opt.n_mc, opt.seed, opt.epsilon),
                     std::nullopt});
            } else {
                report.verdicts.push_back(
                    {fs::statistical_parity_rank(table, opt.prediction, opt.sensitive,
                                                 opt.epsilon, opt.tie_seed, boot),
                     std::nullopt});
            }
        } else if (m == "disparate_treatment") {
            if (!model_fn || !model)
                fs::fail(fs::errc::missing_model_function,
                         "disparate_treatment needs --model-cmd (and a model)");
            report.verdicts.push_back(
                {fs::disparate_treatment(model_fn, *model, sensitive_idx, opt.sensitive,
                                         opt.n_mc, opt.seed, opt.epsilon),
                 std::nullopt});
        } else if (m == "equality_of_odds") {
            if (opt.target.empty())
                fs::fail(fs::errc::schema_error, "equality_of_odds needs --target");
            if (predictions.empty())
                fs::fail(fs::errc::missing_model, "equality_of_odds needs predictions");
            report.verdicts.push_back(
                {fs::equality_of_odds(predictions, s_cols, opt.sensitive,
                                      table.column(opt.target).values, opt.epsilon, opt.tie_seed,
                                      boot),
                 std::nullopt});
        } else if (m == "disparate_mistreatment") {
            if (!opt.loss_column.empty()) {
                fs::StatisticalParityResult r = fs::statistical_parity(
                    table.column(opt.loss_column).values, s_cols, opt.sensitive, opt.epsilon,
                    boot);
                r.verdict.measure = fs::MeasureKind::avoiding_disparate_mistreatment;
                r.verdict.target = "loss";
                report.verdicts.push_back({r.verdict, r.di_check});
            } else {
                if (opt.target.empty() || predictions.empty())
                    fs::fail(fs::errc::schema_error,
                             "disparate_mistreatment needs --target and predictions, or "
                             "--loss-column");
                const fs::LossKind kind = opt.loss_kind == "zero_one" ? fs::LossKind::zero_one
                                                                      : fs::LossKind::squared;
                fs::StatisticalParityResult r = fs::disparate_mistreatment(
                    predictions, table.column(opt.target).values, s_cols, opt.sensitive, kind,
                    opt.epsilon, boot);
                report.verdicts.push_back({r.verdict, r.di_check});
            }
        } else if (m == "intersectional") {
            if (!model_fn || !model)
                fs::fail(fs::errc::missing_model_function,
                         "intersectional needs --model-cmd (and a model)");
            report.intersectional = fs::intersectional_audit(
                model_fn, *model, sensitive_idx, opt.sensitive, opt.n_mc, opt.seed, opt.epsilon);
        } else if (m == "causal") {
            if (!model_fn || !model)
                fs::fail(fs::errc::missing_model_function,
                         "causal screening needs --model-cmd (and a model)");
            for (std::size_t k = 0; k < sensitive_idx.size(); ++k) {
                const int f[] = {sensitive_idx[k]};
                const fs::SobolQuartet q =
                    fs::estimate_group_quartet(*model, model_fn, f, opt.n_mc, opt.seed);
                report.quartets.push_back({opt.sensitive[k], q});
                report.causal.push_back({opt.sensitive[k], fs::causal_screen(q, opt.epsilon)});
            }
        } else if (m == "cvm") {
            if (predictions.empty()) continue;
            std::string pred_name = opt.prediction.empty() ? "model_predictions" : opt.prediction;
            fs::DataTable cvm_table = table;
            if (opt.prediction.empty()) {
                std::vector<fs::Column> cols = table.columns();
                cols.push_back({pred_name, fs::Role::prediction, predictions});
                cvm_table = fs::DataTable(std::move(cols));
            }
            // supplementary diagnostics: a degenerate estimate is recorded
            // as a note, not a failed audit
            for (const auto& s : opt.sensitive) {
                try {
                    fs::NamedCvm classical{
                        s, fs::cvm_classical(cvm_table, pred_name, {s}, opt.tie_seed)};
                    report.cvm_estimates.push_back(classical);
                } catch (const fs::Error& e) {
                    report.notes.push_back("cvm classical index for '" + s + "' skipped: " +
                                           e.what());
                }
                if (input_names.size() >= 2) {
                    try {
                        fs::NamedCvm ind{
                            s, fs::cvm_independent(cvm_table, pred_name, s, opt.tie_seed)};
                        report.cvm_estimates.push_back(ind);
                    } catch (const fs::Error& e) {
                        report.notes.push_back("cvm independent index for '" + s +
                                               "' skipped: " + e.what());
                    }
                }
            }
        } else {
            fs::fail(fs::errc::invalid_argument, "unknown measure '" + m + "'");
        }
    }

    write_output(opt.format == "csv" ? fs::to_csv(report) : fs::to_json(report), opt.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensitivity-index fairness auditing"};
    app.require_subcommand(1);

    // synthetic
    fs::ExperimentSpec spec;
    int coverage_replicates = 0;
    std::int64_t coverage_n = 2000;
    double level = 0.95;
    std::string format = "json", out_path;
    auto* synth = app.add_subcommand("synthetic", "run a synthetic benchmark");
    synth->add_option("--experiment", spec.id, "experiment id (1, 2 or 3)")->required();
    synth->add_option("--n", spec.n_mc, "Monte-Carlo sample size");
    synth->add_option("--seed", spec.seed, "random seed");
    synth->add_option("--coverage", coverage_replicates, "run a CI coverage study instead");
    synth->add_option("--coverage-n", coverage_n, "per-replicate sample size");
    synth->add_option("--level", level, "confidence level");
    synth->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    synth->add_option("--out", out_path, "output path (default stdout)");

    // audit
    AuditOptions audit;
    auto* aud = app.add_subcommand("audit", "audit a CSV dataset");
    aud->add_option("input", audit.input, "input CSV file")->required();
    aud->add_option("--sensitive", audit.sensitive, "sensitive column (repeatable)");
    aud->add_option("--target", audit.target, "target column");
    aud->add_option("--prediction", audit.prediction, "prediction column");
    aud->add_option("--loss-column", audit.loss_column, "precomputed loss column");
    aud->add_option("--loss", audit.loss_kind, "loss kind for disparate_mistreatment")
        ->check(CLI::IsMember({"zero_one", "squared"}));
    aud->add_option("--measure", audit.measures,
                    "measure (repeatable): statistical_parity, disparate_treatment, "
                    "equality_of_odds, disparate_mistreatment, intersectional, causal, cvm");
    aud->add_option("--epsilon", audit.epsilon, "fairness tolerance");
    aud->add_option("--n-mc", audit.n_mc, "pick-freeze sample size");
    aud->add_option("--seed", audit.seed, "random seed");
    aud->add_option("--tie-seed", audit.tie_seed, "nearest-neighbor tie seed");
    aud->add_option("--bootstrap", audit.bootstrap, "bootstrap replicates (0 = off)");
    aud->add_option("--level", audit.level, "confidence level");
    aud->add_option("--model", audit.model_spec, "Gaussian model spec JSON");
    aud->add_option("--model-cmd", audit.model_cmd, "external model command");
    aud->add_option("--batch-size", audit.batch_size, "external model batch size");
    aud->add_option("--timeout-ms", audit.timeout_ms, "external model timeout per batch");
    aud->add_option("--format", audit.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    aud->add_option("--out", audit.out, "output path (default stdout)");

    // sobol: quartet of one feature under a model spec
    std::string sobol_model, sobol_cmd, sobol_weights;
    int sobol_feature = 0;
    std::int64_t sobol_n = 20000;
    std::uint64_t sobol_seed = 0;
    auto* sob = app.add_subcommand("sobol", "estimate one feature's index quartet");
    sob->add_option("--model", sobol_model, "Gaussian model spec JSON")->required();
    sob->add_option("--feature", sobol_feature, "feature index (0-based)")->required();
    sob->add_option("--weights", sobol_weights, "comma-separated linear weights");
    sob->add_option("--model-cmd", sobol_cmd, "external model command");
    sob->add_option("--n", sobol_n, "sample size");
    sob->add_option("--seed", sobol_seed, "random seed");
    sob->add_option("--level", level, "confidence level");
    sob->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sob->add_option("--out", out_path, "output path (default stdout)");

    // cvm: observational rank indices
    std::string cvm_input, cvm_y, cvm_feature;
    std::uint64_t cvm_tie_seed = 0;
    int cvm_bootstrap = 0;
    auto* cvm = app.add_subcommand("cvm", "rank-based dependence indices from a CSV");
    cvm->add_option("input", cvm_input, "input CSV file")->required();
    cvm->add_option("--y", cvm_y, "output column")->required();
    cvm->add_option("--feature", cvm_feature, "feature column (default: every feature)");
    cvm->add_option("--tie-seed", cvm_tie_seed, "nearest-neighbor tie seed");
    cvm->add_option("--bootstrap", cvm_bootstrap, "bootstrap replicates (0 = off)");
    cvm->add_option("--level", level, "confidence level");
    cvm->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cvm->add_option("--out", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) {
            std::string text;
            if (coverage_replicates > 0) {
                const auto rows = fs::coverage_study(spec, coverage_replicates, coverage_n, level);
                text = format == "csv" ? fs::to_csv(rows, spec, coverage_n, level)
                                       : fs::to_json(rows, spec, coverage_n, level);
            } else {
                const auto rows = fs::run_experiment(spec);
                text = format == "csv" ? fs::to_csv(rows, spec) : fs::to_json(rows, spec);
            }
            write_output(text, out_path);
            return 0;
        }
        if (aud->parsed()) return run_audit(audit);
        if (sob->parsed()) {
            const fs::GaussianModel model = fs::load_model_spec_file(sobol_model);
            fs::ModelFn fn;
            std::unique_ptr<fs::ExternalModel> external;
            std::optional<fs::TheoreticalQuartet> theory;
            if (!sobol_weights.empty()) {
                std::vector<double> w;
                std::stringstream ss(sobol_weights);
                std::string tok;
                while (std::getline(ss, tok, ',')) w.push_back(std::stod(tok));
                Eigen::VectorXd wv =
                    Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
                fn = fs::linear_model_fn(wv);
                theory = fs::theoretical_sobol_linear(wv, model, sobol_feature);
            } else if (!sobol_cmd.empty()) {
                external = std::make_unique<fs::ExternalModel>(
                    fs::ExternalModelProtocol{sobol_cmd, 256, 60000});
                fn = external->as_fn();
            } else {
                fs::fail(fs::errc::missing_model_function, "need --weights or --model-cmd");
            }
            const fs::SobolQuartet q =
                fs::estimate_feature_quartet(model, fn, sobol_feature, sobol_n, sobol_seed, level);
            fs::ExperimentRow row;
            row.variable = "feature" + std::to_string(sobol_feature);
            row.estimate = q;
            if (theory) row.theory = *theory;
            fs::ExperimentSpec pseudo{0, sobol_n, sobol_seed};
            const std::vector<fs::ExperimentRow> rows{row};
            write_output(format == "csv" ? fs::to_csv(rows, pseudo) : fs::to_json(rows, pseudo),
                         out_path);
            return 0;
        }
        if (cvm->parsed()) {
            const fs::DataTable table = fs::load_table_file(cvm_input, {});
            if (!table.has_column(cvm_y))
                fs::fail(fs::errc::schema_error, "no column named '" + cvm_y + "'");
            std::vector<std::string> features;
            if (!cvm_feature.empty()) {
                features.push_back(cvm_feature);
            } else {
                for (const auto& c : table.columns())
                    if (c.name != cvm_y) features.push_back(c.name);
            }
            fs::AuditReport report;
            report.n_rows = table.n_rows();
            for (const auto& c : table.columns()) report.column_names.push_back(c.name);
            report.dataset_hash = table.fingerprint();
            report.tie_seed = cvm_tie_seed;
            report.model_source = "none";
            for (const auto& f : features) {
                fs::CvmEstimate classical = fs::cvm_classical(table, cvm_y, {f}, cvm_tie_seed);
                if (cvm_bootstrap > 0) {
                    const std::string y_name = cvm_y, f_name = f;
                    classical.ci = fs::bootstrap_ci(
                        [&y_name, &f_name](const fs::DataTable& t, std::uint64_t ts) {
                            return fs::cvm_classical(t, y_name, {f_name}, ts).value;
                        },
                        table, cvm_bootstrap, level, cvm_tie_seed);
                }
                report.cvm_estimates.push_back({f, classical});
                if (table.n_cols() >= 3) {
                    fs::CvmEstimate ind = fs::cvm_independent(table, cvm_y, f, cvm_tie_seed);
                    if (cvm_bootstrap > 0) {
                        const std::string y_name = cvm_y, f_name = f;
                        ind.ci = fs::bootstrap_ci(
                            [&y_name, &f_name](const fs::DataTable& t, std::uint64_t ts) {
                                return fs::cvm_independent(t, y_name, f_name, ts).value;
                            },
                            table, cvm_bootstrap, level, cvm_tie_seed);
                    }
                    report.cvm_estimates.push_back({f, ind});
                }
            }
            write_output(format == "csv" ? fs::to_csv(report) : fs::to_json(report), out_path);
            return 0;
        }
    } catch (const fs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fs::is_validation_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
