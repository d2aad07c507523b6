#include "fairsens/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairsens/error.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

const char* measure_name(MeasureKind m) {
    switch (m) {
        case MeasureKind::statistical_parity: return "statistical_parity";
        case MeasureKind::avoiding_disparate_treatment: return "avoiding_disparate_treatment";
        case MeasureKind::equality_of_odds: return "equality_of_odds";
        case MeasureKind::avoiding_disparate_mistreatment:
            return "avoiding_disparate_mistreatment";
    }
    return "unknown";
}

const char* loss_name(LossKind l) {
    switch (l) {
        case LossKind::zero_one: return "zero_one";
        case LossKind::squared: return "squared";
    }
    return "unknown";
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::fair: return "fair";
        case Verdict::approximately_fair: return "approximately_fair";
        case Verdict::unfair: return "unfair";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

const char* causal_finding_name(CausalFindingKind k) {
    switch (k) {
        case CausalFindingKind::no_path: return "no_path";
        case CausalFindingKind::no_direct_edge: return "no_direct_edge";
        case CausalFindingKind::direct_influence_possible:
            return "direct_influence_possible";
    }
    return "unknown";
}

Verdict classify(const IndexEstimate& index, double epsilon) {
    if (index.ci_high <= epsilon)
        return index.value == 0.0 ? Verdict::fair : Verdict::approximately_fair;
    if (index.ci_low > epsilon) return Verdict::unfair;
    return Verdict::inconclusive;
}

namespace {

void check_aligned(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) fail(errc::length_mismatch, what);
}

// Group key -> (count, sum) over a tuple of discrete columns.
std::map<std::vector<double>, std::pair<std::int64_t, double>> group_cells(
    std::span<const double> values, const std::vector<std::span<const double>>& keys) {
    std::map<std::vector<double>, std::pair<std::int64_t, double>> cells;
    const auto n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> key;
        key.reserve(keys.size());
        for (const auto& k : keys) key.push_back(k[i]);
        auto& cell = cells[key];
        cell.first += 1;
        cell.second += values[i];
    }
    return cells;
}

// Var(E[f | groups]) with population weights.
double grouped_between_variance(std::span<const double> values,
                                const std::vector<std::span<const double>>& keys) {
    const auto cells = group_cells(values, keys);
    const double total_mean = stats::mean(values);
    const auto n = static_cast<double>(values.size());
    double v = 0.0;
    for (const auto& [key, cell] : cells) {
        (void)key;
        const double m = cell.second / static_cast<double>(cell.first);
        v += (static_cast<double>(cell.first) / n) * (m - total_mean) * (m - total_mean);
    }
    return v;
}

bool is_binary(std::span<const double> v) {
    bool seen0 = false, seen1 = false;
    for (double x : v) {
        if (x == 0.0) seen0 = true;
        else if (x == 1.0) seen1 = true;
        else return false;
    }
    return seen0 && seen1;
}

FairnessVerdict degenerate_fair(MeasureKind measure, const std::vector<std::string>& sensitive,
                                double epsilon, std::int64_t n, const char* what) {
    FairnessVerdict v;
    v.measure = measure;
    v.sensitive = sensitive;
    v.index = point_estimate(0.0, Method::plugin, n, 0);
    v.epsilon = epsilon;
    v.verdict = Verdict::fair;
    v.note = std::string("fair-by-degeneracy: ") + what +
             " is constant, so independence from the sensitive features holds vacuously";
    return v;
}

} // namespace

StatisticalParityResult statistical_parity(std::span<const double> predictions,
                                           const std::vector<std::span<const double>>& sensitive,
                                           const std::vector<std::string>& sensitive_names,
                                           double epsilon, const BootstrapOptions& bootstrap) {
    if (sensitive.empty()) fail(errc::schema_error, "no sensitive columns");
    for (const auto& s : sensitive) check_aligned(predictions, s, "sensitive column length");
    const auto n = static_cast<std::int64_t>(predictions.size());
    if (n < 1) fail(errc::empty_input, "no rows");

    StatisticalParityResult out;
    const double var_f = stats::variance(predictions, 0);
    if (var_f <= 0.0) {
        out.verdict = degenerate_fair(MeasureKind::statistical_parity, sensitive_names, epsilon,
                                      n, "the prediction column");
        return out;
    }

    const double index_value = grouped_between_variance(predictions, sensitive) / var_f;
    IndexEstimate est = point_estimate(index_value, Method::plugin, n, bootstrap.seed);

    if (bootstrap.replicates > 0) {
        std::vector<Column> cols;
        cols.push_back({"f", Role::prediction,
                        std::vector<double>(predictions.begin(), predictions.end())});
        for (std::size_t j = 0; j < sensitive.size(); ++j)
            cols.push_back({"s" + std::to_string(j), Role::sensitive,
                            std::vector<double>(sensitive[j].begin(), sensitive[j].end())});
        const DataTable t(std::move(cols));
        const std::size_t n_sens = sensitive.size();
        TableEstimator fn = [n_sens](const DataTable& tab, std::uint64_t) {
            std::vector<std::span<const double>> s_cols;
            for (std::size_t j = 0; j < n_sens; ++j)
                s_cols.emplace_back(tab.column("s" + std::to_string(j)).values);
            const auto& f = tab.column("f").values;
            const double v = stats::variance(f, 0);
            if (v <= 0.0) fail(errc::degenerate_variance, "constant resample");
            return grouped_between_variance(f, s_cols) / v;
        };
        IndexEstimate boot = bootstrap_ci(fn, t, bootstrap.replicates, bootstrap.level,
                                          bootstrap.seed);
        boot.value = index_value;
        est = boot;
    }

    FairnessVerdict v;
    v.measure = MeasureKind::statistical_parity;
    v.sensitive = sensitive_names;
    v.index = est;
    v.epsilon = epsilon;
    v.verdict = classify(est, epsilon);
    out.verdict = v;

    if (sensitive.size() == 1 && is_binary(sensitive[0]) && is_binary(predictions)) {
        DiCheck di;
        double n1 = 0.0, sum1 = 0.0, sum0 = 0.0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (sensitive[0][i] == 1.0) {
                n1 += 1.0;
                sum1 += predictions[i];
            } else {
                sum0 += predictions[i];
            }
        }
        const double n_d = static_cast<double>(n);
        di.p_hat = n1 / n_d;
        if (n1 > 0.0 && n1 < n_d) {
            di.di = std::abs(sum1 / n1 - sum0 / (n_d - n1));
            di.identity_value = di.p_hat * (1.0 - di.p_hat) * di.di * di.di / var_f;
            out.di_check = di;
        }
    }
    return out;
}

FairnessVerdict statistical_parity_model(const ModelFn& fn, const GaussianModel& model,
                                         std::span<const int> sensitive_features,
                                         const std::vector<std::string>& sensitive_names,
                                         std::int64_t n_mc, std::uint64_t seed, double epsilon) {
    if (!fn) fail(errc::missing_model_function, "statistical parity via pick-freeze needs f");
    const SobolQuartet q = estimate_group_quartet(model, fn, sensitive_features, n_mc, seed);
    FairnessVerdict v;
    v.measure = MeasureKind::statistical_parity;
    v.sensitive = sensitive_names;
    v.index = q.sob;
    v.epsilon = epsilon;
    v.verdict = classify(q.sob, epsilon);
    return v;
}

FairnessVerdict statistical_parity_rank(const DataTable& table,
                                        const std::string& prediction_column,
                                        const std::vector<std::string>& sensitive_names,
                                        double epsilon, std::uint64_t tie_seed,
                                        const BootstrapOptions& bootstrap) {
    CvmEstimate cvm = cvm_classical(table, prediction_column, sensitive_names, tie_seed);
    IndexEstimate est = point_estimate(cvm.value, Method::plugin, cvm.n, tie_seed);
    if (bootstrap.replicates > 0) {
        TableEstimator est_fn = [&prediction_column, &sensitive_names](const DataTable& t,
                                                                       std::uint64_t ts) {
            return cvm_classical(t, prediction_column, sensitive_names, ts).value;
        };
        IndexEstimate boot =
            bootstrap_ci(est_fn, table, bootstrap.replicates, bootstrap.level, bootstrap.seed);
        est = boot;
    }
    FairnessVerdict v;
    v.measure = MeasureKind::statistical_parity;
    v.sensitive = sensitive_names;
    v.index = est;
    v.epsilon = epsilon;
    v.verdict = classify(est, epsilon);
    v.note = "rank-statistic route (no model function available)";
    return v;
}

FairnessVerdict disparate_treatment(const ModelFn& fn, const GaussianModel& model,
                                    std::span<const int> sensitive_features,
                                    const std::vector<std::string>& sensitive_names,
                                    std::int64_t n_mc, std::uint64_t seed, double epsilon) {
    if (!fn)
        fail(errc::missing_model_function,
             "disparate treatment needs query access to the model");
    const SobolQuartet q = estimate_group_quartet(model, fn, sensitive_features, n_mc, seed);
    FairnessVerdict v;
    v.measure = MeasureKind::avoiding_disparate_treatment;
    v.sensitive = sensitive_names;
    v.index = q.sob_total;
    v.epsilon = epsilon;
    v.verdict = classify(q.sob_total, epsilon);
    return v;
}

FairnessVerdict equality_of_odds(std::span<const double> predictions,
                                 const std::vector<std::span<const double>>& sensitive,
                                 const std::vector<std::string>& sensitive_names,
                                 std::span<const double> target, double epsilon,
                                 std::uint64_t tie_seed, const BootstrapOptions& bootstrap) {
    check_aligned(predictions, target, "target length");
    for (const auto& s : sensitive) check_aligned(predictions, s, "sensitive column length");
    const auto n = static_cast<std::int64_t>(predictions.size());

    // discrete when the target takes few distinct values
    std::vector<double> uniq(target.begin(), target.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    const bool discrete = static_cast<std::int64_t>(uniq.size()) * 3 <= n &&
                          uniq.size() <= 12;

    FairnessVerdict v;
    v.measure = MeasureKind::equality_of_odds;
    v.sensitive = sensitive_names;
    v.epsilon = epsilon;

    if (discrete) {
        const double value = grouped_conditional_index(predictions, sensitive, target);
        IndexEstimate est = point_estimate(value, Method::plugin, n, tie_seed);
        if (bootstrap.replicates > 0) {
            std::vector<Column> cols;
            cols.push_back({"f", Role::prediction,
                            std::vector<double>(predictions.begin(), predictions.end())});
            cols.push_back({"y", Role::target, std::vector<double>(target.begin(), target.end())});
            for (std::size_t j = 0; j < sensitive.size(); ++j)
                cols.push_back({"s" + std::to_string(j), Role::sensitive,
                                std::vector<double>(sensitive[j].begin(), sensitive[j].end())});
            const DataTable t(std::move(cols));
            const std::size_t n_sens = sensitive.size();
            TableEstimator est_fn = [n_sens](const DataTable& tab, std::uint64_t) {
                std::vector<std::span<const double>> s_cols;
                for (std::size_t j = 0; j < n_sens; ++j)
                    s_cols.emplace_back(tab.column("s" + std::to_string(j)).values);
                return grouped_conditional_index(tab.column("f").values, s_cols,
                                                 tab.column("y").values);
            };
            IndexEstimate boot =
                bootstrap_ci(est_fn, t, bootstrap.replicates, bootstrap.level, bootstrap.seed);
            boot.value = value;
            est = boot;
        }
        v.index = est;
        v.note = "grouped plug-in over discrete target levels";
    } else {
        Eigen::MatrixXd s_mat(n, static_cast<Eigen::Index>(sensitive.size()));
        for (std::size_t j = 0; j < sensitive.size(); ++j)
            for (std::int64_t i = 0; i < n; ++i)
                s_mat(i, static_cast<Eigen::Index>(j)) = sensitive[j][static_cast<std::size_t>(i)];
        Eigen::MatrixXd z(n, 1);
        for (std::int64_t i = 0; i < n; ++i) z(i, 0) = target[static_cast<std::size_t>(i)];
        const CvmEstimate t_est = conditional_T(predictions, s_mat, z, tie_seed);
        v.index = point_estimate(t_est.value, Method::plugin, n, tie_seed);
        v.note = "conditional rank statistic (continuous target)";
    }
    v.verdict = classify(v.index, epsilon);
    return v;
}

std::vector<double> compute_loss(std::span<const double> predictions,
                                 std::span<const double> target, LossKind loss) {
    check_aligned(predictions, target, "target length");
    std::vector<double> out(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (loss == LossKind::zero_one) {
            out[i] = predictions[i] == target[i] ? 0.0 : 1.0;
        } else {
            const double d = predictions[i] - target[i];
            out[i] = d * d;
        }
    }
    return out;
}

StatisticalParityResult disparate_mistreatment(
    std::span<const double> predictions, std::span<const double> target,
    const std::vector<std::span<const double>>& sensitive,
    const std::vector<std::string>& sensitive_names, LossKind loss, double epsilon,
    const BootstrapOptions& bootstrap) {
    const std::vector<double> loss_col = compute_loss(predictions, target, loss);
    StatisticalParityResult r =
        statistical_parity(loss_col, sensitive, sensitive_names, epsilon, bootstrap);
    r.verdict.measure = MeasureKind::avoiding_disparate_mistreatment;
    r.verdict.target = "loss";
    if (r.verdict.note.find("fair-by-degeneracy") != std::string::npos)
        r.verdict.note = "fair-by-degeneracy: the loss is constant (e.g. a perfect predictor), "
                         "so independence from the sensitive features holds vacuously";
    return r;
}

CausalFinding causal_screen(const SobolQuartet& quartet, double epsilon) {
    CausalFinding f;
    f.sob_total = quartet.sob_total;
    f.sob_total_ind = quartet.sob_total_ind;
    f.epsilon = epsilon;
    if (quartet.sob_total.ci_high <= epsilon) {
        f.kind = CausalFindingKind::no_path;
        f.note = "total index compatible with zero: no path from the sensitive feature "
                 "to the output";
    } else if (quartet.sob_total_ind.ci_high <= epsilon) {
        f.kind = CausalFindingKind::no_direct_edge;
        f.note = "independent total index compatible with zero while the total index is "
                 "not: influence flows through mediator features only";
    } else {
        f.kind = CausalFindingKind::direct_influence_possible;
        f.note = "independent total index above the tolerance: a direct edge cannot be "
                 "ruled out (and is never claimed)";
    }
    return f;
}

IntersectionalFindings intersectional_audit(const ModelFn& fn, const GaussianModel& model,
                                            std::span<const int> sensitive_features,
                                            const std::vector<std::string>& sensitive_names,
                                            std::int64_t n_mc, std::uint64_t seed,
                                            double epsilon) {
    if (sensitive_features.size() < 2)
        fail(errc::invalid_argument, "intersectional audit needs at least two sensitive features");
    if (!fn) fail(errc::missing_model_function, "intersectional audit needs query access");

    IntersectionalFindings out;
    out.sensitive_names = sensitive_names;
    out.epsilon = epsilon;
    out.group = estimate_group_quartet(model, fn, sensitive_features, n_mc, seed);
    for (int f : sensitive_features)
        out.singletons.push_back(estimate_feature_quartet(model, fn, f, n_mc, seed));

    // A null singleton total index means that feature contributes nothing in
    // any combination, so dropping it from the tuple must leave the group
    // total index unchanged (up to noise).
    for (std::size_t i = 0; i < out.singletons.size(); ++i) {
        const auto& s = out.singletons[i];
        if (s.sob_total.ci_high > epsilon) continue;
        std::vector<int> reduced;
        for (std::size_t k = 0; k < sensitive_features.size(); ++k)
            if (k != i) reduced.push_back(sensitive_features[k]);
        const SobolQuartet rq = reduced.size() == 1
                                    ? estimate_feature_quartet(model, fn, reduced[0], n_mc, seed)
                                    : estimate_group_quartet(model, fn, reduced, n_mc, seed);
        const double slack = 3.0 * (rq.sob_total.std_error + out.group.sob_total.std_error);
        if (std::abs(out.group.sob_total.value - rq.sob_total.value) > epsilon + slack) {
            out.total_bound_consistent = false;
            out.total_bound_note =
                "singleton total index of '" + sensitive_names[i] +
                "' is compatible with zero, yet dropping it changes the group total index from " +
                std::to_string(rq.sob_total.value) + " to " +
                std::to_string(out.group.sob_total.value);
        }
    }

    bool all_singletons_null = true;
    for (const auto& s : out.singletons)
        if (s.sob.ci_high > epsilon) all_singletons_null = false;
    if (all_singletons_null && out.group.sob.value > epsilon) {
        out.joint_effect_warning = true;
        out.joint_effect_note =
            "every singleton first-order index is compatible with zero, yet the group "
            "first-order index is " +
            std::to_string(out.group.sob.value) +
            "; singleton parity does not certify joint parity";
    }
    return out;
}

} // namespace fairsens
