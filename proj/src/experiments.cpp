#include "fairsens/experiments.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "fairsens/error.hpp"
#include "fairsens/rng.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

Eigen::MatrixXd experiment_covariance(int id) {
    Eigen::MatrixXd c(3, 3);
    if (id == 1 || id == 2) {
        c << 1.0, 0.5, 0.5,
             0.5, 1.0, 0.0,
             0.5, 0.0, 1.0;
    } else if (id == 3) {
        c << 1.0, 0.0, 0.5,
             0.0, 1.0, 0.0,
             0.5, 0.0, 1.0;
    } else {
        fail(errc::invalid_argument, "experiment id must be 1, 2 or 3");
    }
    return c;
}

GaussianModel experiment_observed_model(int id) {
    const Eigen::MatrixXd full = experiment_covariance(id);
    return GaussianModel(Eigen::VectorXd::Zero(2), full.topLeftCorner(2, 2));
}

Eigen::VectorXd experiment_weights(int id) {
    Eigen::VectorXd w(2);
    if (id == 1) {
        w << 2.0, 0.0;
    } else if (id == 2 || id == 3) {
        w << 0.7, 0.3;
    } else {
        fail(errc::invalid_argument, "experiment id must be 1, 2 or 3");
    }
    return w;
}

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
    if (spec.n_mc < 10) fail(errc::too_few_rows, "n_mc too small");
    const GaussianModel model = experiment_observed_model(spec.id);
    const Eigen::VectorXd w = experiment_weights(spec.id);
    const ModelFn fn = linear_model_fn(w);

    std::vector<ExperimentRow> rows;
    const char* names[2] = {"X", "S"};
    for (int feature = 0; feature < 2; ++feature) {
        ExperimentRow row;
        row.variable = names[feature];
        row.estimate = estimate_feature_quartet(model, fn, feature, spec.n_mc, spec.seed);
        row.theory = theoretical_sobol_linear(w, model, feature);
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd dag_weights(char graph) {
    Eigen::VectorXd w(2);
    switch (graph) {
        case 'a':
        case 'b': w << 0.7, 0.3; break;
        case 'c': w << 2.0, 0.0; break;
        default: fail(errc::invalid_argument, "graph must be 'a', 'b' or 'c'");
    }
    return w;
}

DataTable generate_dag_data(char graph, std::int64_t n, std::uint64_t seed) {
    if (n < 10) fail(errc::too_few_rows, "need n >= 10");
    int cov_id = 0;
    switch (graph) {
        case 'a': cov_id = 3; break;
        case 'b': cov_id = 2; break;
        case 'c': cov_id = 1; break;
        default: fail(errc::invalid_argument, "graph must be 'a', 'b' or 'c'");
    }
    const Eigen::MatrixXd cov = experiment_covariance(cov_id);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    const Eigen::VectorXd w = dag_weights(graph);

    std::vector<double> x(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n)),
        yhat(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        Eigen::Vector3d z;
        for (int c = 0; c < 3; ++c)
            z(c) = stats::normal_quantile(rng::uniform01(seed, rng::Stream::dag_normals,
                                                         static_cast<std::uint64_t>(i),
                                                         static_cast<std::uint64_t>(c)));
        const Eigen::Vector3d v = L * z; // (X, S, U)
        x[static_cast<std::size_t>(i)] = v(0);
        s[static_cast<std::size_t>(i)] = v(1);
        yhat[static_cast<std::size_t>(i)] = w(0) * v(0) + w(1) * v(1);
    }

    std::vector<Column> cols;
    cols.push_back({"x", Role::feature, std::move(x)});
    cols.push_back({"s", Role::sensitive, std::move(s)});
    cols.push_back({"yhat", Role::prediction, std::move(yhat)});
    return DataTable(std::move(cols));
}

std::vector<CoverageRow> coverage_study(const ExperimentSpec& spec, int replicates,
                                        std::int64_t n, double level) {
    if (replicates < 100) fail(errc::invalid_argument, "need at least 100 replicates");
    const GaussianModel model = experiment_observed_model(spec.id);
    const Eigen::VectorXd w = experiment_weights(spec.id);
    const ModelFn fn = linear_model_fn(w);

    const char* names[2] = {"X", "S"};
    const IndexKind kinds[4] = {IndexKind::sob, IndexKind::sob_total, IndexKind::sob_ind,
                                IndexKind::sob_total_ind};
    int hits[2][4] = {};
    for (int rep = 0; rep < replicates; ++rep) {
        const std::uint64_t rep_seed =
            rng::derive(spec.seed, rng::Stream::replicate, static_cast<std::uint64_t>(rep));
        for (int feature = 0; feature < 2; ++feature) {
            const SobolQuartet q =
                estimate_feature_quartet(model, fn, feature, n, rep_seed, level);
            const TheoreticalQuartet th = theoretical_sobol_linear(w, model, feature);
            const double truth[4] = {th.sob, th.sob_total, th.sob_ind, th.sob_total_ind};
            for (int k = 0; k < 4; ++k) {
                const IndexEstimate& e = q.get(kinds[k]);
                if (e.ci_low <= truth[k] && truth[k] <= e.ci_high) ++hits[feature][k];
            }
        }
    }

    std::vector<CoverageRow> rows;
    for (int feature = 0; feature < 2; ++feature) {
        for (int k = 0; k < 4; ++k) {
            CoverageRow r;
            r.variable = names[feature];
            r.kind = kinds[k];
            r.coverage = static_cast<double>(hits[feature][k]) / static_cast<double>(replicates);
            r.binomial_halfwidth =
                1.96 * std::sqrt(level * (1.0 - level) / static_cast<double>(replicates));
            r.replicates = replicates;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

} // namespace fairsens
