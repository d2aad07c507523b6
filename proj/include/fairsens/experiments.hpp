#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsens/dataset.hpp"
#include "fairsens/gaussian.hpp"
#include "fairsens/sobol.hpp"

namespace fairsens {

// The three synthetic benchmarks. Each draws (X, S, U) from a fixed 3x3
// covariance and scores a linear predictor; U is an exogenous driver that
// never receives indices, so estimation runs on the observed (X, S) pair
// with its marginal 2x2 covariance.
//
//   id 1: cov(X,S) = cov(X,U) = 0.5, Y = 2 X
//   id 2: same covariance,           Y = 0.7 X + 0.3 S
//   id 3: cov(X,S) = 0, cov(X,U) = 0.5, Y = 0.7 X + 0.3 S
struct ExperimentSpec {
    int id = 1;
    std::int64_t n_mc = 100000;
    std::uint64_t seed = 0;
};

// Covariance of the full latent triple (X, S, U).
Eigen::MatrixXd experiment_covariance(int id);

// Observed-pair model and predictor weights used for index estimation.
GaussianModel experiment_observed_model(int id);
Eigen::VectorXd experiment_weights(int id);

struct ExperimentRow {
    std::string variable; // "X" or "S"
    SobolQuartet estimate;
    TheoreticalQuartet theory;
};

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

// Data from the three generative graphs, columns x (feature), s (sensitive),
// yhat (prediction):
//   graph 'a': S independent of X, yhat = 0.7 x + 0.3 s   (id-3 covariance)
//   graph 'b': X driven by (U, S), yhat = 0.7 x + 0.3 s   (id-2 covariance)
//   graph 'c': X driven by (U, S), yhat = 2 x             (id-1 covariance)
DataTable generate_dag_data(char graph, std::int64_t n, std::uint64_t seed);

Eigen::VectorXd dag_weights(char graph);

struct CoverageRow {
    std::string variable;
    IndexKind kind;
    double coverage = 0.0;       // fraction of replicates whose CI covers the oracle
    double binomial_halfwidth = 0.0;
    int replicates = 0;
};

// Replicated CI-coverage study against the closed-form oracle values.
std::vector<CoverageRow> coverage_study(const ExperimentSpec& spec, int replicates,
                                        std::int64_t n, double level);

} // namespace fairsens
