#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairsens/estimate.hpp"
#include "fairsens/gaussian.hpp"

namespace fairsens {

// Black-box predictor: rows in, one prediction per row out.
using ModelFn = std::function<std::vector<double>(const Eigen::MatrixXd&)>;

ModelFn linear_model_fn(Eigen::VectorXd weights);

// The four aligned evaluation vectors of one pick-freeze block.
struct PickFreezeBlock {
    std::vector<double> f_x;
    std::vector<double> f_x_prime;
    std::vector<double> f_shared_first;
    std::vector<double> f_shared_last;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

PickFreezeBlock evaluate_block(const FourSamples& samples, const ModelFn& fn);

enum class IndexKind { sob, sob_total, sob_ind, sob_total_ind };

const char* index_kind_name(IndexKind k);

struct SobolQuartet {
    IndexEstimate sob;
    IndexEstimate sob_total;
    IndexEstimate sob_ind;
    IndexEstimate sob_total_ind;
    std::vector<int> features;
    std::int64_t n = 0;
    std::uint64_t seed = 0;

    const IndexEstimate& get(IndexKind k) const;
};

// Estimators over two blocks:
//   Sob   = mean(f(x) (f(x^first) - f(x'))) / V        [first_block]
//   SobT  = mean((f(x^first) - f(x'))^2) / (2 V)       [first_block]
//   Sob^ind, SobT^ind: same forms on last_block's shared-last sample.
// V is the average of the four per-sample variance estimates of the block
// (n-1 denominator). Estimates are reported raw; no clamping to [0,1].
SobolQuartet estimate_quartet(const PickFreezeBlock& first_block,
                              const PickFreezeBlock& last_block, double level = 0.95);

// Builds the two blocks (cyclic orderings i and i+1) and estimates.
SobolQuartet estimate_feature_quartet(const GaussianModel& model, const ModelFn& fn, int feature,
                                      std::int64_t n, std::uint64_t seed, double level = 0.95);

// Group version: the block occupies the first (resp. last) positions.
SobolQuartet estimate_group_quartet(const GaussianModel& model, const ModelFn& fn,
                                    std::span<const int> features, std::int64_t n,
                                    std::uint64_t seed, double level = 0.95);

// Delta-method standard error of the matching estimator, computed from the
// per-row influence of both the numerator and the four-sample variance
// average, so the stderr tracks exactly the statistic reported above.
double clt_stderr(const PickFreezeBlock& block, IndexKind kind);

struct BoundViolation {
    std::string lhs;
    std::string rhs;
    double gap = 0.0; // positive amount by which the chain is broken
};

// Checks 0 <= Sob^ind <= Sob <= SobT <= 1 and
//        0 <= Sob^ind <= SobT^ind <= SobT <= 1
// up to `slack` (default 3 * max stderr). Sob vs SobT^ind is not compared.
std::vector<BoundViolation> check_bounds(const SobolQuartet& quartet, double slack = -1.0);

} // namespace fairsens
