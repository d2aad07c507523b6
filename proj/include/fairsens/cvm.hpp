#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fairsens/dataset.hpp"
#include "fairsens/estimate.hpp"

namespace fairsens {

enum class CvmKind { classical, independent, independent_alt, conditional_T, unconditional_T };

const char* cvm_kind_name(CvmKind k);

struct CvmEstimate {
    double value = 0.0;
    CvmKind kind = CvmKind::classical;
    std::int64_t n = 0;
    std::uint64_t tie_seed = 0;
    std::optional<IndexEstimate> ci;
};

// T_n(Y, X | Z) =
//   sum_i (min{R_i, R_M(i)} - min{R_i, R_N(i)}) / sum_i (R_i - min{R_i, R_N(i)})
// with N(i) the nearest neighbor of Z_i and M(i) the nearest neighbor of
// (X_i, Z_i). Both sums are exact integers.
CvmEstimate conditional_T(std::span<const double> y, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& z, std::uint64_t tie_seed);

// T_n(Y, Z) = sum_i (n min{R_i, R_M(i)} - L_i^2) / sum_i L_i (n - L_i),
// M(i) the nearest neighbor of Z_i. Also the estimator of the classical
// index of Y with respect to the columns of Z.
CvmEstimate unconditional_T(std::span<const double> y, const Eigen::MatrixXd& z,
                            std::uint64_t tie_seed);

// Classical index of column y against a set of feature columns.
CvmEstimate cvm_classical(const DataTable& table, const std::string& y_column,
                          const std::vector<std::string>& feature_columns,
                          std::uint64_t tie_seed);

// U_n(Y, X_i | X_~i) = T_n(Y, X_i | X_~i) * (1 - T_n(Y, X_~i)).
CvmEstimate cvm_independent(const DataTable& table, const std::string& y_column,
                            const std::string& feature, std::uint64_t tie_seed);

// Alternative estimator Q_n / S_n with
//   Q_n = n^-2 sum_j (min{R_j, R_M(j)} - min{R_j, R_N(j)})
//   S_n = n^-3 sum_j L_j (n - L_j)
// sharing the neighbor maps of conditional_T.
CvmEstimate cvm_independent_alt(const DataTable& table, const std::string& y_column,
                                const std::string& feature, std::uint64_t tie_seed);

// Both independent estimators from one pass (the neighbor maps are shared).
std::pair<CvmEstimate, CvmEstimate> cvm_independent_pair(const DataTable& table,
                                                         const std::string& y_column,
                                                         const std::string& feature,
                                                         std::uint64_t tie_seed);

// Frequency-weighted within-group index for a discrete conditioning column:
//   E_Y[ Var_S( E[f | S, Y] ) ] / Var(f)
// with population (1/n) moments throughout. Every y-group needs >= 3 rows
// and the sensitive columns must be discrete.
double grouped_conditional_index(std::span<const double> f,
                                 const std::vector<std::span<const double>>& sensitive,
                                 std::span<const double> y);

using TableEstimator = std::function<double(const DataTable&, std::uint64_t tie_seed)>;

// Percentile bootstrap over B row resamples with replacement; deterministic
// given the seed. Fails with BootstrapUnstable when more than 10% of the
// replicates raise errors.
IndexEstimate bootstrap_ci(const TableEstimator& estimator, const DataTable& table, int B,
                           double level, std::uint64_t seed);

} // namespace fairsens
