#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairsens/dataset.hpp"

namespace fairsens {

// Multivariate Gaussian input model. The covariance must be symmetric
// (1e-12 relative tolerance) and positive definite; construction checks
// symmetry, `cholesky()` checks definiteness.
class GaussianModel {
public:
    GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    int dimension() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }

    // Lower-triangular L with L L^T = covariance; throws NotSPD.
    Eigen::MatrixXd cholesky() const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
};

// A permutation of the features fixing which conditional hierarchy the
// Rosenblatt transform follows. `cyclic(i, p)` is (i, i+1, ..., p-1, 0, ...,
// i-1); the group factories generalize it by placing a feature block first
// or last, which is what group indices need.
struct Ordering {
    std::vector<int> perm; // perm[k] = feature occupying position k

    static Ordering cyclic(int start, int p);
    static Ordering group_first(std::span<const int> features, int p);
    static Ordering group_last(std::span<const int> features, int p);

    int size() const { return static_cast<int>(perm.size()); }
};

// The four aligned sample matrices of one pick-freeze block, already mapped
// back to original feature positions. `x_shared_first` was generated from
// (u_1..u_h, u'_{h+1}..u'_p) and `x_shared_last` from
// (u'_1..u'_{p-t}, u_{p-t+1}..u_p), where h/t are the head/tail widths.
struct FourSamples {
    Eigen::MatrixXd x;
    Eigen::MatrixXd x_prime;
    Eigen::MatrixXd x_shared_first;
    Eigen::MatrixXd x_shared_last;
    Ordering ordering;
    int shared_head = 1;
    int shared_tail = 1;
    std::uint64_t seed = 0;
};

// x = mean_pi + L_pi * Phi^-1(u) unpermuted to original feature positions;
// equals sequential conditional quantile inversion for Gaussian inputs.
Eigen::VectorXd rosenblatt_inverse(const GaussianModel& model, const Ordering& ordering,
                                   std::span<const double> u);

// Draws u, u' as two independent n x p uniform blocks keyed by the seed and
// returns the four transformed samples. Deterministic given the seed.
FourSamples pick_freeze_samples(const GaussianModel& model, const Ordering& ordering,
                                std::int64_t n, std::uint64_t seed, int shared_head = 1,
                                int shared_tail = 1);

// Cyclic-ordering convenience for a single feature.
FourSamples pick_freeze_samples(const GaussianModel& model, int feature, std::int64_t n,
                                std::uint64_t seed);

// Gaussian copula fit over the feature and sensitive columns: normal scores
// Phi^-1((R_i - 0.5)/n) per column, zero mean, empirical score covariance
// ridge-regularized with the smallest delta in {0, 1e-10, 1e-8, ...} that
// makes the Cholesky succeed.
GaussianModel fit_gaussian_copula(const DataTable& table);
GaussianModel fit_gaussian_copula(const Eigen::MatrixXd& columns);

struct TheoreticalQuartet {
    double sob = 0.0;
    double sob_total = 0.0;
    double sob_ind = 0.0;
    double sob_total_ind = 0.0;
};

// Closed-form quartet for f(x) = w'x under the model, for a feature set s.
// Uses Gaussian conditioning: Var(E[f|X_s]) = c_s' C_ss^-1 c_s with
// c_s = Cov(X_s, f), and Var(E[f|Z_s]) = w_s' (C_ss - C_s,~s C_~s~s^-1 C_~s,s) w_s
// for the conditional-residual block Z_s.
TheoreticalQuartet theoretical_sobol_linear(const Eigen::VectorXd& weights,
                                            const GaussianModel& model,
                                            std::span<const int> feature_set);
TheoreticalQuartet theoretical_sobol_linear(const Eigen::VectorXd& weights,
                                            const GaussianModel& model, int feature);

// Model spec JSON: {"mean": [...], "covariance": [[...], ...]}.
GaussianModel load_model_spec(std::istream& in);
GaussianModel load_model_spec_file(const std::string& path);

} // namespace fairsens
