#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fairsens/cvm.hpp"
#include "fairsens/error.hpp"
#include "fairsens/experiments.hpp"
#include "fairsens/sobol.hpp"
#include "fairsens/stats.hpp"

using namespace fairsens;

namespace {

GaussianModel independent2() {
    return GaussianModel(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
}

ModelFn product_fn() {
    return [](const Eigen::MatrixXd& rows) {
        std::vector<double> out(static_cast<std::size_t>(rows.rows()));
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            out[static_cast<std::size_t>(i)] = rows(i, 0) * rows(i, 1);
        return out;
    };
}

// block rows as a table, so the generic row bootstrap applies to the index
DataTable block_as_table(const PickFreezeBlock& b) {
    return DataTable({{"f_x", Role::feature, b.f_x},
                      {"f_xp", Role::feature, b.f_x_prime},
                      {"f_first", Role::feature, b.f_shared_first},
                      {"f_last", Role::feature, b.f_shared_last}});
}

double sob_from_table(const DataTable& t) {
    const auto& fx = t.column("f_x").values;
    const auto& fxp = t.column("f_xp").values;
    const auto& ff = t.column("f_first").values;
    const auto& fl = t.column("f_last").values;
    const auto n = static_cast<double>(t.n_rows());
    double num = 0.0;
    for (std::int64_t i = 0; i < t.n_rows(); ++i)
        num += fx[static_cast<std::size_t>(i)] *
               (ff[static_cast<std::size_t>(i)] - fxp[static_cast<std::size_t>(i)]);
    num /= n;
    const double v = (stats::variance(fx, 1) + stats::variance(fxp, 1) +
                      stats::variance(ff, 1) + stats::variance(fl, 1)) /
                     4.0;
    return num / v;
}

} // namespace

TEST_CASE("estimate_quartet: degenerate and malformed inputs") {
    const GaussianModel m = independent2();
    const ModelFn constant = [](const Eigen::MatrixXd& rows) {
        return std::vector<double>(static_cast<std::size_t>(rows.rows()), 3.0);
    };
    CHECK_THROWS_WITH_AS(estimate_feature_quartet(m, constant, 0, 1000, 1),
                         doctest::Contains("DegenerateVariance"), Error);

    const auto b1 = evaluate_block(pick_freeze_samples(m, 0, 100, 1), linear_model_fn(experiment_weights(2)));
    auto b2 = evaluate_block(pick_freeze_samples(m, 1, 50, 1), linear_model_fn(experiment_weights(2)));
    CHECK_THROWS_WITH_AS(estimate_quartet(b1, b2), doctest::Contains("LengthMismatch"), Error);
}

TEST_CASE("quartet: additive function with independent inputs") {
    // f(x) = x1 + x2 splits its variance evenly; every index is 1/2
    Eigen::VectorXd w(2);
    w << 1.0, 1.0;
    const SobolQuartet q =
        estimate_feature_quartet(independent2(), linear_model_fn(w), 0, 100000, 3);
    CHECK(q.sob.value == doctest::Approx(0.5).epsilon(0.04));
    CHECK(std::abs(q.sob.value - 0.5) < 0.02);
    CHECK(std::abs(q.sob_total.value - 0.5) < 0.02);
    CHECK(std::abs(q.sob_ind.value - 0.5) < 0.02);
    CHECK(std::abs(q.sob_total_ind.value - 0.5) < 0.02);

    // additivity of first-order indices
    const SobolQuartet q2 =
        estimate_feature_quartet(independent2(), linear_model_fn(w), 1, 100000, 3);
    const double sum = q.sob.value + q2.sob.value;
    CHECK(sum > 0.96);
    CHECK(sum < 1.04);
}

TEST_CASE("quartet: pure interaction (product) function") {
    const SobolQuartet q =
        estimate_feature_quartet(independent2(), product_fn(), 0, 100000, 9);
    CHECK(std::abs(q.sob.value - 0.0) < 0.02);
    CHECK(std::abs(q.sob_total.value - 1.0) < 0.02);
    CHECK(std::abs(q.sob_ind.value - 0.0) < 0.02);
    CHECK(std::abs(q.sob_total_ind.value - 1.0) < 0.02);
}

TEST_CASE("quartet: bouncing contribution") {
    // x2 = x1 + noise, f = x2: all influence of x1 flows through x2
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 1.0, 1.0, 2.0;
    const GaussianModel m(Eigen::VectorXd::Zero(2), cov);
    Eigen::VectorXd w(2);
    w << 0.0, 1.0;
    const SobolQuartet q = estimate_feature_quartet(m, linear_model_fn(w), 0, 100000, 13);
    CHECK(std::abs(q.sob.value - 0.5) < 0.02);
    CHECK(std::abs(q.sob_total.value - 0.5) < 0.02);
    CHECK(std::abs(q.sob_ind.value - 0.0) < 0.02);
    CHECK(std::abs(q.sob_total_ind.value - 0.0) < 0.02);
}

TEST_CASE("clt_stderr: agrees with a row bootstrap of the same statistic") {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    const auto block =
        evaluate_block(pick_freeze_samples(independent2(), 0, 10000, 31), linear_model_fn(w));
    const double se = clt_stderr(block, IndexKind::sob);

    const IndexEstimate boot = bootstrap_ci(
        [](const DataTable& t, std::uint64_t) { return sob_from_table(t); },
        block_as_table(block), 1000, 0.95, 77);
    CHECK(se / boot.std_error > 0.75);
    CHECK(se / boot.std_error < 1.25);
}

TEST_CASE("clt_stderr: 1/sqrt(n) scaling") {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    double se_small_sum = 0.0, se_large_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto small = evaluate_block(pick_freeze_samples(independent2(), 0, 2500, 100 + seed),
                                          linear_model_fn(w));
        const auto large =
            evaluate_block(pick_freeze_samples(independent2(), 0, 10000, 200 + seed),
                           linear_model_fn(w));
        se_small_sum += clt_stderr(small, IndexKind::sob);
        se_large_sum += clt_stderr(large, IndexKind::sob);
    }
    const double ratio = se_small_sum / se_large_sum;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("confidence_interval: contract") {
    IndexEstimate e;
    e.value = 0.5;
    e.std_error = 0.01;
    const IndexEstimate ci = confidence_interval(e, 0.95);
    CHECK(ci.ci_low == doctest::Approx(0.4804).epsilon(1e-3));
    CHECK(ci.ci_high == doctest::Approx(0.5196).epsilon(1e-3));
    CHECK(ci.level == 0.95);

    CHECK_THROWS_WITH_AS(confidence_interval(e, 1.0), doctest::Contains("InvalidLevel"), Error);
    CHECK_THROWS_WITH_AS(confidence_interval(e, 0.0), doctest::Contains("InvalidLevel"), Error);

    e.std_error = 0.0;
    const IndexEstimate flat = confidence_interval(e, 0.9);
    CHECK(flat.ci_low == 0.5);
    CHECK(flat.ci_high == 0.5);
}

TEST_CASE("check_bounds: chain logic") {
    auto quartet = [](double sob, double sob_total, double sob_ind, double sob_total_ind,
                      double se) {
        SobolQuartet q;
        q.sob = point_estimate(sob, Method::oracle, 100, 0);
        q.sob_total = point_estimate(sob_total, Method::oracle, 100, 0);
        q.sob_ind = point_estimate(sob_ind, Method::oracle, 100, 0);
        q.sob_total_ind = point_estimate(sob_total_ind, Method::oracle, 100, 0);
        q.sob.std_error = q.sob_total.std_error = q.sob_ind.std_error =
            q.sob_total_ind.std_error = se;
        return q;
    };
    CHECK(check_bounds(quartet(1.0, 1.0, 0.75, 0.75, 0.0)).empty());

    const auto violations = check_bounds(quartet(0.30, 0.28, 0.05, 0.06, 0.01), 0.01);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].lhs == "sob");
    CHECK(violations[0].rhs == "sob_total");
    CHECK(violations[0].gap == doctest::Approx(0.02));
    // the default slack of 3 max stderr absorbs the same 0.02 gap
    CHECK(check_bounds(quartet(0.30, 0.28, 0.05, 0.06, 0.01)).empty());

    // sob vs sob_total_ind is never compared
    CHECK(check_bounds(quartet(0.2, 0.9, 0.1, 0.5, 0.01)).empty());
}

TEST_CASE("consistency: estimates approach the closed-form values") {
    const GaussianModel m = experiment_observed_model(2);
    const Eigen::VectorXd w = experiment_weights(2);
    const ModelFn fn = linear_model_fn(w);
    int ok = 0;
    const int runs = 20;
    for (int r = 0; r < runs; ++r) {
        bool all = true;
        for (int feature = 0; feature < 2; ++feature) {
            const SobolQuartet q =
                estimate_feature_quartet(m, fn, feature, 100000, 1000 + static_cast<std::uint64_t>(r));
            const TheoreticalQuartet th = theoretical_sobol_linear(w, m, feature);
            const std::pair<const IndexEstimate*, double> checks[] = {
                {&q.sob, th.sob},
                {&q.sob_total, th.sob_total},
                {&q.sob_ind, th.sob_ind},
                {&q.sob_total_ind, th.sob_total_ind},
            };
            for (const auto& [est, truth] : checks)
                if (std::abs(est->value - truth) > 5.0 * std::max(est->std_error, 1e-6))
                    all = false;
        }
        if (all) ++ok;
    }
    CHECK(ok >= runs - 1);
}

TEST_CASE("independence collapse: diagonal covariance") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    cov.diagonal() << 1.0, 2.0, 0.5;
    const GaussianModel m(Eigen::VectorXd::Zero(3), cov);
    Eigen::VectorXd w(3);
    w << 1.0, -0.5, 0.25;
    for (int feature = 0; feature < 3; ++feature) {
        const SobolQuartet q = estimate_feature_quartet(m, linear_model_fn(w), feature, 50000, 7);
        CHECK(std::abs(q.sob.value - q.sob_ind.value) <=
              3.0 * (q.sob.std_error + q.sob_ind.std_error) + 1e-9);
        CHECK(std::abs(q.sob_total.value - q.sob_total_ind.value) <=
              3.0 * (q.sob_total.std_error + q.sob_total_ind.std_error) + 1e-9);
    }
}

TEST_CASE("group indices: full set saturates the total index") {
    std::mt19937_64 gen(41);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = normal(gen);
    Eigen::MatrixXd cov = a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(3, 3);
    const GaussianModel m(Eigen::VectorXd::Zero(3), (cov + cov.transpose()) / 2.0);
    Eigen::VectorXd w(3);
    w << 0.3, -1.0, 0.7;

    const int all[] = {0, 1, 2};
    const SobolQuartet q = estimate_group_quartet(m, linear_model_fn(w), all, 50000, 19);
    CHECK(std::abs(q.sob_total.value - 1.0) <= 3.0 * q.sob_total.std_error + 1e-9);
    CHECK(std::abs(q.sob.value - 1.0) <= 3.0 * q.sob.std_error + 1e-9);

    // pair inside a trio tracks the closed form
    const int pair[] = {0, 2};
    const SobolQuartet qp = estimate_group_quartet(m, linear_model_fn(w), pair, 100000, 23);
    const TheoreticalQuartet th = theoretical_sobol_linear(w, m, pair);
    CHECK(std::abs(qp.sob.value - th.sob) < 5.0 * qp.sob.std_error + 0.005);
    CHECK(std::abs(qp.sob_total.value - th.sob_total) < 5.0 * qp.sob_total.std_error + 0.005);
    CHECK(std::abs(qp.sob_ind.value - th.sob_ind) < 5.0 * qp.sob_ind.std_error + 0.005);
    CHECK(std::abs(qp.sob_total_ind.value - th.sob_total_ind) <
          5.0 * qp.sob_total_ind.std_error + 0.005);
}
