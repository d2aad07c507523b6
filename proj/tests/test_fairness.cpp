#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fairsens/error.hpp"
#include "fairsens/experiments.hpp"
#include "fairsens/fairness.hpp"
#include "fairsens/report.hpp"

using namespace fairsens;

namespace {

std::span<const double> col(const std::vector<double>& v) { return {v}; }

int severity(Verdict v) {
    switch (v) {
        case Verdict::fair: return 0;
        case Verdict::approximately_fair: return 1;
        case Verdict::inconclusive: return 2;
        case Verdict::unfair: return 3;
    }
    return 3;
}

ModelFn sign_product_fn() {
    return [](const Eigen::MatrixXd& rows) {
        std::vector<double> out(static_cast<std::size_t>(rows.rows()));
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            out[static_cast<std::size_t>(i)] =
                (rows(i, 0) >= 0.0 ? 1.0 : -1.0) * (rows(i, 1) >= 0.0 ? 1.0 : -1.0);
        return out;
    };
}

} // namespace

TEST_CASE("statistical_parity: grouped plug-in and the disparate-impact identity") {
    const std::vector<double> s{0, 0, 1, 1};
    const std::vector<double> f{0, 1, 1, 1};
    const StatisticalParityResult r = statistical_parity(f, {col(s)}, {"s"}, 0.02);
    // between-group variance 0.0625 over total variance 0.1875
    CHECK(r.verdict.index.value == doctest::Approx(0.0625 / 0.1875).epsilon(1e-12));
    REQUIRE(r.di_check.has_value());
    CHECK(r.di_check->p_hat == doctest::Approx(0.5));
    CHECK(r.di_check->di == doctest::Approx(0.5));
    CHECK(std::abs(r.di_check->identity_value - r.verdict.index.value) < 1e-12);
    CHECK(r.verdict.verdict == Verdict::unfair);
}

TEST_CASE("statistical_parity: identity holds exactly on random binary tables") {
    std::mt19937_64 gen(61);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + static_cast<int>(gen() % 200);
        std::vector<double> s(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
        int ones_s = 0;
        bool f0 = false, f1 = false;
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
            f[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
            ones_s += static_cast<int>(s[static_cast<std::size_t>(i)]);
            (f[static_cast<std::size_t>(i)] == 0.0 ? f0 : f1) = true;
        }
        if (ones_s == 0 || ones_s == n || !f0 || !f1) continue;
        const StatisticalParityResult r = statistical_parity(f, {col(s)}, {"s"}, 0.02);
        REQUIRE(r.di_check.has_value());
        CHECK(std::abs(r.di_check->identity_value - r.verdict.index.value) < 1e-12);
    }
}

TEST_CASE("statistical_parity: independence and functional dependence") {
    std::mt19937_64 gen(67);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::int64_t n = 10000;
    std::vector<double> s(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
        f[static_cast<std::size_t>(i)] = 1.0 + 0.01 * normal(gen);
    }
    const StatisticalParityResult indep = statistical_parity(f, {col(s)}, {"s"}, 0.02);
    CHECK(indep.verdict.verdict == Verdict::approximately_fair);

    const StatisticalParityResult exact = statistical_parity(s, {col(s)}, {"s"}, 0.02);
    CHECK(exact.verdict.index.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exact.verdict.verdict == Verdict::unfair);

    const std::vector<double> constant(100, 2.5);
    std::vector<double> s100(100);
    for (int i = 0; i < 100; ++i) s100[static_cast<std::size_t>(i)] = i % 2;
    const StatisticalParityResult degen = statistical_parity(constant, {col(s100)}, {"s"}, 0.02);
    CHECK(degen.verdict.verdict == Verdict::fair);
    CHECK(degen.verdict.note.find("fair-by-degeneracy") != std::string::npos);
}

TEST_CASE("statistical_parity: pick-freeze and rank routes") {
    // f(x) = x1 with x2 as the (continuous) sensitive feature, independent
    const GaussianModel m(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    const int sens[] = {1};
    const FairnessVerdict v =
        statistical_parity_model(linear_model_fn(w), m, sens, {"s"}, 20000, 3, 0.02);
    CHECK(std::abs(v.index.value) < 0.02);
    CHECK((v.verdict == Verdict::approximately_fair || v.verdict == Verdict::fair ||
           v.verdict == Verdict::inconclusive));

    // observational rank route on generated data
    const DataTable data = generate_dag_data('c', 4000, 11);
    const FairnessVerdict rank_v =
        statistical_parity_rank(data, "yhat", {"s"}, 0.02, 7, BootstrapOptions{200, 0.95, 7});
    CHECK(rank_v.index.value > 0.02); // bouncing correlation is visible to parity
    CHECK(rank_v.index.method == Method::bootstrap);
}

TEST_CASE("disparate_treatment: joint contribution is caught") {
    const GaussianModel m(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    const int sens[] = {1};

    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    const FairnessVerdict indep =
        disparate_treatment(linear_model_fn(w), m, sens, {"s"}, 50000, 5, 0.02);
    CHECK(std::abs(indep.index.value) <= 0.02);

    // f = x1 * s: no first-order signal, full total signal
    const ModelFn joint = [](const Eigen::MatrixXd& rows) {
        std::vector<double> out(static_cast<std::size_t>(rows.rows()));
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            out[static_cast<std::size_t>(i)] = rows(i, 0) * rows(i, 1);
        return out;
    };
    const FairnessVerdict v = disparate_treatment(joint, m, sens, {"s"}, 100000, 5, 0.02);
    CHECK(std::abs(v.index.value - 1.0) < 0.02);
    CHECK(v.verdict == Verdict::unfair);
    const SobolQuartet q = estimate_group_quartet(m, joint, sens, 100000, 5);
    CHECK(std::abs(q.sob.value) < 0.02);

    // benchmark with a direct path: SobT of the sensitive input near 0.53
    const GaussianModel m2 = experiment_observed_model(2);
    const FairnessVerdict bench = disparate_treatment(
        linear_model_fn(experiment_weights(2)), m2, sens, {"s"}, 100000, 9, 0.02);
    CHECK(std::abs(bench.index.value - 0.5348) < 0.02);

    CHECK_THROWS_WITH_AS(disparate_treatment(ModelFn{}, m, sens, {"s"}, 100, 1, 0.02),
                         doctest::Contains("MissingModelFunction"), Error);
}

TEST_CASE("equality_of_odds: grouped path") {
    // perfect predictor: E[f|S,Y] = Y, inner variance zero
    const std::vector<double> y{0, 0, 0, 1, 1, 1, 0, 1};
    const std::vector<double> s{0, 1, 0, 1, 0, 1, 1, 0};
    const FairnessVerdict perfect = equality_of_odds(y, {col(s)}, {"s"}, y, 0.02, 1);
    CHECK(perfect.index.value == 0.0);
    CHECK(perfect.verdict == Verdict::fair);

    // predictions that only depend on y stay exactly fair
    std::vector<double> fy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) fy[i] = 3.0 * y[i] + 1.0;
    CHECK(equality_of_odds(fy, {col(s)}, {"s"}, y, 0.02, 1).index.value == 0.0);

    // f = s with s independent of y: within-group variation by s
    std::mt19937_64 gen(71);
    const std::int64_t n = 2000;
    std::vector<double> yy(static_cast<std::size_t>(n)), ss(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        yy[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
        ss[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
    }
    const FairnessVerdict v = equality_of_odds(ss, {col(ss)}, {"s"}, yy, 0.02, 1);
    CHECK(v.index.value > 0.5);
    CHECK(v.verdict == Verdict::unfair);
}

TEST_CASE("equality_of_odds: hand toy equals the direct plug-in") {
    // y-group 0: cell means 0.3 (s=0) and 0.7 (s=1), variance of means 0.04
    // y-group 1: cell means 0.5 and 0.8, variance of means 0.0225
    // average 0.03125; Var(f) = 0.044375; ratio = 0.7042253521...
    const std::vector<double> f{0.2, 0.4, 0.8, 0.6, 0.5, 0.5, 0.9, 0.7};
    const std::vector<double> s{0, 0, 1, 1, 0, 0, 1, 1};
    const std::vector<double> y{0, 0, 0, 0, 1, 1, 1, 1};
    const FairnessVerdict v = equality_of_odds(f, {col(s)}, {"s"}, y, 0.02, 1);
    CHECK(v.index.value == doctest::Approx(0.03125 / 0.044375).epsilon(1e-12));

    const std::vector<double> y_small{0, 0, 0, 0, 0, 0, 1, 1};
    CHECK_THROWS_WITH_AS(equality_of_odds(f, {col(s)}, {"s"}, y_small, 0.02, 1),
                         doctest::Contains("GroupTooSmall"), Error);
}

TEST_CASE("equality_of_odds: continuous target routes through the conditional statistic") {
    std::mt19937_64 gen(73);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::int64_t n = 4000;
    std::vector<double> y(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = normal(gen);
        s[static_cast<std::size_t>(i)] = normal(gen);
    }
    // f = s exactly: fully determined by the sensitive feature
    const FairnessVerdict v = equality_of_odds(s, {col(s)}, {"s"}, y, 0.02, 1);
    CHECK(v.index.value > 0.9);
    CHECK(v.note.find("continuous") != std::string::npos);
}

TEST_CASE("disparate_mistreatment: loss routing") {
    // errors concentrated in the s = 1 group
    const std::vector<double> y{0, 0, 0, 0, 1, 1, 1, 1};
    const std::vector<double> f{0, 0, 0, 1, 1, 1, 0, 0};
    const std::vector<double> s{0, 0, 1, 1, 0, 0, 1, 1};
    const StatisticalParityResult r =
        disparate_mistreatment(f, y, {col(s)}, {"s"}, LossKind::zero_one, 0.02);
    // loss = (0,0,0,1,0,0,1,1): group means 0 and 0.75,
    // Var(E[l|S]) = 0.140625, Var(l) = 0.234375
    CHECK(r.verdict.index.value == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.verdict.target == "loss");
    REQUIRE(r.di_check.has_value());
    CHECK(std::abs(r.di_check->identity_value - 0.6) < 1e-12);

    // perfect predictor: constant zero loss is fair by degeneracy
    const StatisticalParityResult perfect =
        disparate_mistreatment(y, y, {col(s)}, {"s"}, LossKind::zero_one, 0.02);
    CHECK(perfect.verdict.verdict == Verdict::fair);
    CHECK(perfect.verdict.note.find("fair-by-degeneracy") != std::string::npos);

    // independent loss at n = 10^4
    std::mt19937_64 gen(79);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::int64_t n = 10000;
    std::vector<double> yy(static_cast<std::size_t>(n)), ff(static_cast<std::size_t>(n)),
        ss(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        yy[static_cast<std::size_t>(i)] = normal(gen);
        ff[static_cast<std::size_t>(i)] = yy[static_cast<std::size_t>(i)] + 0.1 * normal(gen);
        ss[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 2);
    }
    const StatisticalParityResult indep =
        disparate_mistreatment(ff, yy, {col(ss)}, {"s"}, LossKind::squared, 0.02);
    CHECK(indep.verdict.verdict == Verdict::approximately_fair);
}

TEST_CASE("compute_loss") {
    const std::vector<double> pred{1.0, 0.0, 2.0};
    const std::vector<double> target{1.0, 1.0, 0.0};
    CHECK(compute_loss(pred, target, LossKind::zero_one) ==
          std::vector<double>{0.0, 1.0, 1.0});
    CHECK(compute_loss(pred, target, LossKind::squared) == std::vector<double>{0.0, 1.0, 4.0});
}

TEST_CASE("classify: verdict semantics and monotonicity in epsilon") {
    IndexEstimate e;
    e.value = 0.05;
    e.std_error = 0.01;
    e = confidence_interval(e, 0.95);
    int last = severity(Verdict::unfair);
    for (double eps = 0.0; eps <= 0.2; eps += 0.002) {
        const int sev = severity(classify(e, eps));
        CHECK(sev <= last);
        last = sev;
    }
    CHECK(classify(e, 0.01) == Verdict::unfair);
    CHECK(classify(e, 0.06) == Verdict::inconclusive);
    CHECK(classify(e, 0.08) == Verdict::approximately_fair);
    CHECK(classify(point_estimate(0.0, Method::plugin, 10, 0), 0.01) == Verdict::fair);
}

TEST_CASE("causal_screen: three-way logic") {
    auto quartet = [](double sob_total, double se_total, double sob_total_ind, double se_ind) {
        SobolQuartet q;
        q.sob = point_estimate(0.0, Method::clt, 1000, 0);
        q.sob_ind = point_estimate(0.0, Method::clt, 1000, 0);
        q.sob_total = point_estimate(sob_total, Method::clt, 1000, 0);
        q.sob_total.std_error = se_total;
        q.sob_total = confidence_interval(q.sob_total, 0.95);
        q.sob_total_ind = point_estimate(sob_total_ind, Method::clt, 1000, 0);
        q.sob_total_ind.std_error = se_ind;
        q.sob_total_ind = confidence_interval(q.sob_total_ind, 0.95);
        return q;
    };
    CHECK(causal_screen(quartet(0.001, 0.002, 0.001, 0.002), 0.02).kind ==
          CausalFindingKind::no_path);
    CHECK(causal_screen(quartet(0.25, 0.005, 0.002, 0.002), 0.02).kind ==
          CausalFindingKind::no_direct_edge);
    CHECK(causal_screen(quartet(0.53, 0.005, 0.09, 0.005), 0.02).kind ==
          CausalFindingKind::direct_influence_possible);
}

TEST_CASE("intersectional_audit: joint-only influence is surfaced") {
    const GaussianModel m(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    const int sens[] = {0, 1};
    const IntersectionalFindings f =
        intersectional_audit(sign_product_fn(), m, sens, {"s1", "s2"}, 100000, 3, 0.02);
    CHECK(std::abs(f.singletons[0].sob.value) < 0.02);
    CHECK(std::abs(f.singletons[1].sob.value) < 0.02);
    CHECK(std::abs(f.group.sob.value - 1.0) < 0.02);
    CHECK(f.joint_effect_warning);
    CHECK(f.total_bound_consistent);
}

TEST_CASE("intersectional_audit: independent and single-feature cases") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
    const GaussianModel m(Eigen::VectorXd::Zero(3), cov);
    const int sens[] = {1, 2};

    // f depends on no sensitive feature
    Eigen::VectorXd w(3);
    w << 1.0, 0.0, 0.0;
    const IntersectionalFindings null_f =
        intersectional_audit(linear_model_fn(w), m, sens, {"s1", "s2"}, 50000, 7, 0.02);
    CHECK(std::abs(null_f.group.sob.value) < 0.02);
    CHECK(std::abs(null_f.group.sob_total.value) < 0.02);
    CHECK_FALSE(null_f.joint_effect_warning);
    CHECK(null_f.total_bound_consistent);

    // f = s1: the second sensitive feature is null in every combination, so
    // dropping it leaves the group total unchanged
    Eigen::VectorXd w2(3);
    w2 << 0.0, 1.0, 0.0;
    const IntersectionalFindings one =
        intersectional_audit(linear_model_fn(w2), m, sens, {"s1", "s2"}, 50000, 7, 0.02);
    CHECK(std::abs(one.singletons[0].sob_total.value - 1.0) < 0.02);
    CHECK(std::abs(one.singletons[1].sob_total.value) < 0.02);
    CHECK(std::abs(one.group.sob_total.value - 1.0) < 0.02);
    CHECK(one.total_bound_consistent);

    const int single[] = {1};
    CHECK_THROWS_WITH_AS(
        intersectional_audit(linear_model_fn(w2), m, single, {"s1"}, 1000, 1, 0.02),
        doctest::Contains("InvalidArgument"), Error);
}

TEST_CASE("audit report JSON is byte-identical across runs") {
    auto make_report = [] {
        AuditReport r;
        r.n_rows = 4;
        r.column_names = {"s", "f"};
        r.dataset_hash = 0xabcdef12u;
        r.seed = 5;
        r.tie_seed = 7;
        r.n_mc = 100;
        r.epsilon = 0.02;
        r.model_source = "none";
        const std::vector<double> s{0, 0, 1, 1};
        const std::vector<double> f{0, 1, 1, 1};
        const StatisticalParityResult sp = statistical_parity(f, {col(s)}, {"s"}, 0.02);
        r.verdicts.push_back({sp.verdict, sp.di_check});
        return to_json(r);
    };
    const std::string a = make_report();
    const std::string b = make_report();
    CHECK(a == b);
    CHECK(a.find("\"schema_version\":1") != std::string::npos);
    CHECK(a.find("\"measure\":\"statistical_parity\"") != std::string::npos);
    CHECK(a.find("\"verdict\":\"unfair\"") != std::string::npos);
    CHECK(a.find("\"di\":0.5") != std::string::npos);
}
