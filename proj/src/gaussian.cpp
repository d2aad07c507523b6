#include "fairsens/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include "fairsens/error.hpp"
#include "fairsens/rng.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

namespace {

Eigen::MatrixXd cholesky_of(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) fail(errc::not_spd, "covariance is not positive definite");
    return llt.matrixL();
}

void check_permutation(const Ordering& ordering, int p) {
    if (ordering.size() != p) fail(errc::length_mismatch, "ordering size != model dimension");
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (int v : ordering.perm) {
        if (v < 0 || v >= p || seen[static_cast<std::size_t>(v)])
            fail(errc::invalid_argument, "ordering is not a permutation");
        seen[static_cast<std::size_t>(v)] = true;
    }
}

} // namespace

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto p = mean_.size();
    if (p < 1) fail(errc::empty_input, "model dimension must be >= 1");
    if (covariance_.rows() != p || covariance_.cols() != p)
        fail(errc::length_mismatch, "covariance shape does not match mean");
    const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        fail(errc::not_symmetric, "covariance is not symmetric");
    if (!covariance_.allFinite() || !mean_.allFinite())
        fail(errc::non_finite_input, "model parameters contain non-finite entries");
}

Eigen::MatrixXd GaussianModel::cholesky() const { return cholesky_of(covariance_); }

Ordering Ordering::cyclic(int start, int p) {
    if (p < 1 || start < 0 || start >= p) fail(errc::invalid_argument, "bad cyclic ordering start");
    Ordering o;
    o.perm.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) o.perm[static_cast<std::size_t>(k)] = (start + k) % p;
    return o;
}

Ordering Ordering::group_first(std::span<const int> features, int p) {
    Ordering o;
    std::set<int> in_group(features.begin(), features.end());
    if (in_group.size() != features.size() || features.empty())
        fail(errc::invalid_argument, "feature group must be non-empty and distinct");
    for (int f : features) {
        if (f < 0 || f >= p) fail(errc::invalid_argument, "feature index out of range");
        o.perm.push_back(f);
    }
    for (int f = 0; f < p; ++f)
        if (!in_group.count(f)) o.perm.push_back(f);
    return o;
}

Ordering Ordering::group_last(std::span<const int> features, int p) {
    Ordering head = group_first(features, p);
    Ordering o;
    const auto m = features.size();
    o.perm.assign(head.perm.begin() + static_cast<std::ptrdiff_t>(m), head.perm.end());
    o.perm.insert(o.perm.end(), head.perm.begin(), head.perm.begin() + static_cast<std::ptrdiff_t>(m));
    return o;
}

Eigen::VectorXd rosenblatt_inverse(const GaussianModel& model, const Ordering& ordering,
                                   std::span<const double> u) {
    const int p = model.dimension();
    check_permutation(ordering, p);
    if (static_cast<int>(u.size()) != p) fail(errc::length_mismatch, "u size != dimension");
    for (double v : u)
        if (!(v > 0.0 && v < 1.0)) fail(errc::out_of_range_uniform, "u must lie strictly in (0,1)");

    Eigen::MatrixXd cov_pi(p, p);
    Eigen::VectorXd mean_pi(p);
    for (int a = 0; a < p; ++a) {
        mean_pi(a) = model.mean()(ordering.perm[static_cast<std::size_t>(a)]);
        for (int b = 0; b < p; ++b)
            cov_pi(a, b) = model.covariance()(ordering.perm[static_cast<std::size_t>(a)],
                                              ordering.perm[static_cast<std::size_t>(b)]);
    }
    const Eigen::MatrixXd L = cholesky_of(cov_pi);
    Eigen::VectorXd z(p);
    for (int a = 0; a < p; ++a) z(a) = stats::normal_quantile(u[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd x_pi = mean_pi + L * z;
    Eigen::VectorXd x(p);
    for (int a = 0; a < p; ++a) x(ordering.perm[static_cast<std::size_t>(a)]) = x_pi(a);
    return x;
}

FourSamples pick_freeze_samples(const GaussianModel& model, const Ordering& ordering,
                                std::int64_t n, std::uint64_t seed, int shared_head,
                                int shared_tail) {
    const int p = model.dimension();
    check_permutation(ordering, p);
    if (n < 2) fail(errc::too_few_rows, "need n >= 2 samples");
    if (shared_head < 1 || shared_head > p || shared_tail < 1 || shared_tail > p)
        fail(errc::invalid_argument, "shared widths must be in [1, p]");

    Eigen::MatrixXd cov_pi(p, p);
    Eigen::VectorXd mean_pi(p);
    for (int a = 0; a < p; ++a) {
        mean_pi(a) = model.mean()(ordering.perm[static_cast<std::size_t>(a)]);
        for (int b = 0; b < p; ++b)
            cov_pi(a, b) = model.covariance()(ordering.perm[static_cast<std::size_t>(a)],
                                              ordering.perm[static_cast<std::size_t>(b)]);
    }
    const Eigen::MatrixXd L = cholesky_of(cov_pi);

    // uniforms keyed by (seed, stream, row, position); positions are in
    // ordering space so the frozen coordinates line up with the hierarchy
    Eigen::MatrixXd zu(n, p), zup(n, p);
    for (std::int64_t r = 0; r < n; ++r) {
        for (int c = 0; c < p; ++c) {
            zu(r, c) = stats::normal_quantile(rng::uniform01(
                seed, rng::Stream::pick_freeze_u, static_cast<std::uint64_t>(r),
                static_cast<std::uint64_t>(c)));
            zup(r, c) = stats::normal_quantile(rng::uniform01(
                seed, rng::Stream::pick_freeze_u_prime, static_cast<std::uint64_t>(r),
                static_cast<std::uint64_t>(c)));
        }
    }
    Eigen::MatrixXd zf = zup;
    zf.leftCols(shared_head) = zu.leftCols(shared_head);
    Eigen::MatrixXd zl = zup;
    zl.rightCols(shared_tail) = zu.rightCols(shared_tail);

    auto transform = [&](const Eigen::MatrixXd& z) {
        Eigen::MatrixXd x_pi = z * L.transpose();
        x_pi.rowwise() += mean_pi.transpose();
        Eigen::MatrixXd x(n, p);
        for (int a = 0; a < p; ++a) x.col(ordering.perm[static_cast<std::size_t>(a)]) = x_pi.col(a);
        return x;
    };

    FourSamples fs;
    fs.x = transform(zu);
    fs.x_prime = transform(zup);
    fs.x_shared_first = transform(zf);
    fs.x_shared_last = transform(zl);
    fs.ordering = ordering;
    fs.shared_head = shared_head;
    fs.shared_tail = shared_tail;
    fs.seed = seed;
    return fs;
}

FourSamples pick_freeze_samples(const GaussianModel& model, int feature, std::int64_t n,
                                std::uint64_t seed) {
    return pick_freeze_samples(model, Ordering::cyclic(feature, model.dimension()), n, seed);
}

GaussianModel fit_gaussian_copula(const Eigen::MatrixXd& columns) {
    const auto n = columns.rows();
    const auto p = columns.cols();
    if (p < 1) fail(errc::empty_input, "no columns to fit");
    if (n < p + 2) fail(errc::too_few_rows, "need at least p + 2 rows for the copula fit");

    Eigen::MatrixXd scores(n, p);
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = columns(i, j);
        const double lo = *std::min_element(col.begin(), col.end());
        const double hi = *std::max_element(col.begin(), col.end());
        if (lo == hi)
            fail(errc::degenerate_column, "column " + std::to_string(j) + " is constant");
        const RankVector rv = ranks(col);
        for (Eigen::Index i = 0; i < n; ++i)
            scores(i, j) = stats::normal_quantile(
                (static_cast<double>(rv.ranks[static_cast<std::size_t>(i)]) - 0.5) /
                static_cast<double>(n));
    }
    scores.rowwise() -= scores.colwise().mean();
    Eigen::MatrixXd cov = scores.transpose() * scores / static_cast<double>(n - 1);
    cov = ((cov + cov.transpose()) / 2.0).eval();

    double delta = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd trial = cov + delta * Eigen::MatrixXd::Identity(p, p);
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success)
            return GaussianModel(Eigen::VectorXd::Zero(p), trial);
        delta = (delta == 0.0) ? 1e-10 : delta * 100.0;
    }
    fail(errc::not_spd, "copula covariance could not be regularized to SPD");
}

GaussianModel fit_gaussian_copula(const DataTable& table) {
    std::vector<std::string> names;
    for (const auto& c : table.columns())
        if (c.role == Role::feature || c.role == Role::sensitive) names.push_back(c.name);
    if (names.empty()) fail(errc::schema_error, "no feature or sensitive columns to fit");
    return fit_gaussian_copula(table.matrix(names));
}

namespace {

// Var(E[f | X_idx]) for f = w'X.
double explained_by(const Eigen::MatrixXd& C, const Eigen::VectorXd& w,
                    const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    const Eigen::VectorXd c_all = C * w;
    Eigen::VectorXd c(static_cast<Eigen::Index>(idx.size()));
    Eigen::MatrixXd Cs(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
        c(static_cast<Eigen::Index>(a)) = c_all(idx[a]);
        for (std::size_t b = 0; b < idx.size(); ++b) Cs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = C(idx[a], idx[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Cs);
    if (llt.info() != Eigen::Success) fail(errc::not_spd, "sub-covariance not positive definite");
    return c.dot(llt.solve(c));
}

// Var(E[f | Z_idx]) = w_idx' Sigma_res w_idx, with Sigma_res the covariance
// of the residual of X_idx given the complement.
double explained_by_residual(const Eigen::MatrixXd& C, const Eigen::VectorXd& w,
                             const std::vector<int>& idx, const std::vector<int>& comp) {
    if (idx.empty()) return 0.0;
    const auto m = static_cast<Eigen::Index>(idx.size());
    const auto k = static_cast<Eigen::Index>(comp.size());
    Eigen::MatrixXd Css(m, m), Csc(m, k), Ccc(k, k);
    Eigen::VectorXd ws(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        ws(a) = w(idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < m; ++b)
            Css(a, b) = C(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        for (Eigen::Index b = 0; b < k; ++b)
            Csc(a, b) = C(idx[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]);
    }
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            Ccc(a, b) = C(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]);
    Eigen::MatrixXd res = Css;
    if (k > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(Ccc);
        if (llt.info() != Eigen::Success) fail(errc::not_spd, "sub-covariance not positive definite");
        res -= Csc * llt.solve(Csc.transpose());
    }
    return ws.dot(res * ws);
}

} // namespace

TheoreticalQuartet theoretical_sobol_linear(const Eigen::VectorXd& weights,
                                            const GaussianModel& model,
                                            std::span<const int> feature_set) {
    const int p = model.dimension();
    if (weights.size() != p) fail(errc::length_mismatch, "weights size != dimension");
    if (weights.isZero(0.0)) fail(errc::invalid_argument, "weights must be non-zero");
    std::set<int> s_set(feature_set.begin(), feature_set.end());
    if (s_set.empty() || s_set.size() != feature_set.size())
        fail(errc::invalid_argument, "feature set must be non-empty and distinct");
    for (int f : s_set)
        if (f < 0 || f >= p) fail(errc::invalid_argument, "feature index out of range");

    std::vector<int> s(s_set.begin(), s_set.end()), comp;
    for (int f = 0; f < p; ++f)
        if (!s_set.count(f)) comp.push_back(f);

    const Eigen::MatrixXd& C = model.covariance();
    const double V = weights.dot(C * weights);
    if (V <= 0.0) fail(errc::degenerate_variance, "w'Cw is not positive");

    TheoreticalQuartet q;
    q.sob = explained_by(C, weights, s) / V;
    q.sob_total = (V - explained_by_residual(C, weights, comp, s)) / V;
    q.sob_ind = explained_by_residual(C, weights, s, comp) / V;
    q.sob_total_ind = (V - explained_by(C, weights, comp)) / V;
    return q;
}

TheoreticalQuartet theoretical_sobol_linear(const Eigen::VectorXd& weights,
                                            const GaussianModel& model, int feature) {
    const int fs[] = {feature};
    return theoretical_sobol_linear(weights, model, fs);
}

GaussianModel load_model_spec(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, std::string("model spec JSON: ") + e.what());
    }
    if (!j.contains("mean") || !j.contains("covariance"))
        fail(errc::schema_error, "model spec needs 'mean' and 'covariance'");
    std::vector<double> mean;
    std::vector<std::vector<double>> cov;
    try {
        mean = j["mean"].get<std::vector<double>>();
        cov = j["covariance"].get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, std::string("model spec JSON: ") + e.what());
    }
    const auto p = static_cast<Eigen::Index>(mean.size());
    if (static_cast<Eigen::Index>(cov.size()) != p)
        fail(errc::length_mismatch, "covariance row count != mean size");
    Eigen::VectorXd m(p);
    Eigen::MatrixXd C(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        m(i) = mean[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(cov[static_cast<std::size_t>(i)].size()) != p)
            fail(errc::length_mismatch, "covariance is not square");
        for (Eigen::Index k = 0; k < p; ++k) C(i, k) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    GaussianModel model(m, C);
    model.cholesky(); // validate SPD on load
    return model;
}

GaussianModel load_model_spec_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(errc::parse_error, "cannot open '" + path + "'");
    return load_model_spec(f);
}

} // namespace fairsens
