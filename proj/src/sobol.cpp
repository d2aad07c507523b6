#include "fairsens/sobol.hpp"

#include <array>
#include <cmath>

#include "fairsens/error.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

ModelFn linear_model_fn(Eigen::VectorXd weights) {
    return [w = std::move(weights)](const Eigen::MatrixXd& rows) {
        if (rows.cols() != w.size()) fail(errc::length_mismatch, "row width != weight size");
        Eigen::VectorXd y = rows * w;
        return std::vector<double>(y.data(), y.data() + y.size());
    };
}

PickFreezeBlock evaluate_block(const FourSamples& samples, const ModelFn& fn) {
    PickFreezeBlock b;
    b.n = samples.x.rows();
    b.seed = samples.seed;
    b.f_x = fn(samples.x);
    b.f_x_prime = fn(samples.x_prime);
    b.f_shared_first = fn(samples.x_shared_first);
    b.f_shared_last = fn(samples.x_shared_last);
    const auto n = static_cast<std::size_t>(b.n);
    if (b.f_x.size() != n || b.f_x_prime.size() != n || b.f_shared_first.size() != n ||
        b.f_shared_last.size() != n)
        fail(errc::length_mismatch, "model returned wrong number of predictions");
    for (const auto* v : {&b.f_x, &b.f_x_prime, &b.f_shared_first, &b.f_shared_last})
        for (double x : *v)
            if (!std::isfinite(x)) fail(errc::non_finite_input, "model returned non-finite value");
    return b;
}

const char* index_kind_name(IndexKind k) {
    switch (k) {
        case IndexKind::sob: return "sob";
        case IndexKind::sob_total: return "sob_total";
        case IndexKind::sob_ind: return "sob_ind";
        case IndexKind::sob_total_ind: return "sob_total_ind";
    }
    return "unknown";
}

const IndexEstimate& SobolQuartet::get(IndexKind k) const {
    switch (k) {
        case IndexKind::sob: return sob;
        case IndexKind::sob_total: return sob_total;
        case IndexKind::sob_ind: return sob_ind;
        case IndexKind::sob_total_ind: return sob_total_ind;
    }
    return sob;
}

namespace {

struct BlockMoments {
    double v_hat = 0.0;                 // four-sample average variance
    std::array<double, 4> means{};      // per-sample means
    std::array<double, 4> vars{};       // per-sample variances (n-1)
};

BlockMoments block_moments(const PickFreezeBlock& b) {
    BlockMoments m;
    const std::vector<double>* samples[4] = {&b.f_x, &b.f_x_prime, &b.f_shared_first,
                                             &b.f_shared_last};
    double mean_sq = 0.0;
    for (int a = 0; a < 4; ++a) {
        m.means[static_cast<std::size_t>(a)] = stats::mean(*samples[a]);
        m.vars[static_cast<std::size_t>(a)] = stats::variance(*samples[a], 1);
        m.v_hat += m.vars[static_cast<std::size_t>(a)] / 4.0;
    }
    for (double x : b.f_x) mean_sq += x * x;
    mean_sq /= static_cast<double>(b.n);
    if (m.v_hat <= 1e-12 * mean_sq || m.v_hat <= 0.0)
        fail(errc::degenerate_variance, "output variance is (numerically) zero");
    return m;
}

// Per-row deviation of the four-sample variance average.
double variance_influence(const PickFreezeBlock& b, const BlockMoments& m, std::int64_t k) {
    const std::vector<double>* samples[4] = {&b.f_x, &b.f_x_prime, &b.f_shared_first,
                                             &b.f_shared_last};
    double dv = 0.0;
    for (int a = 0; a < 4; ++a) {
        const double c = (*samples[a])[static_cast<std::size_t>(k)] - m.means[static_cast<std::size_t>(a)];
        dv += (c * c - m.vars[static_cast<std::size_t>(a)]) / 4.0;
    }
    return dv;
}

double covariance_numerator(const PickFreezeBlock& b, bool shared_first) {
    const auto& shared = shared_first ? b.f_shared_first : b.f_shared_last;
    double s = 0.0;
    for (std::int64_t k = 0; k < b.n; ++k)
        s += b.f_x[static_cast<std::size_t>(k)] *
             (shared[static_cast<std::size_t>(k)] - b.f_x_prime[static_cast<std::size_t>(k)]);
    return s / static_cast<double>(b.n);
}

double jansen_numerator(const PickFreezeBlock& b, bool shared_first) {
    const auto& shared = shared_first ? b.f_shared_first : b.f_shared_last;
    double s = 0.0;
    for (std::int64_t k = 0; k < b.n; ++k) {
        const double d = shared[static_cast<std::size_t>(k)] - b.f_x_prime[static_cast<std::size_t>(k)];
        s += d * d;
    }
    return s / (2.0 * static_cast<double>(b.n));
}

double stderr_impl(const PickFreezeBlock& b, IndexKind kind, const BlockMoments& m) {
    if (b.n < 30) fail(errc::too_few_rows, "CLT standard error needs n >= 30");
    const bool first = (kind == IndexKind::sob || kind == IndexKind::sob_total);
    const bool covariance_form = (kind == IndexKind::sob || kind == IndexKind::sob_ind);
    const auto& shared = first ? b.f_shared_first : b.f_shared_last;

    const double num = covariance_form ? covariance_numerator(b, first) : jansen_numerator(b, first);
    const double index = num / m.v_hat;

    // Var of (A_n / V_n) via the joint delta method: per-row influence
    // psi_k = (A_k - A - index * dV_k) / V.
    double ssq = 0.0, smean = 0.0;
    std::vector<double> psi(static_cast<std::size_t>(b.n));
    for (std::int64_t k = 0; k < b.n; ++k) {
        double a_k;
        if (covariance_form) {
            a_k = b.f_x[static_cast<std::size_t>(k)] *
                  (shared[static_cast<std::size_t>(k)] - b.f_x_prime[static_cast<std::size_t>(k)]);
        } else {
            const double d =
                shared[static_cast<std::size_t>(k)] - b.f_x_prime[static_cast<std::size_t>(k)];
            a_k = d * d / 2.0;
        }
        const double p = (a_k - num - index * variance_influence(b, m, k)) / m.v_hat;
        psi[static_cast<std::size_t>(k)] = p;
        smean += p;
    }
    smean /= static_cast<double>(b.n);
    for (double p : psi) ssq += (p - smean) * (p - smean);
    const double var_psi = ssq / static_cast<double>(b.n - 1);
    return std::sqrt(var_psi / static_cast<double>(b.n));
}

IndexEstimate make_estimate(const PickFreezeBlock& b, IndexKind kind, const BlockMoments& m,
                            double level) {
    const bool first = (kind == IndexKind::sob || kind == IndexKind::sob_total);
    const bool covariance_form = (kind == IndexKind::sob || kind == IndexKind::sob_ind);
    IndexEstimate e;
    e.value = (covariance_form ? covariance_numerator(b, first) : jansen_numerator(b, first)) / m.v_hat;
    e.std_error = stderr_impl(b, kind, m);
    e.method = Method::clt;
    e.n = b.n;
    e.seed = b.seed;
    return confidence_interval(e, level);
}

} // namespace

SobolQuartet estimate_quartet(const PickFreezeBlock& first_block,
                              const PickFreezeBlock& last_block, double level) {
    if (first_block.n != last_block.n) fail(errc::length_mismatch, "blocks differ in n");
    if (first_block.n < 10) fail(errc::too_few_rows, "need n >= 10");
    const BlockMoments m_first = block_moments(first_block);
    const BlockMoments m_last = block_moments(last_block);

    SobolQuartet q;
    q.n = first_block.n;
    q.seed = first_block.seed;
    q.sob = make_estimate(first_block, IndexKind::sob, m_first, level);
    q.sob_total = make_estimate(first_block, IndexKind::sob_total, m_first, level);
    q.sob_ind = make_estimate(last_block, IndexKind::sob_ind, m_last, level);
    q.sob_total_ind = make_estimate(last_block, IndexKind::sob_total_ind, m_last, level);
    return q;
}

double clt_stderr(const PickFreezeBlock& block, IndexKind kind) {
    return stderr_impl(block, kind, block_moments(block));
}

SobolQuartet estimate_feature_quartet(const GaussianModel& model, const ModelFn& fn, int feature,
                                      std::int64_t n, std::uint64_t seed, double level) {
    const int p = model.dimension();
    const auto first = pick_freeze_samples(model, Ordering::cyclic(feature, p), n, seed);
    const auto last = pick_freeze_samples(model, Ordering::cyclic((feature + 1) % p, p), n, seed);
    SobolQuartet q = estimate_quartet(evaluate_block(first, fn), evaluate_block(last, fn), level);
    q.features = {feature};
    return q;
}

SobolQuartet estimate_group_quartet(const GaussianModel& model, const ModelFn& fn,
                                    std::span<const int> features, std::int64_t n,
                                    std::uint64_t seed, double level) {
    const int p = model.dimension();
    const int m = static_cast<int>(features.size());
    const auto first =
        pick_freeze_samples(model, Ordering::group_first(features, p), n, seed, m, m);
    const auto last = pick_freeze_samples(model, Ordering::group_last(features, p), n, seed, m, m);
    SobolQuartet q = estimate_quartet(evaluate_block(first, fn), evaluate_block(last, fn), level);
    q.features.assign(features.begin(), features.end());
    return q;
}

std::vector<BoundViolation> check_bounds(const SobolQuartet& q, double slack) {
    if (slack < 0.0) {
        slack = 3.0 * std::max({q.sob.std_error, q.sob_total.std_error, q.sob_ind.std_error,
                                q.sob_total_ind.std_error});
    }
    std::vector<BoundViolation> out;
    auto check = [&](const char* lhs_name, double lhs, const char* rhs_name, double rhs) {
        if (lhs > rhs + slack) out.push_back({lhs_name, rhs_name, lhs - rhs});
    };
    check("0", 0.0, "sob_ind", q.sob_ind.value);
    check("sob_ind", q.sob_ind.value, "sob", q.sob.value);
    check("sob", q.sob.value, "sob_total", q.sob_total.value);
    check("sob_total", q.sob_total.value, "1", 1.0);
    check("sob_ind", q.sob_ind.value, "sob_total_ind", q.sob_total_ind.value);
    check("sob_total_ind", q.sob_total_ind.value, "sob_total", q.sob_total.value);
    return out;
}

} // namespace fairsens
