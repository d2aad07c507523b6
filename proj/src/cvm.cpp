#include "fairsens/cvm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairsens/error.hpp"
#include "fairsens/rng.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

const char* cvm_kind_name(CvmKind k) {
    switch (k) {
        case CvmKind::classical: return "classical";
        case CvmKind::independent: return "independent";
        case CvmKind::independent_alt: return "independent_alt";
        case CvmKind::conditional_T: return "conditional_T";
        case CvmKind::unconditional_T: return "unconditional_T";
    }
    return "unknown";
}

namespace {

void check_rows(std::int64_t n, const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != n) fail(errc::length_mismatch, std::string(what) + " row count mismatch");
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

struct ConditionalSums {
    std::int64_t numer = 0; // sum (min{R,R_M} - min{R,R_N})
    std::int64_t denom = 0; // sum (R - min{R,R_N})
    std::int64_t s_sum = 0; // sum L (n - L)
    std::int64_t n = 0;
};

ConditionalSums conditional_sums(std::span<const double> y, const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& z, std::uint64_t tie_seed) {
    const auto n = static_cast<std::int64_t>(y.size());
    if (n < 3) fail(errc::too_few_rows, "need n >= 3");
    check_rows(n, x, "x");
    check_rows(n, z, "z");
    const RankVector rv = ranks(y);
    const NeighborMap nn_z = nearest_neighbors(z, tie_seed);
    const NeighborMap nn_xz = nearest_neighbors(hcat(x, z), tie_seed);
    ConditionalSums s;
    s.n = n;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::int64_t r = rv.ranks[idx];
        const std::int64_t r_m = rv.ranks[static_cast<std::size_t>(nn_xz.nn_index[idx])];
        const std::int64_t r_n = rv.ranks[static_cast<std::size_t>(nn_z.nn_index[idx])];
        s.numer += std::min(r, r_m) - std::min(r, r_n);
        s.denom += r - std::min(r, r_n);
        const std::int64_t l = rv.geq_counts[idx];
        s.s_sum += l * (n - l);
    }
    return s;
}

} // namespace

CvmEstimate conditional_T(std::span<const double> y, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& z, std::uint64_t tie_seed) {
    const ConditionalSums s = conditional_sums(y, x, z, tie_seed);
    if (s.denom == 0)
        fail(errc::degenerate_denominator, "Y is constant on every Z-neighborhood");
    CvmEstimate e;
    e.value = static_cast<double>(s.numer) / static_cast<double>(s.denom);
    e.kind = CvmKind::conditional_T;
    e.n = s.n;
    e.tie_seed = tie_seed;
    return e;
}

CvmEstimate unconditional_T(std::span<const double> y, const Eigen::MatrixXd& z,
                            std::uint64_t tie_seed) {
    const auto n = static_cast<std::int64_t>(y.size());
    if (n < 3) fail(errc::too_few_rows, "need n >= 3");
    check_rows(n, z, "z");
    const RankVector rv = ranks(y);
    const NeighborMap nn = nearest_neighbors(z, tie_seed);
    std::int64_t numer = 0, denom = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::int64_t r = rv.ranks[idx];
        const std::int64_t r_m = rv.ranks[static_cast<std::size_t>(nn.nn_index[idx])];
        const std::int64_t l = rv.geq_counts[idx];
        numer += n * std::min(r, r_m) - l * l;
        denom += l * (n - l);
    }
    if (denom == 0) fail(errc::degenerate_denominator, "Y is constant");
    CvmEstimate e;
    e.value = static_cast<double>(numer) / static_cast<double>(denom);
    e.kind = CvmKind::unconditional_T;
    e.n = n;
    e.tie_seed = tie_seed;
    return e;
}

CvmEstimate cvm_classical(const DataTable& table, const std::string& y_column,
                          const std::vector<std::string>& feature_columns,
                          std::uint64_t tie_seed) {
    const auto& y = table.column(y_column).values;
    CvmEstimate e = unconditional_T(y, table.matrix(feature_columns), tie_seed);
    e.kind = CvmKind::classical;
    return e;
}

std::pair<CvmEstimate, CvmEstimate> cvm_independent_pair(const DataTable& table,
                                                         const std::string& y_column,
                                                         const std::string& feature,
                                                         std::uint64_t tie_seed) {
    std::vector<std::string> others;
    for (const auto& c : table.columns())
        if ((c.role == Role::feature || c.role == Role::sensitive) && c.name != feature &&
            c.name != y_column)
            others.push_back(c.name);
    if (others.empty()) fail(errc::invalid_argument, "need at least two feature columns");

    const auto& y = table.column(y_column).values;
    const Eigen::MatrixXd x = table.matrix({feature});
    const Eigen::MatrixXd z = table.matrix(others);

    const ConditionalSums s = conditional_sums(y, x, z, tie_seed);
    const auto n = s.n;

    if (s.denom == 0)
        fail(errc::degenerate_denominator, "Y is constant on every Z-neighborhood");
    if (s.s_sum == 0) fail(errc::degenerate_denominator, "Y is constant");
    const double t_cond = static_cast<double>(s.numer) / static_cast<double>(s.denom);
    const CvmEstimate t_z = unconditional_T(y, z, tie_seed);

    CvmEstimate u;
    u.value = t_cond * (1.0 - t_z.value);
    u.kind = CvmKind::independent;
    u.n = n;
    u.tie_seed = tie_seed;

    // Q_n/S_n reuses the same integer sums; the n^-2 and n^-3 factors cancel
    // into a single factor of n.
    CvmEstimate alt;
    alt.value = static_cast<double>(s.numer) * static_cast<double>(n) /
                static_cast<double>(s.s_sum);
    alt.kind = CvmKind::independent_alt;
    alt.n = n;
    alt.tie_seed = tie_seed;
    return {u, alt};
}

CvmEstimate cvm_independent(const DataTable& table, const std::string& y_column,
                            const std::string& feature, std::uint64_t tie_seed) {
    return cvm_independent_pair(table, y_column, feature, tie_seed).first;
}

CvmEstimate cvm_independent_alt(const DataTable& table, const std::string& y_column,
                                const std::string& feature, std::uint64_t tie_seed) {
    return cvm_independent_pair(table, y_column, feature, tie_seed).second;
}

double grouped_conditional_index(std::span<const double> f,
                                 const std::vector<std::span<const double>>& sensitive,
                                 std::span<const double> y) {
    const auto n = static_cast<std::int64_t>(f.size());
    if (n < 1) fail(errc::empty_input, "no rows");
    if (static_cast<std::int64_t>(y.size()) != n) fail(errc::length_mismatch, "y length");
    for (const auto& s : sensitive)
        if (static_cast<std::int64_t>(s.size()) != n) fail(errc::length_mismatch, "s length");

    const double var_f = stats::variance(f, 0);
    if (var_f <= 0.0) fail(errc::degenerate_variance, "predictions are constant");

    // y-group -> (s-group -> (count, sum))
    std::map<double, std::map<std::vector<double>, std::pair<std::int64_t, double>>> groups;
    std::map<double, std::int64_t> y_counts;
    for (std::int64_t i = 0; i < n; ++i) {
        std::vector<double> key;
        key.reserve(sensitive.size());
        for (const auto& s : sensitive) key.push_back(s[static_cast<std::size_t>(i)]);
        auto& cell = groups[y[static_cast<std::size_t>(i)]][key];
        cell.first += 1;
        cell.second += f[static_cast<std::size_t>(i)];
        y_counts[y[static_cast<std::size_t>(i)]] += 1;
    }

    double index = 0.0;
    for (const auto& [y_value, cells] : groups) {
        const auto n_y = y_counts[y_value];
        if (n_y < 3)
            fail(errc::group_too_small, "y-group has fewer than 3 rows");
        // within-group variance of the s-cell means, cell-frequency weighted
        double group_mean = 0.0;
        for (const auto& [key, cell] : cells) {
            (void)key;
            group_mean += cell.second;
        }
        group_mean /= static_cast<double>(n_y);
        double var_means = 0.0;
        for (const auto& [key, cell] : cells) {
            (void)key;
            const double cell_mean = cell.second / static_cast<double>(cell.first);
            const double w = static_cast<double>(cell.first) / static_cast<double>(n_y);
            var_means += w * (cell_mean - group_mean) * (cell_mean - group_mean);
        }
        index += (static_cast<double>(n_y) / static_cast<double>(n)) * var_means;
    }
    return index / var_f;
}

IndexEstimate bootstrap_ci(const TableEstimator& estimator, const DataTable& table, int B,
                           double level, std::uint64_t seed) {
    if (B < 100) fail(errc::invalid_argument, "need at least 100 bootstrap replicates");
    const double z = stats::z_for_level(level); // validates level
    (void)z;

    const auto n = table.n_rows();
    const double point = estimator(table, seed);

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(B));
    int failures = 0;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    for (int b = 0; b < B; ++b) {
        for (std::int64_t k = 0; k < n; ++k) {
            const std::uint64_t h =
                rng::hash_key(seed, static_cast<std::uint64_t>(rng::Stream::bootstrap),
                              static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(k));
            idx[static_cast<std::size_t>(k)] =
                static_cast<std::int64_t>(rng::bounded(h, static_cast<std::uint64_t>(n)));
        }
        try {
            const DataTable resampled = table.resample(idx);
            values.push_back(
                estimator(resampled, rng::derive(seed, rng::Stream::replicate,
                                                 static_cast<std::uint64_t>(b))));
        } catch (const Error&) {
            ++failures;
        }
    }
    if (failures * 10 > B)
        fail(errc::bootstrap_unstable, std::to_string(failures) + " of " + std::to_string(B) +
                                           " replicates failed");

    std::sort(values.begin(), values.end());
    auto percentile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = static_cast<std::size_t>(std::ceil(pos));
        const double w = pos - std::floor(pos);
        return (1.0 - w) * values[lo] + w * values[hi];
    };

    IndexEstimate e;
    e.value = point;
    e.std_error = values.size() > 1 ? std::sqrt(stats::variance(values, 1)) : 0.0;
    // percentile interval, widened if needed so it always brackets the point
    e.ci_low = std::min(percentile((1.0 - level) / 2.0), point);
    e.ci_high = std::max(percentile((1.0 + level) / 2.0), point);
    e.level = level;
    e.method = Method::bootstrap;
    e.n = n;
    e.seed = seed;
    return e;
}

} // namespace fairsens
