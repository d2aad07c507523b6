#include "fairsens/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fairsens/error.hpp"

namespace fairsens::stats {

namespace {

// Acklam's rational approximation to the normal quantile (~1.15e-9 relative),
// followed by one Halley refinement step against erfc, which brings the
// absolute error near machine precision over the clamped domain.
double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Left-half quantile (p <= 0.5), where Phi(x) = erfc(-x/sqrt(2))/2 is free
// of cancellation and the Halley step lands near machine precision.
double quantile_left(double p) {
    double x = acklam(p);
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

} // namespace

double normal_quantile(double p) {
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    // 1 - p is exact for p >= 0.5, so the right tail reuses the left path
    return p > 0.5 ? -quantile_left(1.0 - p) : quantile_left(p);
}

double z_for_level(double level) {
    if (!(level > 0.0 && level < 1.0)) fail(errc::invalid_level, "level must be in (0,1)");
    return normal_quantile(0.5 * (1.0 + level));
}

double mean(std::span<const double> v) {
    if (v.empty()) fail(errc::empty_input, "mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v, int ddof) {
    const auto n = static_cast<std::int64_t>(v.size());
    if (n <= ddof) fail(errc::too_few_rows, "variance needs more than ddof observations");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(n - ddof);
}

double mean(const std::vector<double>& v) { return mean(std::span<const double>(v)); }
double variance(const std::vector<double>& v, int ddof) {
    return variance(std::span<const double>(v), ddof);
}

} // namespace fairsens::stats
