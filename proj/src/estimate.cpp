#include "fairsens/estimate.hpp"

#include "fairsens/error.hpp"
#include "fairsens/stats.hpp"

namespace fairsens {

const char* method_name(Method m) {
    switch (m) {
        case Method::clt: return "clt";
        case Method::bootstrap: return "bootstrap";
        case Method::plugin: return "plugin";
        case Method::oracle: return "oracle";
    }
    return "unknown";
}

IndexEstimate confidence_interval(IndexEstimate estimate, double level) {
    const double z = stats::z_for_level(level); // throws InvalidLevel
    estimate.level = level;
    estimate.ci_low = estimate.value - z * estimate.std_error;
    estimate.ci_high = estimate.value + z * estimate.std_error;
    return estimate;
}

IndexEstimate point_estimate(double value, Method method, std::int64_t n, std::uint64_t seed) {
    IndexEstimate e;
    e.value = e.ci_low = e.ci_high = value;
    e.method = method;
    e.n = n;
    e.seed = seed;
    return e;
}

} // namespace fairsens
