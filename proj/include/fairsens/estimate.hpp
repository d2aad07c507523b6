#pragma once

#include <cstdint>
#include <string>

namespace fairsens {

enum class Method { clt, bootstrap, plugin, oracle };

const char* method_name(Method m);

// A point estimate with its uncertainty. `ci_low == value == ci_high`
// for plugin/oracle estimates until an interval is attached.
struct IndexEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.0;
    Method method = Method::plugin;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

// Central normal interval value +/- z * std_error; records the level.
IndexEstimate confidence_interval(IndexEstimate estimate, double level);

IndexEstimate point_estimate(double value, Method method, std::int64_t n, std::uint64_t seed);

} // namespace fairsens
