#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fairsens::stats {

// Standard normal quantile, absolute error below 1e-11 on
// [1e-12, 1 - 1e-12]; inputs are clamped to that range.
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

// Two-sided z value for a central interval at the given level.
double z_for_level(double level);

double mean(std::span<const double> v);

// ddof = 1 gives the unbiased estimate, ddof = 0 the population form.
double variance(std::span<const double> v, int ddof = 1);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v, int ddof = 1);

} // namespace fairsens::stats
