#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairsens/experiments.hpp"
#include "fairsens/fairness.hpp"

namespace fairsens {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Rendered with fixed field order and 17-significant-digit numbers, so equal
// inputs and seeds give byte-identical output.
std::string format_double(double v);

struct VerdictEntry {
    FairnessVerdict verdict;
    std::optional<DiCheck> di_check;
};

struct NamedQuartet {
    std::string label;
    SobolQuartet quartet;
};

struct NamedCvm {
    std::string label;
    CvmEstimate estimate;
};

struct NamedCausal {
    std::string label;
    CausalFinding finding;
};

struct AuditReport {
    std::int64_t n_rows = 0;
    std::vector<std::string> column_names;
    std::uint64_t dataset_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t tie_seed = 0;
    std::int64_t n_mc = 0;
    double epsilon = 0.0;
    std::string model_source; // "none", "spec_file", "external_command", "fitted_copula"
    std::vector<VerdictEntry> verdicts;
    std::vector<NamedQuartet> quartets;
    std::vector<NamedCvm> cvm_estimates;
    std::optional<IntersectionalFindings> intersectional;
    std::vector<NamedCausal> causal;
    std::vector<std::string> notes;
};

std::string to_json(const AuditReport& report);
std::string to_csv(const AuditReport& report);

std::string to_json(const std::vector<ExperimentRow>& rows, const ExperimentSpec& spec);
std::string to_csv(const std::vector<ExperimentRow>& rows, const ExperimentSpec& spec);

std::string to_json(const std::vector<CoverageRow>& rows, const ExperimentSpec& spec,
                    std::int64_t n, double level);
std::string to_csv(const std::vector<CoverageRow>& rows, const ExperimentSpec& spec,
                   std::int64_t n, double level);

} // namespace fairsens
