#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairsens/cvm.hpp"
#include "fairsens/dataset.hpp"
#include "fairsens/estimate.hpp"
#include "fairsens/gaussian.hpp"
#include "fairsens/sobol.hpp"

namespace fairsens {

enum class MeasureKind {
    statistical_parity,
    avoiding_disparate_treatment,
    equality_of_odds,
    avoiding_disparate_mistreatment,
};

enum class LossKind { zero_one, squared };

enum class Verdict { fair, approximately_fair, unfair, inconclusive };

const char* measure_name(MeasureKind m);
const char* loss_name(LossKind l);
const char* verdict_name(Verdict v);

// CI-aware three-valued call with an exact-zero refinement:
//   ci_high <= eps and value == 0  -> fair
//   ci_high <= eps                 -> approximately_fair
//   ci_low  >  eps                 -> unfair
//   otherwise                      -> inconclusive
// Raising eps never moves a verdict toward unfair.
Verdict classify(const IndexEstimate& index, double epsilon);

struct FairnessVerdict {
    MeasureKind measure = MeasureKind::statistical_parity;
    std::string target = "predictor"; // or "loss"
    std::vector<std::string> sensitive;
    IndexEstimate index;
    double epsilon = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::string note;
};

// Binary disparate-impact cross-check, filled when both the sensitive column
// and the predictions are binary: Var(E[f|S]) == p(1-p) * DI^2 holds exactly
// with population moments.
struct DiCheck {
    double p_hat = 0.0;
    double di = 0.0;
    double identity_value = 0.0; // p(1-p) DI^2 / Var(f)
};

struct StatisticalParityResult {
    FairnessVerdict verdict;
    std::optional<DiCheck> di_check;
};

struct BootstrapOptions {
    int replicates = 0; // 0 disables the bootstrap
    double level = 0.95;
    std::uint64_t seed = 0;
};

// Grouped plug-in for discrete sensitive columns: Var of group means over
// total variance, population moments (that makes the DI identity exact).
// A constant-prediction input yields a documented fair-by-degeneracy verdict.
StatisticalParityResult statistical_parity(std::span<const double> predictions,
                                           const std::vector<std::span<const double>>& sensitive,
                                           const std::vector<std::string>& sensitive_names,
                                           double epsilon,
                                           const BootstrapOptions& bootstrap = {});

// Pick-freeze route for a model function (continuous or discrete sensitive
// features): first-order group index of the sensitive block.
FairnessVerdict statistical_parity_model(const ModelFn& fn, const GaussianModel& model,
                                         std::span<const int> sensitive_features,
                                         const std::vector<std::string>& sensitive_names,
                                         std::int64_t n_mc, std::uint64_t seed, double epsilon);

// Observational route for continuous sensitive features without query
// access: classical rank index of the predictions against the sensitive
// columns, bootstrap CI when requested.
FairnessVerdict statistical_parity_rank(const DataTable& table,
                                        const std::string& prediction_column,
                                        const std::vector<std::string>& sensitive_names,
                                        double epsilon, std::uint64_t tie_seed,
                                        const BootstrapOptions& bootstrap = {});

// Total group index of the sensitive block; needs query access.
FairnessVerdict disparate_treatment(const ModelFn& fn, const GaussianModel& model,
                                    std::span<const int> sensitive_features,
                                    const std::vector<std::string>& sensitive_names,
                                    std::int64_t n_mc, std::uint64_t seed, double epsilon);

// Discrete target: frequency-weighted within-group index (each y-group needs
// >= 3 rows). Continuous target: conditional rank statistic with z = y.
FairnessVerdict equality_of_odds(std::span<const double> predictions,
                                 const std::vector<std::span<const double>>& sensitive,
                                 const std::vector<std::string>& sensitive_names,
                                 std::span<const double> target, double epsilon,
                                 std::uint64_t tie_seed, const BootstrapOptions& bootstrap = {});

std::vector<double> compute_loss(std::span<const double> predictions,
                                 std::span<const double> target, LossKind loss);

// Statistical parity applied to the rowwise loss.
StatisticalParityResult disparate_mistreatment(std::span<const double> predictions,
                                               std::span<const double> target,
                                               const std::vector<std::span<const double>>& sensitive,
                                               const std::vector<std::string>& sensitive_names,
                                               LossKind loss, double epsilon,
                                               const BootstrapOptions& bootstrap = {});

enum class CausalFindingKind { no_path, no_direct_edge, direct_influence_possible };

const char* causal_finding_name(CausalFindingKind k);

struct CausalFinding {
    CausalFindingKind kind = CausalFindingKind::direct_influence_possible;
    IndexEstimate sob_total;
    IndexEstimate sob_total_ind;
    double epsilon = 0.0;
    std::string note;
};

// One-sided screening: nullity of SobT rules out every path, nullity of
// SobT^ind rules out the direct edge; nothing is ever claimed to exist.
CausalFinding causal_screen(const SobolQuartet& quartet, double epsilon);

struct IntersectionalFindings {
    SobolQuartet group;
    std::vector<SobolQuartet> singletons;
    std::vector<std::string> sensitive_names;
    double epsilon = 0.0;
    // A singleton with SobT ~ 0 contributes in no combination, so removing it
    // must leave the group total index unchanged; false when the estimates
    // contradict that beyond noise.
    bool total_bound_consistent = true;
    std::string total_bound_note;
    // Singleton first-order indices near zero certify nothing about the
    // group; set when that blind spot is live, with the group value attached.
    bool joint_effect_warning = false;
    std::string joint_effect_note;
};

IntersectionalFindings intersectional_audit(const ModelFn& fn, const GaussianModel& model,
                                            std::span<const int> sensitive_features,
                                            const std::vector<std::string>& sensitive_names,
                                            std::int64_t n_mc, std::uint64_t seed, double epsilon);

} // namespace fairsens
