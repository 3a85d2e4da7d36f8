#pragma once

#include <optional>
#include <span>
#include <vector>

#include "infosel/family.hpp"
#include "infosel/policy.hpp"

namespace infosel {

/// AllIntersections recomputes the policy from scratch at every candidate mu
/// (the reference implementation); EnvelopeTraversal sweeps a minimum
/// priority queue of envelope events with incremental integer counters;
/// ThresholdForm sorts the calibration key statistics (the production
/// default). All three return bit-identical outcomes.
enum class SelectionMethod { AllIntersections, EnvelopeTraversal, ThresholdForm };

struct SelectionOutcome {
    double mu_alpha = kInf;
    std::vector<std::size_t> selected;  // test indices, ascending
    std::vector<LabelSet> sets;         // parallel to selected
    double fcp_hat_at_solution = 0.0;
};

/// FCP estimate at a fixed counter state.
double fcp_hat_counts(std::size_t miscovered_selected, std::size_t selected,
                      std::size_t n, std::size_t m);

/// FCP estimate at mu from the key statistics.
double fcp_hat(double mu, std::span<const double> cal_stats,
               std::span<const double> test_stats, std::size_t n, std::size_t m);

SelectionOutcome run_og_infosp(const std::vector<std::vector<double>>& cal_rows,
                               const std::vector<int>& cal_labels,
                               const std::vector<std::vector<double>>& test_rows,
                               const InformativeFamily& family, double alpha,
                               SelectionMethod method = SelectionMethod::ThresholdForm);

/// Threshold rule fitted on the calibration sample alone, for streaming
/// application to examples arriving later.
struct CalOnlyRule {
    double mu_alpha = kInf;
    InformativeFamily family;
    double alpha = 0.0;
};

CalOnlyRule fit_cal_only(const std::vector<std::vector<double>>& cal_rows,
                         const std::vector<int>& cal_labels,
                         const InformativeFamily& family, double alpha);

std::optional<LabelSet> apply_cal_only(const CalOnlyRule& rule, std::span<const double> row);

/// Throws NestednessViolated unless the family certificate is Guaranteed or
/// every row passes the per-instance check.
void require_nestedness(const std::vector<std::vector<double>>& cal_rows,
                        const std::vector<std::vector<double>>& test_rows,
                        const InformativeFamily& family, double alpha);

}  // namespace infosel
