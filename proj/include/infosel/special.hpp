#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "infosel/family.hpp"
#include "infosel/label_set.hpp"

namespace infosel {

/// (1 + #{calibration scores >= test score}) / (n + 1).
double conformal_pvalue(std::span<const double> cal_scores, double test_score);

/// Step-up rule: reject all indices with p <= k_hat * alpha / m where
/// k_hat = max{k: p_(k) <= k * alpha / m}. Indices ascending.
std::vector<std::size_t> bh_select(std::span<const double> pvalues, double alpha);

struct AbstentionOutput {
    double t_alpha = 1.0;
    bool feasible = false;            // some threshold met the FCP bound
    std::vector<std::size_t> reported;  // test indices, ascending
    std::vector<int> predicted;         // parallel predicted classes
};

/// Classification with abstention: report the top class for test rows whose
/// top probability clears the smallest threshold with estimated FCP <= alpha.
/// Equivalent to the selector with the singleton family.
AbstentionOutput classify_with_abstention(const std::vector<std::vector<double>>& cal_rows,
                                          const std::vector<int>& cal_labels,
                                          const std::vector<std::vector<double>>& test_rows,
                                          double alpha);

/// Novelty detection from estimated novelty probabilities: calibration rows
/// are all non-novel. Returns novel test indices; equivalent to BH over the
/// corresponding conformal p-values.
std::vector<std::size_t> detect_novelties(std::span<const double> cal_novelty_probs,
                                          std::span<const double> test_novelty_probs,
                                          double alpha);

/// Split-conformal set {y: 1 - p(y) <= q_hat} with q_hat the
/// ceil((1-alpha)(n+1))-th smallest calibration score (full set when the
/// rank exceeds n).
LabelSet split_conformal_set(std::span<const double> cal_scores, std::span<const double> prob_row,
                             double alpha);

/// Sentinel returned by adjusted_level when no grid level gives an
/// informative set.
inline constexpr double kNeverInformative = 2.0;

/// Smallest alpha on the grid {k/(n+1)} at which the split-conformal set
/// belongs to the family.
double adjusted_level(std::span<const double> prob_row, std::span<const double> cal_scores,
                      const InformativeFamily& family);

struct BaselineOutcome {
    std::vector<std::size_t> selected;  // test indices, ascending
    std::vector<LabelSet> sets;         // parallel to selected
};

/// BH over adjusted levels, then split-conformal sets for the selected
/// examples at the reduced level alpha * |S| / m.
BaselineOutcome run_info_sp(const std::vector<std::vector<double>>& cal_rows,
                            const std::vector<int>& cal_labels,
                            const std::vector<std::vector<double>>& test_rows,
                            const InformativeFamily& family, double alpha);

/// Level-(1-alpha) split-conformal sets for every test row; keep the ones in
/// the family. No selection adjustment (a baseline known to overshoot FCR).
BaselineOutcome run_classic_baseline(const std::vector<std::vector<double>>& cal_rows,
                                     const std::vector<int>& cal_labels,
                                     const std::vector<std::vector<double>>& test_rows,
                                     const InformativeFamily& family, double alpha);

}  // namespace infosel
