#pragma once

#include <limits>
#include <span>
#include <vector>

#include "infosel/envelope.hpp"
#include "infosel/family.hpp"

namespace infosel {

/// Oracle mode decides on envelope >= 0 and breaks value ties toward larger
/// weight; Practical mode decides on envelope > 0 and breaks ties toward
/// smaller weight (the right-continuous rule). Both fall back to
/// lexicographic candidate order.
enum class PolicyMode { Oracle, Practical };

struct PolicyDecision {
    LabelSet set;
    bool selected = false;
    double envelope_value = 0.0;
};

struct KeyStats {
    std::vector<double> tilde_mu;  // per calibration example; +inf possible
    std::vector<double> hat_mu;    // per test example; +inf possible
};

struct NestednessResult {
    bool ok = true;
    double mu = 0.0;  // breakpoint of the first violation
    LabelSet before;
    LabelSet after;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Candidate reduction: for cardinality-based families, the top-j
/// non-excluded classes by probability for each allowed cardinality j
/// (ties by class index ascending); for explicit families, the whole family.
/// The result contains every set that can appear on the example's envelope.
std::vector<LabelSet> reduce_candidates(std::span<const double> prob_row,
                                        const InformativeFamily& family);

/// The per-example decision (C^mu, D^mu) at a single multiplier value.
PolicyDecision policy_at(std::span<const double> prob_row, const InformativeFamily& family,
                         double alpha, double mu, PolicyMode mode);

/// Smallest mu at which the example stops being selected (envelope zero
/// crossing, +inf if the envelope stays positive).
double selection_statistic(std::span<const double> prob_row, const InformativeFamily& family,
                           double alpha);

/// Smallest mu at which the example stops counting as a miscovered
/// selection: the first segment start whose active set contains the label,
/// capped by the zero crossing.
double coverage_statistic(std::span<const double> prob_row, int label,
                          const InformativeFamily& family, double alpha);

double selection_statistic(const UpperEnvelope& env);
double coverage_statistic(const UpperEnvelope& env, int label);

/// tilde_mu for every calibration row and hat_mu for every test row.
/// Requires nestedness (guaranteed certificate or per-row verification).
KeyStats key_statistics(const std::vector<std::vector<double>>& cal_rows,
                        const std::vector<int>& cal_labels,
                        const std::vector<std::vector<double>>& test_rows,
                        const InformativeFamily& family, double alpha);

/// Walks consecutive envelope segments; ok iff each active set is contained
/// in the next.
NestednessResult verify_nestedness(std::span<const double> prob_row,
                                   const InformativeFamily& family, double alpha);
NestednessResult verify_nestedness(const UpperEnvelope& env);

}  // namespace infosel
