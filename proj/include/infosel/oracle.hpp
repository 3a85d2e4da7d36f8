#pragma once

#include <cstddef>
#include <vector>

#include "infosel/family.hpp"
#include "infosel/label_set.hpp"

namespace infosel {

struct Atom {
    double mass = 0.0;
    std::vector<double> prob_row;
};

/// Finite representation of the joint distribution: a weighted list of
/// conditional probability rows. Masses sum to 1 within 1e-12; each row sums
/// to 1 within 1e-9.
struct AtomicModel {
    std::vector<Atom> atoms;
};

/// Throws if the model violates its invariants.
void validate_model(const AtomicModel& model, int class_count);

struct OracleFunctionals {
    double power = 0.0;       // sum of mass * w(C) * p(C) over selected atoms
    double constraint = 0.0;  // sum of mass * (1 - p(C) - alpha) over selected atoms
    double mfcr = 0.0;        // miscoverage mass / selection mass (0 when nothing selects)
};

struct OracleReport {
    double mu_star = 0.0;
    double power = 0.0;
    double constraint = 0.0;
    double mfcr = 0.0;
    double fcr_factor = 0.0;  // P(at least one of m test draws selects)
};

/// Population functionals at a fixed multiplier, evaluated with the
/// right-continuous Practical tie rules.
OracleFunctionals oracle_functionals(const AtomicModel& model, const InformativeFamily& family,
                                     double alpha, double mu);

/// Smallest multiplier with constraint <= 0, found by scanning the finite
/// event set (atom envelope breakpoints, zero crossings, and 0). Throws
/// DegenerateRegime when no atom's best set probability exceeds 1 - alpha;
/// use trivial_policy in that case.
OracleReport solve_mu_star(const AtomicModel& model, const InformativeFamily& family,
                           double alpha, std::size_t test_size = 1);

/// Mixture of the policies just below and just above mu_star, weighted so
/// the mixed constraint is exactly zero (hence mixture mfcr = alpha).
struct RandomizedPolicy {
    double mu_left = 0.0;
    double mu_right = 0.0;
    double q = 0.0;  // probability of using the left policy
    double power = 0.0;
    double mfcr = 0.0;
};

/// epsilon <= 0 picks half the gap to the nearest neighboring event.
/// Throws InvalidBracket when the constraint does not change sign across
/// [mu_star - epsilon, mu_star + epsilon].
RandomizedPolicy randomized_policy(const AtomicModel& model, const InformativeFamily& family,
                                   double alpha, double epsilon = 0.0);

struct TrivialDecision {
    LabelSet set;
    bool selected = false;
};

/// Fallback policy for the degenerate regime: report the most probable
/// candidate set, select when its probability reaches 1 - alpha. Ties go to
/// the larger weight, then lexicographic order.
std::vector<TrivialDecision> trivial_policy(const AtomicModel& model,
                                            const InformativeFamily& family, double alpha);

/// (fcr, factor) with factor = 1 - (1 - selection mass)^m.
std::pair<double, double> fcr_from_mfcr(const AtomicModel& model, const InformativeFamily& family,
                                        double alpha, double mu, std::size_t m);

}  // namespace infosel
