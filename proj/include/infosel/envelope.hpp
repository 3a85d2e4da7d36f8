#pragma once

#include <optional>
#include <span>
#include <vector>

#include "infosel/family.hpp"
#include "infosel/label_set.hpp"

namespace infosel {

/// One candidate set's line in the multiplier mu:
///   value(mu) = intercept + slope * mu
/// with intercept = w(C) * p(Y in C | x) and slope = p(Y in C | x) - (1 - alpha).
struct Line {
    LabelSet candidate;
    double weight = 0.0;
    double prob = 0.0;
    double intercept = 0.0;
    double slope = 0.0;

    double value_at(double mu) const { return intercept + slope * mu; }
};

/// Abscissa where `hi` overtakes `lo`; requires lo.slope < hi.slope.
/// Every breakpoint in the codebase comes from this one formula so that the
/// selector's three methods see bit-identical candidate values.
inline double line_intersect_mu(const Line& lo, const Line& hi) {
    return (lo.intercept - hi.intercept) / (hi.slope - lo.slope);
}

/// Zero crossing of a descending line; requires slope < 0.
inline double line_zero_mu(const Line& line) { return -line.intercept / line.slope; }

struct EnvelopeSegment {
    double start_mu = 0.0;  // active on [start_mu, next start_mu)
    Line line;
};

/// Piecewise-linear convex upper envelope of candidate lines on [0, inf).
/// Segments are half-open to the right, matching the right-continuous
/// practical selection rule; zero_crossing is the smallest mu where the
/// envelope value is <= 0, absent when the envelope stays positive.
struct UpperEnvelope {
    std::vector<EnvelopeSegment> segments;
    std::optional<double> zero_crossing;

    /// Value and active candidate of the segment containing mu.
    std::pair<double, const Line*> at(double mu) const;
};

/// Per-class probability sanity check shared by the line builders.
/// Throws ProbabilityOutOfRange.
void validate_prob_row(std::span<const double> prob_row);

/// Set-membership probability: sum of class probabilities over members,
/// clamped into [0,1].
double set_probability(std::span<const double> prob_row, const LabelSet& set);

/// One line per candidate set. Candidates must belong to the family.
std::vector<Line> build_lines(std::span<const double> prob_row,
                              const InformativeFamily& family, double alpha,
                              const std::vector<LabelSet>& candidates);

/// Upper envelope of the given lines. Lines equal within a 1e-12 comparator
/// (both slope and intercept) are merged in favor of smaller weight, then
/// lexicographic candidate, before construction. O(r log r).
UpperEnvelope upper_envelope(std::vector<Line> lines);

std::pair<double, LabelSet> evaluate_at(const UpperEnvelope& env, double mu);

std::optional<double> zero_crossing_of(const UpperEnvelope& env);

}  // namespace infosel
