#include "infosel/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

constexpr double kLineMergeTol = 1e-12;

// Smaller weight first, then lexicographic candidate: the practical-mode
// rule for coincident lines.
const Line& merge_winner(const Line& a, const Line& b) {
    if (a.weight != b.weight) return a.weight < b.weight ? a : b;
    return a.candidate < b.candidate ? a : b;
}

}  // namespace

void validate_prob_row(std::span<const double> prob_row) {
    double sum = 0.0;
    for (double p : prob_row) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw ProbabilityOutOfRange("class probability outside [0,1]");
        sum += p;
    }
    if (sum > 1.0 + 1e-9)
        throw ProbabilityOutOfRange("probability row sums to more than 1");
}

double set_probability(std::span<const double> prob_row, const LabelSet& set) {
    double p = 0.0;
    for (int k : set.members()) p += prob_row[static_cast<std::size_t>(k - 1)];
    return std::min(p, 1.0);
}

std::vector<Line> build_lines(std::span<const double> prob_row,
                              const InformativeFamily& family, double alpha,
                              const std::vector<LabelSet>& candidates) {
    validate_prob_row(prob_row);
    const double target = 1.0 - alpha;
    std::vector<Line> lines;
    lines.reserve(candidates.size());
    for (const auto& set : candidates) {
        Line line;
        line.candidate = set;
        line.weight = family.weight_of(set);
        line.prob = set_probability(prob_row, set);
        line.intercept = line.weight * line.prob;
        line.slope = line.prob - target;
        lines.push_back(std::move(line));
    }
    return lines;
}

UpperEnvelope upper_envelope(std::vector<Line> lines) {
    if (lines.empty()) throw EmptyInput("upper_envelope requires at least one line");

    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        if (a.slope != b.slope) return a.slope < b.slope;
        return a.intercept < b.intercept;
    });

    // Collapse coincident / dominated parallel lines.
    std::vector<Line> kept;
    kept.reserve(lines.size());
    for (auto& line : lines) {
        if (!kept.empty()) {
            Line& last = kept.back();
            if (std::abs(line.slope - last.slope) <= kLineMergeTol &&
                std::abs(line.intercept - last.intercept) <= kLineMergeTol) {
                last = merge_winner(last, line);
                continue;
            }
            if (line.slope == last.slope) {  // parallel, strictly higher intercept wins
                last = line;
                continue;
            }
        }
        kept.push_back(std::move(line));
    }

    UpperEnvelope env;
    std::vector<EnvelopeSegment> stack;
    for (const auto& line : kept) {
        double start = 0.0;
        while (!stack.empty()) {
            start = line_intersect_mu(stack.back().line, line);
            if (start <= stack.back().start_mu) {
                stack.pop_back();
                start = 0.0;
            } else {
                break;
            }
        }
        if (stack.empty()) start = 0.0;
        stack.push_back({start, line});
    }
    env.segments = std::move(stack);

    // Locate the zero crossing, if any: walk segments until a descending
    // segment reaches zero within its half-open interval.
    for (std::size_t j = 0; j < env.segments.size(); ++j) {
        const Line& line = env.segments[j].line;
        const double v_start = line.value_at(env.segments[j].start_mu);
        if (v_start <= 0.0) {
            env.zero_crossing = env.segments[j].start_mu;
            break;
        }
        if (line.slope >= 0.0) break;  // envelope never descends again
        const double z = line_zero_mu(line);
        const bool last = (j + 1 == env.segments.size());
        if (last || z < env.segments[j + 1].start_mu) {
            env.zero_crossing = std::max(z, 0.0);
            break;
        }
    }
    return env;
}

std::pair<double, const Line*> UpperEnvelope::at(double mu) const {
    auto it = std::upper_bound(segments.begin(), segments.end(), mu,
                               [](double v, const EnvelopeSegment& s) { return v < s.start_mu; });
    const EnvelopeSegment& seg = *std::prev(it);
    return {seg.line.value_at(mu), &seg.line};
}

std::pair<double, LabelSet> evaluate_at(const UpperEnvelope& env, double mu) {
    if (mu < 0.0) throw NegativeMu("mu must be nonnegative");
    auto [value, line] = env.at(mu);
    return {value, line->candidate};
}

std::optional<double> zero_crossing_of(const UpperEnvelope& env) {
    return env.zero_crossing;
}

}  // namespace infosel
