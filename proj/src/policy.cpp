#include "infosel/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

// Tolerances for evaluating the policy at candidate mu values: breakpoints
// and zero crossings are intersection abscissas computed in double
// precision, so the coinciding line values differ by a few ulps there.
constexpr double kValueTieTol = 1e-9;
constexpr double kDecisionTol = 1e-12;

bool practical_prefers(const Line& a, const Line& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return a.candidate < b.candidate;
}

bool oracle_prefers(const Line& a, const Line& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.candidate < b.candidate;
}

}  // namespace

std::vector<LabelSet> reduce_candidates(std::span<const double> prob_row,
                                        const InformativeFamily& family) {
    if (family.kind() == FamilySpec::Kind::Explicit) return family.explicit_members();

    std::vector<int> classes;
    classes.reserve(static_cast<std::size_t>(family.class_count()));
    for (int k = 1; k <= family.class_count(); ++k) {
        if (!family.excluded().count(k)) classes.push_back(k);
    }
    std::stable_sort(classes.begin(), classes.end(), [&](int a, int b) {
        return prob_row[static_cast<std::size_t>(a - 1)] > prob_row[static_cast<std::size_t>(b - 1)];
    });

    const int max_j = std::min<int>(family.max_card(), static_cast<int>(classes.size()));
    std::vector<LabelSet> result;
    for (int j = family.min_card(); j <= max_j; ++j) {
        result.emplace_back(std::vector<int>(classes.begin(), classes.begin() + j));
    }
    return result;
}

PolicyDecision policy_at(std::span<const double> prob_row, const InformativeFamily& family,
                         double alpha, double mu, PolicyMode mode) {
    if (mu < 0.0) throw NegativeMu("mu must be nonnegative");
    const auto candidates = reduce_candidates(prob_row, family);
    const auto lines = build_lines(prob_row, family, alpha, candidates);

    double best = -kInf;
    for (const auto& line : lines) best = std::max(best, line.value_at(mu));

    const Line* winner = nullptr;
    for (const auto& line : lines) {
        if (line.value_at(mu) < best - kValueTieTol) continue;
        if (!winner) {
            winner = &line;
        } else if (mode == PolicyMode::Practical ? practical_prefers(line, *winner)
                                                 : oracle_prefers(line, *winner)) {
            winner = &line;
        }
    }

    PolicyDecision decision;
    decision.set = winner->candidate;
    decision.envelope_value = best;
    decision.selected = (mode == PolicyMode::Practical) ? best > kDecisionTol
                                                        : best >= -kDecisionTol;
    return decision;
}

double selection_statistic(const UpperEnvelope& env) {
    return env.zero_crossing ? *env.zero_crossing : kInf;
}

double coverage_statistic(const UpperEnvelope& env, int label) {
    const double zc = selection_statistic(env);
    for (const auto& seg : env.segments) {
        if (seg.start_mu >= zc) break;
        if (seg.line.candidate.contains(label)) return seg.start_mu;
    }
    return zc;
}

double selection_statistic(std::span<const double> prob_row, const InformativeFamily& family,
                           double alpha) {
    const auto env =
        upper_envelope(build_lines(prob_row, family, alpha, reduce_candidates(prob_row, family)));
    return selection_statistic(env);
}

double coverage_statistic(std::span<const double> prob_row, int label,
                          const InformativeFamily& family, double alpha) {
    const auto env =
        upper_envelope(build_lines(prob_row, family, alpha, reduce_candidates(prob_row, family)));
    return coverage_statistic(env, label);
}

KeyStats key_statistics(const std::vector<std::vector<double>>& cal_rows,
                        const std::vector<int>& cal_labels,
                        const std::vector<std::vector<double>>& test_rows,
                        const InformativeFamily& family, double alpha) {
    if (cal_rows.size() != cal_labels.size())
        throw DimensionMismatch("calibration rows and labels differ in length");
    KeyStats stats;
    stats.tilde_mu.reserve(cal_rows.size());
    stats.hat_mu.reserve(test_rows.size());
    for (std::size_t i = 0; i < cal_rows.size(); ++i) {
        stats.tilde_mu.push_back(coverage_statistic(cal_rows[i], cal_labels[i], family, alpha));
    }
    for (const auto& row : test_rows) {
        stats.hat_mu.push_back(selection_statistic(row, family, alpha));
    }
    return stats;
}

NestednessResult verify_nestedness(const UpperEnvelope& env) {
    for (std::size_t j = 0; j + 1 < env.segments.size(); ++j) {
        const auto& cur = env.segments[j].line.candidate;
        const auto& next = env.segments[j + 1].line.candidate;
        if (!cur.subset_of(next)) {
            return {false, env.segments[j + 1].start_mu, cur, next};
        }
    }
    return {};
}

NestednessResult verify_nestedness(std::span<const double> prob_row,
                                   const InformativeFamily& family, double alpha) {
    const auto env =
        upper_envelope(build_lines(prob_row, family, alpha, reduce_candidates(prob_row, family)));
    return verify_nestedness(env);
}

}  // namespace infosel
