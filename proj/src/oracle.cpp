#include "infosel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infosel/envelope.hpp"
#include "infosel/errors.hpp"
#include "infosel/policy.hpp"

namespace infosel {

namespace {

std::vector<UpperEnvelope> atom_envelopes(const AtomicModel& model,
                                          const InformativeFamily& family, double alpha) {
    std::vector<UpperEnvelope> envs;
    envs.reserve(model.atoms.size());
    for (const auto& atom : model.atoms) {
        envs.push_back(upper_envelope(
            build_lines(atom.prob_row, family, alpha, reduce_candidates(atom.prob_row, family))));
    }
    return envs;
}

// Event mus where some atom's policy can change: breakpoints and zero
// crossings of the atom envelopes, plus 0. Sorted ascending, deduplicated.
std::vector<double> event_grid(const std::vector<UpperEnvelope>& envs) {
    std::vector<double> events{0.0};
    for (const auto& env : envs) {
        for (std::size_t s = 1; s < env.segments.size(); ++s) {
            if (env.segments[s].start_mu > 0.0) events.push_back(env.segments[s].start_mu);
        }
        if (env.zero_crossing && *env.zero_crossing > 0.0) events.push_back(*env.zero_crossing);
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    return events;
}

OracleFunctionals functionals_at(const AtomicModel& model, const InformativeFamily& family,
                                 double alpha, double mu) {
    double power = 0.0;
    double constraint = 0.0;
    double miss_mass = 0.0;
    double sel_mass = 0.0;
    for (const auto& atom : model.atoms) {
        const auto decision = policy_at(atom.prob_row, family, alpha, mu, PolicyMode::Practical);
        if (!decision.selected) continue;
        const double p = set_probability(atom.prob_row, decision.set);
        power += atom.mass * family.weight_of(decision.set) * p;
        constraint += atom.mass * (1.0 - p - alpha);
        miss_mass += atom.mass * (1.0 - p);
        sel_mass += atom.mass;
    }
    return {power, constraint, sel_mass > 0.0 ? miss_mass / sel_mass : 0.0};
}

double selection_mass(const AtomicModel& model, const InformativeFamily& family, double alpha,
                      double mu) {
    double mass = 0.0;
    for (const auto& atom : model.atoms) {
        if (policy_at(atom.prob_row, family, alpha, mu, PolicyMode::Practical).selected)
            mass += atom.mass;
    }
    return mass;
}

}  // namespace

void validate_model(const AtomicModel& model, int class_count) {
    if (model.atoms.empty()) throw EmptyInput("atomic model has no atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < model.atoms.size(); ++i) {
        const Atom& atom = model.atoms[i];
        if (!(atom.mass > 0.0) || !std::isfinite(atom.mass))
            throw ProbabilityOutOfRange("atom " + std::to_string(i) + ": mass must be positive");
        total += atom.mass;
        if (static_cast<int>(atom.prob_row.size()) != class_count)
            throw DimensionMismatch("atom " + std::to_string(i) + ": wrong row length");
        validate_prob_row(atom.prob_row);
        double row_sum = 0.0;
        for (double p : atom.prob_row) row_sum += p;
        if (std::abs(row_sum - 1.0) > 1e-9)
            throw ProbabilityOutOfRange("atom " + std::to_string(i) +
                                        ": probabilities must sum to 1");
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ProbabilityOutOfRange("atom masses must sum to 1");
}

OracleFunctionals oracle_functionals(const AtomicModel& model, const InformativeFamily& family,
                                     double alpha, double mu) {
    if (mu < 0.0) throw NegativeMu("mu must be nonnegative");
    return functionals_at(model, family, alpha, mu);
}

OracleReport solve_mu_star(const AtomicModel& model, const InformativeFamily& family,
                           double alpha, std::size_t test_size) {
    const auto envs = atom_envelopes(model, family, alpha);

    // Degenerate regime: no atom's best candidate probability exceeds
    // 1 - alpha, so every selection eventually drops and constraint stays
    // nonnegative past the last event.
    bool any_persistent = false;
    for (const auto& env : envs) {
        if (!env.zero_crossing) {
            any_persistent = true;
            break;
        }
    }
    if (!any_persistent)
        throw DegenerateRegime("no atom keeps a positive envelope; use trivial_policy");

    for (double mu : event_grid(envs)) {
        const auto f = functionals_at(model, family, alpha, mu);
        if (f.constraint <= 0.0) {
            OracleReport report;
            report.mu_star = mu;
            report.power = f.power;
            report.constraint = f.constraint;
            report.mfcr = f.mfcr;
            const double sel = selection_mass(model, family, alpha, mu);
            report.fcr_factor = 1.0 - std::pow(1.0 - sel, static_cast<double>(test_size));
            return report;
        }
    }
    // Unreachable: past the last event only atoms with positive slope stay
    // selected and each contributes a negative constraint term.
    throw InvalidBracket("constraint never reached zero on the event grid");
}

RandomizedPolicy randomized_policy(const AtomicModel& model, const InformativeFamily& family,
                                   double alpha, double epsilon) {
    const auto report = solve_mu_star(model, family, alpha);
    const double mu_star = report.mu_star;
    if (mu_star <= 0.0)
        throw InvalidBracket("mu_star is 0; the deterministic policy is already exact");

    if (epsilon <= 0.0) {
        const auto events = event_grid(atom_envelopes(model, family, alpha));
        double prev = 0.0;
        double next = kInf;
        for (double e : events) {
            if (e < mu_star) prev = std::max(prev, e);
            if (e > mu_star) next = std::min(next, e);
        }
        epsilon = std::isfinite(next) ? 0.5 * std::min(mu_star - prev, next - mu_star)
                                      : 0.5 * (mu_star - prev);
    }
    if (epsilon <= 0.0 || epsilon >= mu_star)
        throw InvalidBracket("epsilon must lie in (0, mu_star)");

    const auto left = functionals_at(model, family, alpha, mu_star - epsilon);
    const auto right = functionals_at(model, family, alpha, mu_star + epsilon);
    if (!(left.constraint > 0.0 && right.constraint <= 0.0))
        throw InvalidBracket("constraint does not change sign across the bracket");

    RandomizedPolicy mix;
    mix.mu_left = mu_star - epsilon;
    mix.mu_right = mu_star + epsilon;
    mix.q = -right.constraint / (left.constraint - right.constraint);
    mix.power = mix.q * left.power + (1.0 - mix.q) * right.power;

    const double sel_left = selection_mass(model, family, alpha, mix.mu_left);
    const double sel_right = selection_mass(model, family, alpha, mix.mu_right);
    const double miss = mix.q * left.mfcr * sel_left + (1.0 - mix.q) * right.mfcr * sel_right;
    const double sel = mix.q * sel_left + (1.0 - mix.q) * sel_right;
    mix.mfcr = sel > 0.0 ? miss / sel : 0.0;
    return mix;
}

std::vector<TrivialDecision> trivial_policy(const AtomicModel& model,
                                            const InformativeFamily& family, double alpha) {
    std::vector<TrivialDecision> out;
    out.reserve(model.atoms.size());
    for (const auto& atom : model.atoms) {
        const auto candidates = reduce_candidates(atom.prob_row, family);
        const LabelSet* best = nullptr;
        double best_p = -1.0;
        for (const auto& set : candidates) {
            const double p = set_probability(atom.prob_row, set);
            if (p > best_p ||
                (p == best_p && (family.weight_of(set) > family.weight_of(*best) ||
                                 (family.weight_of(set) == family.weight_of(*best) &&
                                  set < *best)))) {
                best = &set;
                best_p = p;
            }
        }
        out.push_back({*best, best_p >= 1.0 - alpha});
    }
    return out;
}

std::pair<double, double> fcr_from_mfcr(const AtomicModel& model, const InformativeFamily& family,
                                        double alpha, double mu, std::size_t m) {
    if (m < 1) throw EmptyTest("test size must be at least 1");
    const auto f = oracle_functionals(model, family, alpha, mu);
    const double sel = selection_mass(model, family, alpha, mu);
    const double factor = 1.0 - std::pow(1.0 - sel, static_cast<double>(m));
    return {f.mfcr * factor, factor};
}

}  // namespace infosel
