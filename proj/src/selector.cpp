#include "infosel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

std::size_t count_above(const std::vector<double>& sorted, double mu) {
    return sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), mu);
}

struct RowLines {
    std::vector<Line> lines;
};

std::vector<RowLines> all_row_lines(const std::vector<std::vector<double>>& rows,
                                    const InformativeFamily& family, double alpha) {
    std::vector<RowLines> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back({build_lines(row, family, alpha, reduce_candidates(row, family))});
    }
    return out;
}

SelectionOutcome finalize(double mu_alpha, double fcp,
                          const std::vector<std::vector<double>>& test_rows,
                          const std::vector<double>& hat_mu, const InformativeFamily& family,
                          double alpha) {
    SelectionOutcome outcome;
    outcome.mu_alpha = mu_alpha;
    outcome.fcp_hat_at_solution = fcp;
    if (std::isinf(mu_alpha)) return outcome;
    for (std::size_t j = 0; j < test_rows.size(); ++j) {
        if (hat_mu[j] > mu_alpha) {
            const auto env = upper_envelope(
                build_lines(test_rows[j], family, alpha, reduce_candidates(test_rows[j], family)));
            outcome.selected.push_back(j);
            outcome.sets.push_back(evaluate_at(env, mu_alpha).second);
        }
    }
    return outcome;
}

SelectionOutcome run_threshold_form(const std::vector<std::vector<double>>& cal_rows,
                                    const std::vector<int>& cal_labels,
                                    const std::vector<std::vector<double>>& test_rows,
                                    const InformativeFamily& family, double alpha) {
    const auto stats = key_statistics(cal_rows, cal_labels, test_rows, family, alpha);
    const std::size_t n = cal_rows.size();
    const std::size_t m = test_rows.size();

    std::vector<double> sorted_tilde = stats.tilde_mu;
    std::sort(sorted_tilde.begin(), sorted_tilde.end());
    std::vector<double> sorted_hat = stats.hat_mu;
    std::sort(sorted_hat.begin(), sorted_hat.end());

    std::vector<double> candidates{0.0};
    for (double v : sorted_tilde) {
        if (std::isfinite(v) && v != candidates.back()) candidates.push_back(v);
    }

    for (double mu : candidates) {
        const double fcp = fcp_hat_counts(count_above(sorted_tilde, mu),
                                          count_above(sorted_hat, mu), n, m);
        if (fcp <= alpha) return finalize(mu, fcp, test_rows, stats.hat_mu, family, alpha);
    }
    return finalize(kInf, fcp_hat_counts(count_above(sorted_tilde, kInf), 0, n, m), test_rows,
                    stats.hat_mu, family, alpha);
}

SelectionOutcome run_all_intersections(const std::vector<std::vector<double>>& cal_rows,
                                       const std::vector<int>& cal_labels,
                                       const std::vector<std::vector<double>>& test_rows,
                                       const InformativeFamily& family, double alpha) {
    const std::size_t n = cal_rows.size();
    const std::size_t m = test_rows.size();
    const auto cal_lines = all_row_lines(cal_rows, family, alpha);
    const auto stats = key_statistics(cal_rows, cal_labels, test_rows, family, alpha);

    // Candidate mu values: zero crossings and pairwise intersections of the
    // calibration lines, plus 0 (an immediate acceptance would otherwise be
    // missed).
    std::vector<double> candidates{0.0};
    for (const auto& row : cal_lines) {
        for (const auto& line : row.lines) {
            if (line.slope < 0.0) {
                const double z = line_zero_mu(line);
                if (z > 0.0) candidates.push_back(z);
            }
        }
        for (std::size_t a = 0; a < row.lines.size(); ++a) {
            for (std::size_t b = a + 1; b < row.lines.size(); ++b) {
                const Line& la = row.lines[a];
                const Line& lb = row.lines[b];
                if (la.slope == lb.slope) continue;
                const Line& lo = la.slope < lb.slope ? la : lb;
                const Line& hi = la.slope < lb.slope ? lb : la;
                const double x = line_intersect_mu(lo, hi);
                if (x > 0.0) candidates.push_back(x);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Evaluate the estimate at each candidate by direct strict comparison
    // against the per-row event statistics (no sorting, no early exit on the
    // counts themselves).
    double last_fcp = 1.0;
    for (double mu : candidates) {
        std::size_t num = 0;
        for (double v : stats.tilde_mu) num += v > mu ? 1 : 0;
        std::size_t den = 0;
        for (double v : stats.hat_mu) den += v > mu ? 1 : 0;
        const double fcp = fcp_hat_counts(num, den, n, m);
        last_fcp = fcp;
        if (fcp <= alpha) return finalize(mu, fcp, test_rows, stats.hat_mu, family, alpha);
    }
    SelectionOutcome outcome;
    outcome.fcp_hat_at_solution = last_fcp;
    return outcome;
}

struct SweepEvent {
    double mu;
    std::size_t row;       // index into [0, n+m)
    bool is_zero_crossing;  // otherwise a breakpoint (segment start)
};

struct EventOrder {
    bool operator()(const SweepEvent& a, const SweepEvent& b) const { return a.mu > b.mu; }
};

SelectionOutcome run_envelope_traversal(const std::vector<std::vector<double>>& cal_rows,
                                        const std::vector<int>& cal_labels,
                                        const std::vector<std::vector<double>>& test_rows,
                                        const InformativeFamily& family, double alpha) {
    const std::size_t n = cal_rows.size();
    const std::size_t m = test_rows.size();

    std::vector<UpperEnvelope> envs;
    envs.reserve(n + m);
    for (const auto& row : cal_rows)
        envs.push_back(upper_envelope(build_lines(row, family, alpha, reduce_candidates(row, family))));
    for (const auto& row : test_rows)
        envs.push_back(upper_envelope(build_lines(row, family, alpha, reduce_candidates(row, family))));

    // Per-row sweep state at the current mu (right-continuous).
    std::vector<std::size_t> seg(n + m, 0);
    std::vector<char> selected(n + m);
    std::vector<char> covered(n, 0);

    std::priority_queue<SweepEvent, std::vector<SweepEvent>, EventOrder> queue;
    std::size_t num = 0;  // calibration rows miscovered and selected
    std::size_t den = 0;  // test rows selected

    for (std::size_t r = 0; r < n + m; ++r) {
        const double zc = envs[r].zero_crossing ? *envs[r].zero_crossing : kInf;
        selected[r] = zc > 0.0;
        if (envs[r].segments.size() > 1)
            queue.push({envs[r].segments[1].start_mu, r, false});
        if (std::isfinite(zc) && zc > 0.0) queue.push({zc, r, true});
        if (r < n) {
            covered[r] = envs[r].segments[0].line.candidate.contains(cal_labels[r]);
            if (selected[r] && !covered[r]) ++num;
        } else if (selected[r]) {
            ++den;
        }
    }

    auto current_sets = [&](double mu_alpha, double fcp) {
        SelectionOutcome outcome;
        outcome.mu_alpha = mu_alpha;
        outcome.fcp_hat_at_solution = fcp;
        for (std::size_t j = 0; j < m; ++j) {
            if (selected[n + j]) {
                outcome.selected.push_back(j);
                outcome.sets.push_back(evaluate_at(envs[n + j], mu_alpha).second);
            }
        }
        return outcome;
    };

    {
        const double fcp = fcp_hat_counts(num, den, n, m);
        if (fcp <= alpha) return current_sets(0.0, fcp);
    }

    while (!queue.empty()) {
        const double mu = queue.top().mu;
        // Drain every event sharing this exact mu before re-checking, so the
        // counters describe the right-continuous state at mu.
        while (!queue.empty() && queue.top().mu == mu) {
            const SweepEvent ev = queue.top();
            queue.pop();
            const std::size_t r = ev.row;
            const bool was_counted = (r < n) ? (selected[r] && !covered[r]) : selected[r];
            if (ev.is_zero_crossing) {
                selected[r] = 0;
            } else {
                ++seg[r];
                if (seg[r] + 1 < envs[r].segments.size())
                    queue.push({envs[r].segments[seg[r] + 1].start_mu, r, false});
                if (r < n)
                    covered[r] = envs[r].segments[seg[r]].line.candidate.contains(cal_labels[r]);
            }
            const bool now_counted = (r < n) ? (selected[r] && !covered[r]) : selected[r];
            if (r < n) {
                num += static_cast<std::size_t>(now_counted) - static_cast<std::size_t>(was_counted);
            } else {
                den += static_cast<std::size_t>(now_counted) - static_cast<std::size_t>(was_counted);
            }
        }
        const double fcp = fcp_hat_counts(num, den, n, m);
        if (fcp <= alpha) return current_sets(mu, fcp);
    }

    SelectionOutcome outcome;
    outcome.fcp_hat_at_solution = fcp_hat_counts(num, den, n, m);
    return outcome;
}

}  // namespace

double fcp_hat_counts(std::size_t miscovered_selected, std::size_t selected, std::size_t n,
                      std::size_t m) {
    const double numerator = (1.0 + static_cast<double>(miscovered_selected)) /
                             (static_cast<double>(n) + 1.0);
    const double denominator =
        static_cast<double>(std::max<std::size_t>(1, selected)) / static_cast<double>(m);
    return numerator / denominator;
}

double fcp_hat(double mu, std::span<const double> cal_stats, std::span<const double> test_stats,
               std::size_t n, std::size_t m) {
    std::size_t num = 0;
    for (double v : cal_stats) num += (v > mu);
    std::size_t den = 0;
    for (double v : test_stats) den += (v > mu);
    return fcp_hat_counts(num, den, n, m);
}

void require_nestedness(const std::vector<std::vector<double>>& cal_rows,
                        const std::vector<std::vector<double>>& test_rows,
                        const InformativeFamily& family, double alpha) {
    if (family.nestedness_certificate().guaranteed) return;
    auto check = [&](const std::vector<std::vector<double>>& rows, const char* kind) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto result = verify_nestedness(rows[i], family, alpha);
            if (!result.ok) {
                throw NestednessViolated(
                    std::string(kind) + " row " + std::to_string(i) + ": " +
                    result.before.to_string() + " is not contained in " +
                    result.after.to_string() + " at mu=" + std::to_string(result.mu));
            }
        }
    };
    check(cal_rows, "calibration");
    check(test_rows, "test");
}

SelectionOutcome run_og_infosp(const std::vector<std::vector<double>>& cal_rows,
                               const std::vector<int>& cal_labels,
                               const std::vector<std::vector<double>>& test_rows,
                               const InformativeFamily& family, double alpha,
                               SelectionMethod method) {
    if (test_rows.empty()) throw EmptyTest("no test rows");
    if (cal_rows.size() != cal_labels.size())
        throw DimensionMismatch("calibration rows and labels differ in length");
    require_nestedness(cal_rows, test_rows, family, alpha);

    switch (method) {
        case SelectionMethod::AllIntersections:
            return run_all_intersections(cal_rows, cal_labels, test_rows, family, alpha);
        case SelectionMethod::EnvelopeTraversal:
            return run_envelope_traversal(cal_rows, cal_labels, test_rows, family, alpha);
        case SelectionMethod::ThresholdForm:
        default:
            return run_threshold_form(cal_rows, cal_labels, test_rows, family, alpha);
    }
}

CalOnlyRule fit_cal_only(const std::vector<std::vector<double>>& cal_rows,
                         const std::vector<int>& cal_labels,
                         const InformativeFamily& family, double alpha) {
    if (cal_rows.size() != cal_labels.size())
        throw DimensionMismatch("calibration rows and labels differ in length");
    require_nestedness(cal_rows, {}, family, alpha);

    std::vector<double> tilde;
    std::vector<double> hat;
    tilde.reserve(cal_rows.size());
    hat.reserve(cal_rows.size());
    for (std::size_t i = 0; i < cal_rows.size(); ++i) {
        const auto env = upper_envelope(
            build_lines(cal_rows[i], family, alpha, reduce_candidates(cal_rows[i], family)));
        tilde.push_back(coverage_statistic(env, cal_labels[i]));
        hat.push_back(selection_statistic(env));
    }
    std::vector<double> sorted_tilde = tilde;
    std::sort(sorted_tilde.begin(), sorted_tilde.end());
    std::vector<double> sorted_hat = hat;
    std::sort(sorted_hat.begin(), sorted_hat.end());

    std::vector<double> candidates{0.0};
    for (double v : sorted_tilde) {
        if (std::isfinite(v) && v != candidates.back()) candidates.push_back(v);
    }

    CalOnlyRule rule{kInf, family, alpha};
    for (double mu : candidates) {
        const double num = 1.0 + static_cast<double>(count_above(sorted_tilde, mu));
        const double den = 1.0 + static_cast<double>(count_above(sorted_hat, mu));
        if (num / den <= alpha) {
            rule.mu_alpha = mu;
            break;
        }
    }
    return rule;
}

std::optional<LabelSet> apply_cal_only(const CalOnlyRule& rule, std::span<const double> row) {
    if (static_cast<int>(row.size()) != rule.family.class_count())
        throw DimensionMismatch("row dimension does not match the rule's class count");
    if (std::isinf(rule.mu_alpha)) return std::nullopt;
    const auto decision = policy_at(row, rule.family, rule.alpha, rule.mu_alpha,
                                    PolicyMode::Practical);
    if (!decision.selected) return std::nullopt;
    return decision.set;
}

}  // namespace infosel
