#include "infosel/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

int argmax_class(std::span<const double> row) {
    int best = 1;
    for (int k = 2; k <= static_cast<int>(row.size()); ++k) {
        if (row[k - 1] > row[best - 1]) best = k;
    }
    return best;
}

// Smallest candidate threshold with estimated FCP <= alpha, where the FCP
// numerator counts calibration values strictly above t and the denominator
// counts test values strictly above t. Candidates: 0 and the distinct
// calibration values (the numerator only drops there).
std::pair<double, bool> threshold_search(std::vector<double> cal_values,
                                         std::vector<double> test_values, double alpha,
                                         std::size_t n) {
    const std::size_t m = test_values.size();
    std::sort(cal_values.begin(), cal_values.end());
    std::sort(test_values.begin(), test_values.end());

    std::vector<double> candidates{0.0};
    for (double v : cal_values) {
        if (v > candidates.back()) candidates.push_back(v);
    }
    for (double t : candidates) {
        const auto above = [t](const std::vector<double>& sorted) {
            return sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        };
        const double num = (1.0 + static_cast<double>(above(cal_values))) /
                           (static_cast<double>(n) + 1.0);
        const double den =
            static_cast<double>(std::max<std::ptrdiff_t>(1, above(test_values))) /
            static_cast<double>(m);
        if (num / den <= alpha) return {t, true};
    }
    return {1.0, false};
}

}  // namespace

double conformal_pvalue(std::span<const double> cal_scores, double test_score) {
    std::size_t count = 0;
    for (double s : cal_scores) count += (s >= test_score);
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(cal_scores.size()) + 1.0);
}

std::vector<std::size_t> bh_select(std::span<const double> pvalues, double alpha) {
    const std::size_t m = pvalues.size();
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t k_hat = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        if (sorted[k - 1] <= static_cast<double>(k) * alpha / static_cast<double>(m)) k_hat = k;
    }
    std::vector<std::size_t> rejected;
    if (k_hat == 0) return rejected;
    const double cutoff = static_cast<double>(k_hat) * alpha / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (pvalues[i] <= cutoff) rejected.push_back(i);
    }
    return rejected;
}

AbstentionOutput classify_with_abstention(const std::vector<std::vector<double>>& cal_rows,
                                          const std::vector<int>& cal_labels,
                                          const std::vector<std::vector<double>>& test_rows,
                                          double alpha) {
    if (test_rows.empty()) throw EmptyTest("no test rows");
    if (cal_rows.size() != cal_labels.size())
        throw DimensionMismatch("calibration rows and labels differ in length");

    // Top probabilities of the miscovered calibration examples drive the
    // threshold; every test top probability drives the denominator.
    std::vector<double> cal_errors;
    for (std::size_t i = 0; i < cal_rows.size(); ++i) {
        const int pred = argmax_class(cal_rows[i]);
        if (pred != cal_labels[i]) cal_errors.push_back(cal_rows[i][pred - 1]);
    }
    std::vector<double> test_tops;
    test_tops.reserve(test_rows.size());
    for (const auto& row : test_rows) test_tops.push_back(row[argmax_class(row) - 1]);

    AbstentionOutput out;
    std::tie(out.t_alpha, out.feasible) =
        threshold_search(std::move(cal_errors), test_tops, alpha, cal_rows.size());
    if (!out.feasible) return out;
    for (std::size_t j = 0; j < test_rows.size(); ++j) {
        if (test_tops[j] > out.t_alpha) {
            out.reported.push_back(j);
            out.predicted.push_back(argmax_class(test_rows[j]));
        }
    }
    return out;
}

std::vector<std::size_t> detect_novelties(std::span<const double> cal_novelty_probs,
                                          std::span<const double> test_novelty_probs,
                                          double alpha) {
    if (test_novelty_probs.empty()) throw EmptyTest("no test rows");
    const auto [t_alpha, feasible] = threshold_search(
        {cal_novelty_probs.begin(), cal_novelty_probs.end()},
        {test_novelty_probs.begin(), test_novelty_probs.end()}, alpha,
        cal_novelty_probs.size());
    std::vector<std::size_t> novel;
    if (!feasible) return novel;
    for (std::size_t j = 0; j < test_novelty_probs.size(); ++j) {
        if (test_novelty_probs[j] > t_alpha) novel.push_back(j);
    }
    return novel;
}

LabelSet split_conformal_set(std::span<const double> cal_scores, std::span<const double> prob_row,
                             double alpha) {
    if (cal_scores.empty()) throw EmptyInput("no calibration scores");
    const std::size_t n = cal_scores.size();
    const auto rank = static_cast<std::ptrdiff_t>(
        std::ceil((1.0 - alpha) * (static_cast<double>(n) + 1.0)));

    double q_hat;
    if (rank > static_cast<std::ptrdiff_t>(n)) {
        q_hat = std::numeric_limits<double>::infinity();
    } else if (rank <= 0) {
        q_hat = -std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
        std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
        q_hat = sorted[rank - 1];
    }

    std::vector<int> members;
    for (int k = 1; k <= static_cast<int>(prob_row.size()); ++k) {
        if (1.0 - prob_row[k - 1] <= q_hat) members.push_back(k);
    }
    return LabelSet(std::move(members));
}

double adjusted_level(std::span<const double> prob_row, std::span<const double> cal_scores,
                      const InformativeFamily& family) {
    const std::size_t n = cal_scores.size();
    if (n == 0) throw EmptyInput("no calibration scores");
    for (std::size_t k = 1; k <= n + 1; ++k) {
        const double level = static_cast<double>(k) / (static_cast<double>(n) + 1.0);
        if (family.contains(split_conformal_set(cal_scores, prob_row, level))) return level;
    }
    return kNeverInformative;
}

namespace {

std::vector<double> true_label_scores(const std::vector<std::vector<double>>& cal_rows,
                                      const std::vector<int>& cal_labels) {
    if (cal_rows.size() != cal_labels.size())
        throw DimensionMismatch("calibration rows and labels differ in length");
    if (cal_rows.empty()) throw EmptyInput("no calibration rows");
    std::vector<double> scores;
    scores.reserve(cal_rows.size());
    for (std::size_t i = 0; i < cal_rows.size(); ++i) {
        const int y = cal_labels[i];
        if (y < 1 || y > static_cast<int>(cal_rows[i].size()))
            throw ParseError("calibration label out of range at row " + std::to_string(i));
        scores.push_back(1.0 - cal_rows[i][y - 1]);
    }
    return scores;
}

}  // namespace

BaselineOutcome run_info_sp(const std::vector<std::vector<double>>& cal_rows,
                            const std::vector<int>& cal_labels,
                            const std::vector<std::vector<double>>& test_rows,
                            const InformativeFamily& family, double alpha) {
    if (test_rows.empty()) throw EmptyTest("no test rows");
    const auto scores = true_label_scores(cal_rows, cal_labels);
    const std::size_t n = scores.size();
    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());

    // Same grid and rank arithmetic as adjusted_level / split_conformal_set,
    // but against a single presorted score array instead of one selection
    // pass per grid level.
    auto level_for = [&](const std::vector<double>& row) {
        for (std::size_t k = 1; k <= n + 1; ++k) {
            const double level = static_cast<double>(k) / (static_cast<double>(n) + 1.0);
            const auto rank = static_cast<std::ptrdiff_t>(
                std::ceil((1.0 - level) * (static_cast<double>(n) + 1.0)));
            double q_hat;
            if (rank > static_cast<std::ptrdiff_t>(n)) {
                q_hat = std::numeric_limits<double>::infinity();
            } else if (rank <= 0) {
                q_hat = -std::numeric_limits<double>::infinity();
            } else {
                q_hat = sorted[rank - 1];
            }
            std::vector<int> members;
            for (int y = 1; y <= static_cast<int>(row.size()); ++y) {
                if (1.0 - row[y - 1] <= q_hat) members.push_back(y);
            }
            if (family.contains(LabelSet(std::move(members)))) return level;
        }
        return kNeverInformative;
    };

    std::vector<double> levels;
    levels.reserve(test_rows.size());
    for (const auto& row : test_rows) levels.push_back(level_for(row));

    BaselineOutcome out;
    out.selected = bh_select(levels, alpha);
    if (out.selected.empty()) return out;
    const double reduced = alpha * static_cast<double>(out.selected.size()) /
                           static_cast<double>(test_rows.size());
    for (std::size_t j : out.selected) {
        out.sets.push_back(split_conformal_set(scores, test_rows[j], reduced));
    }
    return out;
}

BaselineOutcome run_classic_baseline(const std::vector<std::vector<double>>& cal_rows,
                                     const std::vector<int>& cal_labels,
                                     const std::vector<std::vector<double>>& test_rows,
                                     const InformativeFamily& family, double alpha) {
    if (test_rows.empty()) throw EmptyTest("no test rows");
    const auto scores = true_label_scores(cal_rows, cal_labels);

    BaselineOutcome out;
    for (std::size_t j = 0; j < test_rows.size(); ++j) {
        LabelSet set = split_conformal_set(scores, test_rows[j], alpha);
        if (family.contains(set)) {
            out.selected.push_back(j);
            out.sets.push_back(std::move(set));
        }
    }
    return out;
}

}  // namespace infosel
