#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "infosel/errors.hpp"
#include "infosel/policy.hpp"
#include "infosel/rng.hpp"
#include "infosel/selector.hpp"

using namespace infosel;

namespace {

const InformativeFamily kSize2 = InformativeFamily::build(FamilySpec::cardinality({}, 1, 2), 3);

std::vector<double> random_row(Rng& rng, int K) {
    std::vector<double> row(K);
    double sum = 0.0;
    for (double& v : row) sum += (v = rng.uniform());
    for (double& v : row) v /= sum;
    return row;
}

struct Instance {
    std::vector<std::vector<double>> cal_rows;
    std::vector<int> cal_labels;
    std::vector<std::vector<double>> test_rows;
    InformativeFamily family;
    double alpha;
};

Instance random_instance(Rng& rng, int K, std::size_t n, std::size_t m, double alpha) {
    Instance inst{{}, {}, {}, InformativeFamily::build(
        FamilySpec::cardinality({}, 1, 1 + static_cast<int>(rng.below(K - 1))), K), alpha};
    for (std::size_t i = 0; i < n; ++i) {
        inst.cal_rows.push_back(random_row(rng, K));
        inst.cal_labels.push_back(1 + static_cast<int>(rng.below(K)));
    }
    for (std::size_t j = 0; j < m; ++j) inst.test_rows.push_back(random_row(rng, K));
    return inst;
}

bool outcomes_equal(const SelectionOutcome& a, const SelectionOutcome& b) {
    return a.mu_alpha == b.mu_alpha && a.selected == b.selected && a.sets == b.sets;
}

}  // namespace

TEST_CASE("fcp estimate examples") {
    {
        std::vector<double> tilde(9, 0.0);
        std::vector<double> hat(5, kInf);
        CHECK(fcp_hat(0.0, tilde, hat, 9, 5) == doctest::Approx(0.1).epsilon(1e-15));
    }
    {
        std::vector<double> tilde(9, 0.0);
        std::vector<double> hat(5, 0.0);
        CHECK(fcp_hat(0.0, tilde, hat, 9, 5) == doctest::Approx(0.5).epsilon(1e-15));
    }
    {
        std::vector<double> tilde{0.0, 0.0, 0.0, 3.0};
        std::vector<double> hat{kInf, 1.0};
        CHECK(fcp_hat(2.0, tilde, hat, 4, 2) == doctest::Approx(0.8).epsilon(1e-15));
    }
}

TEST_CASE("immediate acceptance at mu = 0") {
    const std::vector<std::vector<double>> cal{{0.9, 0.05, 0.05}, {0.8, 0.1, 0.1},
                                               {0.85, 0.1, 0.05}};
    const std::vector<int> labels{1, 1, 1};
    const std::vector<std::vector<double>> test{{0.95, 0.03, 0.02}, {0.9, 0.06, 0.04}};
    for (const auto method : {SelectionMethod::AllIntersections,
                              SelectionMethod::EnvelopeTraversal,
                              SelectionMethod::ThresholdForm}) {
        const auto out = run_og_infosp(cal, labels, test, kSize2, 0.5, method);
        CHECK(out.mu_alpha == 0.0);
        CHECK(out.selected == std::vector<std::size_t>{0, 1});
        CHECK(out.fcp_hat_at_solution == doctest::Approx(0.25).epsilon(1e-15));
        REQUIRE(out.sets.size() == 2);
        CHECK(out.sets[0] == LabelSet({1}));
    }
}

TEST_CASE("selector refuses non-nested instances") {
    const std::vector<LabelSet> sets{LabelSet({1}), LabelSet({2}), LabelSet({3}),
                                     LabelSet({2, 3})};
    const auto efam = InformativeFamily::build(FamilySpec::explicit_sets(sets), 3);
    const std::vector<std::vector<double>> rows{{0.4, 0.35, 0.25}};
    CHECK_THROWS_AS(run_og_infosp(rows, {1}, rows, efam, 0.1), NestednessViolated);
    CHECK_THROWS_AS(run_og_infosp({}, {}, {}, kSize2, 0.1), EmptyTest);
}

TEST_CASE("methods agree bit-for-bit on random instances") {
    Rng rng(555);
    for (int trial = 0; trial < 60; ++trial) {
        const int K = 3 + static_cast<int>(rng.below(4));
        const auto inst = random_instance(rng, K, 20 + rng.below(30), 10 + rng.below(20),
                                          0.05 + 0.15 * rng.uniform());
        const auto a = run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows, inst.family,
                                     inst.alpha, SelectionMethod::AllIntersections);
        const auto b = run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows, inst.family,
                                     inst.alpha, SelectionMethod::EnvelopeTraversal);
        const auto c = run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows, inst.family,
                                     inst.alpha, SelectionMethod::ThresholdForm);
        CHECK(outcomes_equal(a, b));
        CHECK(outcomes_equal(a, c));
    }
}

TEST_CASE("mu_alpha matches a fine grid scan") {
    Rng rng(808);
    for (int trial = 0; trial < 15; ++trial) {
        const auto inst = random_instance(rng, 4, 40, 20, 0.1);
        const auto out = run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows,
                                       inst.family, inst.alpha);
        const auto stats = key_statistics(inst.cal_rows, inst.cal_labels, inst.test_rows,
                                          inst.family, inst.alpha);
        const double hi = 30.0;
        const int points = 100000;
        double grid_first = kInf;
        for (int g = 0; g < points; ++g) {
            const double mu = hi * g / points;
            if (fcp_hat(mu, stats.tilde_mu, stats.hat_mu, inst.cal_rows.size(),
                        inst.test_rows.size()) <= inst.alpha) {
                grid_first = mu;
                break;
            }
        }
        if (std::isinf(out.mu_alpha)) {
            CHECK(std::isinf(grid_first));
        } else {
            CHECK(out.mu_alpha <= grid_first + 1e-12);
            CHECK(grid_first - out.mu_alpha <= hi / points + 1e-12);
            CHECK(fcp_hat(out.mu_alpha, stats.tilde_mu, stats.hat_mu, inst.cal_rows.size(),
                          inst.test_rows.size()) <= inst.alpha);
        }
    }
}

TEST_CASE("selected follows the hat statistics at the solution") {
    Rng rng(909);
    const auto inst = random_instance(rng, 4, 50, 30, 0.15);
    const auto out =
        run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows, inst.family, inst.alpha);
    const auto stats = key_statistics(inst.cal_rows, inst.cal_labels, inst.test_rows,
                                      inst.family, inst.alpha);
    if (!std::isinf(out.mu_alpha)) {
        std::vector<std::size_t> expected;
        for (std::size_t j = 0; j < stats.hat_mu.size(); ++j) {
            if (stats.hat_mu[j] > out.mu_alpha) expected.push_back(j);
        }
        CHECK(out.selected == expected);
        for (std::size_t idx = 0; idx < out.selected.size(); ++idx) {
            const auto decision = policy_at(inst.test_rows[out.selected[idx]], inst.family,
                                            inst.alpha, out.mu_alpha, PolicyMode::Practical);
            CHECK(decision.set == out.sets[idx]);
        }
    }
}

TEST_CASE("calibration-only rule basics") {
    // 19 rows, label always the argmax: everything covered and selected at 0.
    std::vector<std::vector<double>> cal(19, {0.6, 0.3, 0.1});
    std::vector<int> labels(19, 1);
    const auto rule = fit_cal_only(cal, labels, kSize2, 0.1);
    CHECK(rule.mu_alpha == 0.0);
    const auto set = apply_cal_only(rule, std::vector<double>{0.5, 0.3, 0.2});
    REQUIRE(set.has_value());
    CHECK(*set == LabelSet({1}));

    CalOnlyRule never{kInf, kSize2, 0.1};
    CHECK_FALSE(apply_cal_only(never, std::vector<double>{0.5, 0.3, 0.2}).has_value());

    CalOnlyRule late{5.0, kSize2, 0.1};
    // Zero crossing at 4 < 5: not selected.
    CHECK_FALSE(apply_cal_only(late, std::vector<double>{0.5, 0.3, 0.2}).has_value());
    CHECK_THROWS_AS(apply_cal_only(late, std::vector<double>{0.5, 0.5}), DimensionMismatch);
}

TEST_CASE("calibration-only rule matches a grid scan") {
    Rng rng(6001);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = random_instance(rng, 4, 60, 1, 0.2);
        const auto rule = fit_cal_only(inst.cal_rows, inst.cal_labels, inst.family, inst.alpha);
        std::vector<double> tilde, hat;
        for (std::size_t i = 0; i < inst.cal_rows.size(); ++i) {
            const auto stats = key_statistics({inst.cal_rows[i]}, {inst.cal_labels[i]},
                                              {inst.cal_rows[i]}, inst.family, inst.alpha);
            tilde.push_back(stats.tilde_mu[0]);
            hat.push_back(stats.hat_mu[0]);
        }
        auto fcp_cal = [&](double mu) {
            std::size_t num = 0, den = 0;
            for (double v : tilde) num += (v > mu);
            for (double v : hat) den += (v > mu);
            return (1.0 + num) / (1.0 + den);
        };
        double grid_first = kInf;
        for (int g = 0; g < 100000; ++g) {
            const double mu = 30.0 * g / 100000;
            if (fcp_cal(mu) <= inst.alpha) {
                grid_first = mu;
                break;
            }
        }
        if (std::isinf(rule.mu_alpha)) {
            CHECK(std::isinf(grid_first));
        } else {
            CHECK(rule.mu_alpha <= grid_first + 1e-12);
            CHECK(grid_first - rule.mu_alpha <= 30.0 / 100000 + 1e-12);
            CHECK(fcp_cal(rule.mu_alpha) <= inst.alpha);
        }
    }
}

TEST_CASE("mu_alpha is minimal among candidates") {
    Rng rng(2718);
    const auto inst = random_instance(rng, 5, 80, 40, 0.1);
    const auto out =
        run_og_infosp(inst.cal_rows, inst.cal_labels, inst.test_rows, inst.family, inst.alpha);
    const auto stats = key_statistics(inst.cal_rows, inst.cal_labels, inst.test_rows,
                                      inst.family, inst.alpha);
    if (!std::isinf(out.mu_alpha)) {
        std::vector<double> candidates{0.0};
        for (double v : stats.tilde_mu) {
            if (std::isfinite(v)) candidates.push_back(v);
        }
        std::sort(candidates.begin(), candidates.end());
        const bool is_candidate =
            std::find(candidates.begin(), candidates.end(), out.mu_alpha) != candidates.end();
        CHECK(is_candidate);
        for (double mu : candidates) {
            if (mu < out.mu_alpha) {
                CHECK(fcp_hat(mu, stats.tilde_mu, stats.hat_mu, inst.cal_rows.size(),
                              inst.test_rows.size()) > inst.alpha);
            }
        }
    }
}
