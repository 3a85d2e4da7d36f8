#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "infosel/envelope.hpp"
#include "infosel/errors.hpp"
#include "infosel/policy.hpp"
#include "infosel/rng.hpp"

using namespace infosel;

namespace {

UpperEnvelope make_env(const std::vector<double>& row, const InformativeFamily& fam,
                       double alpha) {
    return upper_envelope(build_lines(row, fam, alpha, reduce_candidates(row, fam)));
}

const InformativeFamily kSize2 = InformativeFamily::build(FamilySpec::cardinality({}, 1, 2), 3);

}  // namespace

TEST_CASE("line construction identities") {
    const std::vector<double> row{0.5, 0.3, 0.2};
    const auto lines = build_lines(row, kSize2, 0.1, {LabelSet({1}), LabelSet({1, 2})});
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].intercept == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lines[0].slope == doctest::Approx(-0.4).epsilon(1e-12));
    CHECK(lines[1].intercept == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(lines[1].slope == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(lines[0].intercept == lines[0].weight * lines[0].prob);

    const auto point_mass =
        build_lines(std::vector<double>{1.0, 0.0, 0.0}, kSize2, 0.1, {LabelSet({1})});
    CHECK(point_mass[0].intercept == 1.0);
    CHECK(point_mass[0].slope == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("probability validation") {
    CHECK_THROWS_AS(
        build_lines(std::vector<double>{-0.1, 0.5, 0.6}, kSize2, 0.1, {LabelSet({1})}),
        ProbabilityOutOfRange);
    CHECK_THROWS_AS(
        build_lines(std::vector<double>{0.9, 0.9, 0.5}, kSize2, 0.1, {LabelSet({1})}),
        ProbabilityOutOfRange);
    CHECK_THROWS_AS(upper_envelope({}), EmptyInput);
}

TEST_CASE("two-segment envelope with zero crossing") {
    const auto env = make_env({0.5, 0.3, 0.2}, kSize2, 0.1);
    REQUIRE(env.segments.size() == 2);
    CHECK(env.segments[0].start_mu == 0.0);
    CHECK(env.segments[0].line.candidate == LabelSet({1}));
    CHECK(std::abs(env.segments[1].start_mu - 1.0 / 3.0) <= 1e-12);
    CHECK(env.segments[1].line.candidate == LabelSet({1, 2}));
    REQUIRE(env.zero_crossing.has_value());
    CHECK(std::abs(*env.zero_crossing - 4.0) <= 1e-12);
}

TEST_CASE("envelope without zero crossing") {
    const auto env = make_env({0.7, 0.25, 0.05}, kSize2, 0.1);
    REQUIRE(env.segments.size() == 2);
    CHECK(env.segments[0].line.candidate == LabelSet({1}));
    CHECK(std::abs(env.segments[1].start_mu - 0.9) <= 1e-12);
    CHECK(env.segments[1].line.candidate == LabelSet({1, 2}));
    CHECK_FALSE(env.zero_crossing.has_value());
}

TEST_CASE("single line envelope") {
    const auto fam = InformativeFamily::build(FamilySpec::cardinality({}, 1, 1), 2);
    const auto env = make_env({0.8, 0.2}, fam, 0.1);
    REQUIRE(env.segments.size() == 1);
    CHECK(env.segments[0].line.candidate == LabelSet({1}));
}

TEST_CASE("evaluate_at is right-continuous") {
    const auto env = make_env({0.5, 0.3, 0.2}, kSize2, 0.1);
    const auto at_bp = evaluate_at(env, 1.0 / 3.0);
    CHECK(at_bp.second == LabelSet({1, 2}));
    CHECK(at_bp.first == doctest::Approx(0.5 - 0.4 / 3.0).epsilon(1e-12));
    const auto at_zero = evaluate_at(env, 0.0);
    CHECK(at_zero.second == LabelSet({1}));
    CHECK(at_zero.first == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(evaluate_at(env, 4.0).first == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate_at(env, -1.0), NegativeMu);
}

TEST_CASE("zero crossing of an all-zero row is 0") {
    const auto env = make_env({0.0, 0.0, 0.0}, kSize2, 0.1);
    REQUIRE(env.zero_crossing.has_value());
    CHECK(*env.zero_crossing == 0.0);
}

TEST_CASE("horizontal line can terminate the envelope") {
    // Set probability exactly 1 - alpha: slope 0, positive value forever.
    const auto fam = InformativeFamily::build(FamilySpec::cardinality({}, 1, 1), 2);
    const auto env = make_env({0.9, 0.1}, fam, 0.1);
    CHECK(env.segments.back().line.slope == 0.0);
    CHECK_FALSE(env.zero_crossing.has_value());
}

TEST_CASE("random envelopes match the pointwise-max oracle") {
    Rng rng(20240601);
    int checks = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int K = 3 + static_cast<int>(rng.below(4));
        const auto fam = InformativeFamily::build(
            FamilySpec::cardinality({}, 1, 1 + static_cast<int>(rng.below(K))), K);
        std::vector<double> row(K);
        double sum = 0.0;
        for (double& v : row) sum += (v = rng.uniform());
        for (double& v : row) v /= sum;
        const double alpha = 0.02 + 0.3 * rng.uniform();
        const auto lines = build_lines(row, fam, alpha, reduce_candidates(row, fam));
        const auto env = upper_envelope(lines);

        CHECK(env.segments.size() <= lines.size());
        for (std::size_t s = 1; s < env.segments.size(); ++s) {
            CHECK(env.segments[s].start_mu > env.segments[s - 1].start_mu);
            CHECK(env.segments[s].line.slope >= env.segments[s - 1].line.slope);
            CHECK(env.segments[s].line.intercept <= env.segments[s - 1].line.intercept);
            // Adjacent lines agree at the breakpoint.
            const double bp = env.segments[s].start_mu;
            CHECK(std::abs(env.segments[s].line.value_at(bp) -
                           env.segments[s - 1].line.value_at(bp)) <= 1e-9);
        }
        // Last segment has the maximal slope (maximal intercept among ties).
        for (const auto& line : lines) {
            const auto& last = env.segments.back().line;
            CHECK(line.slope <= last.slope + 1e-15);
            if (line.slope == last.slope) CHECK(line.intercept <= last.intercept);
        }
        for (int probe = 0; probe < 25; ++probe) {
            const double mu = 100.0 * rng.uniform();
            double best = -1e300;
            for (const auto& line : lines) best = std::max(best, line.value_at(mu));
            const double got = evaluate_at(env, mu).first;
            CHECK(std::abs(got - best) <= 1e-9 * std::max(1.0, std::abs(best)));
            ++checks;
        }
        // Convexity probe.
        const double m1 = 50.0 * rng.uniform();
        const double m3 = m1 + 50.0 * rng.uniform() + 1e-6;
        const double t = rng.uniform();
        const double m2 = m1 + t * (m3 - m1);
        const double chord =
            evaluate_at(env, m1).first + t * (evaluate_at(env, m3).first - evaluate_at(env, m1).first);
        CHECK(evaluate_at(env, m2).first <= chord + 1e-9);
    }
    CHECK(checks == 10000);
}
