#include <doctest.h>

#include <cmath>
#include <numeric>

#include "infosel/errors.hpp"
#include "infosel/rng.hpp"
#include "infosel/shift.hpp"

using namespace infosel;

namespace {

// Rows from a two-class model where predicted probabilities are already
// calibrated: zero shift is stationary.
const std::vector<std::vector<double>> kBalancedRows{{0.7, 0.3}, {0.3, 0.7}};
const std::vector<int> kBalancedLabels{1, 2};

std::vector<double> simplex_row(Rng& rng, int K) {
    std::vector<double> row(K);
    double sum = 0.0;
    for (double& v : row) sum += (v = rng.uniform() + 1e-3);
    for (double& v : row) v /= sum;
    return row;
}

}  // namespace

TEST_CASE("stationary at zero shift") {
    const auto fit = fit_vector_scaling(kBalancedRows, kBalancedLabels);
    CHECK(fit.converged);
    for (double v : fit.b) CHECK(std::abs(v) <= 1e-7);
}

TEST_CASE("recovers a known prior shift") {
    Rng rng(1601);
    const int K = 4;
    const std::array<double, 4> target{0.1, 0.7, 0.1, 0.1};
    const std::size_t n = 2000;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        // Model probabilities computed under a uniform prior; labels drawn
        // from the reweighted (shifted) posterior.
        const auto base = simplex_row(rng, K);
        std::vector<double> shifted(K);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += (shifted[k] = base[k] * target[k] / 0.25);
        for (double& v : shifted) v /= sum;
        const double u = rng.uniform();
        double acc = 0.0;
        int y = K;
        for (int k = 1; k <= K; ++k) {
            acc += shifted[k - 1];
            if (u < acc) {
                y = k;
                break;
            }
        }
        rows.push_back(base);
        labels.push_back(y);
    }
    const auto fit = fit_vector_scaling(rows, labels);
    CHECK(fit.converged);
    CHECK(std::abs(std::accumulate(fit.b.begin(), fit.b.end(), 0.0)) <= 1e-10);
    for (int k = 0; k < K; ++k) {
        const double expected = std::log(target[k] / 0.25);
        const double centered = expected - (std::log(0.1 / 0.25) + std::log(0.7 / 0.25) +
                                            2 * std::log(0.1 / 0.25)) / 4.0;
        CHECK(std::abs(fit.b[k] - centered) <= 0.1);
    }
}

TEST_CASE("single-class labels saturate the box") {
    // The likelihood is unbounded: the solver runs up the coefficient box and
    // must not report convergence once it is pinned there.
    std::vector<std::vector<double>> rows(10, {0.5, 0.5});
    std::vector<int> labels(10, 1);
    ShiftFitOptions options;
    options.gradient_tolerance = 1e-15;
    const auto fit = fit_vector_scaling(rows, labels, options);
    CHECK_FALSE(fit.converged);
    CHECK(fit.b[0] > 0.0);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(fit_vector_scaling({}, {}), EmptyInput);
    CHECK_THROWS_AS(fit_vector_scaling({{0.5, 0.5}}, {1, 2}), DimensionMismatch);
    CHECK_THROWS_AS(fit_vector_scaling({{0.5, 0.5}, {0.5, 0.5}}, {1, 3}), ParseError);
    ShiftFitOptions logits;
    logits.rows_are_logits = true;
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_vector_scaling({{inf, 0.0}, {0.0, 0.0}}, {1, 2}, logits), NonFinite);
}

TEST_CASE("applying coefficients") {
    ShiftCoefficients coeffs;
    coeffs.b = {std::log(0.1 / 0.25), std::log(0.7 / 0.25), std::log(0.1 / 0.25),
                std::log(0.1 / 0.25)};
    const auto out = apply_vector_scaling(std::vector<double>{0.25, 0.25, 0.25, 0.25}, coeffs);
    CHECK(out[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.7).epsilon(1e-12));

    ShiftCoefficients zero;
    zero.b = {0.0, 0.0, 0.0};
    const std::vector<double> row{0.5, 0.3, 0.2};
    CHECK(apply_vector_scaling(row, zero) == row);

    ShiftCoefficients two;
    two.b = {1.0, -1.0};
    const auto point = apply_vector_scaling(std::vector<double>{1.0, 0.0}, two);
    CHECK(point[0] == 1.0);
    CHECK(point[1] == 0.0);
    CHECK_THROWS_AS(apply_vector_scaling(row, two), DimensionMismatch);
}

TEST_CASE("scaled rows stay on the simplex") {
    Rng rng(1701);
    for (int trial = 0; trial < 200; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(6));
        ShiftCoefficients coeffs;
        coeffs.b.resize(K);
        double mean = 0.0;
        for (double& v : coeffs.b) mean += (v = 4.0 * rng.uniform() - 2.0);
        for (double& v : coeffs.b) v -= mean / K;
        const auto out = apply_vector_scaling(simplex_row(rng, K), coeffs);
        double sum = 0.0;
        for (double v : out) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient matches finite differences") {
    Rng rng(1801);
    for (int trial = 0; trial < 40; ++trial) {
        const int K = 3 + static_cast<int>(rng.below(3));
        const std::size_t n = 20 + rng.below(30);
        std::vector<std::vector<double>> logits;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> z(K);
            for (double& v : z) v = 4.0 * rng.uniform() - 2.0;
            logits.push_back(std::move(z));
            labels.push_back(1 + static_cast<int>(rng.below(K)));
        }
        std::vector<double> b(K);
        double mean = 0.0;
        for (double& v : b) mean += (v = 2.0 * rng.uniform() - 1.0);
        for (double& v : b) v -= mean / K;

        const auto grad = shift_gradient(logits, labels, b);
        const double h = 1e-6;
        for (int k = 0; k < K; ++k) {
            // Central difference along the projected coordinate direction
            // e_k - 1/K (stays on the zero-sum hyperplane).
            auto plus = b, minus = b;
            for (int j = 0; j < K; ++j) {
                const double d = (j == k ? 1.0 : 0.0) - 1.0 / K;
                plus[j] += h * d;
                minus[j] -= h * d;
            }
            const double fd =
                (shift_nll(logits, labels, plus) - shift_nll(logits, labels, minus)) / (2 * h);
            // fd approximates <grad, e_k - 1/K> = grad_k for projected grad.
            const double scale = std::max(1.0, std::abs(grad[k]));
            CHECK(std::abs(fd - grad[k]) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("seeded splits") {
    const auto [fit1, rest1] = split_for_shift(500, 0.2, 42);
    CHECK(fit1.size() == 100);
    CHECK(rest1.size() == 400);
    const auto [fit2, rest2] = split_for_shift(500, 0.2, 42);
    CHECK(fit1 == fit2);
    CHECK(rest1 == rest2);
    const auto [fit3, rest3] = split_for_shift(10, 0.5, 7);
    CHECK(fit3.size() == 5);
    CHECK(rest3.size() == 5);
    // A partition: every index exactly once.
    std::vector<std::size_t> all(fit3);
    all.insert(all.end(), rest3.begin(), rest3.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

    CHECK_THROWS_AS(split_for_shift(5, 0.1, 1), TooFew);
    CHECK_THROWS_AS(split_for_shift(10, 1.5, 1), ParseError);
}
