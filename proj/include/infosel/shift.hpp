#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace infosel {

/// Per-class logit offsets fitted under the zero-sum constraint.
struct ShiftCoefficients {
    std::vector<double> b;  // sums to 0 within 1e-10
    bool converged = false;
    double final_gradient_norm = 0.0;
    int iterations = 0;
};

struct ShiftFitOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 10000;
    bool rows_are_logits = false;  // otherwise rows are probabilities
};

/// Maximum-likelihood fit of the per-class offsets b (sum b_k = 0) that best
/// recalibrate the rows to the observed labels. Convex; optimized over K-1
/// free coordinates with the last determined by the constraint. A run that
/// hits the iteration cap or the [-15, 15] box returns converged = false
/// with the best iterate.
ShiftCoefficients fit_vector_scaling(const std::vector<std::vector<double>>& rows,
                                     const std::vector<int>& labels,
                                     const ShiftFitOptions& options = {});

/// Reweights a probability row by e^{b_k} and renormalizes. Zero entries stay
/// zero; b = 0 is the identity.
std::vector<double> apply_vector_scaling(std::span<const double> prob_row,
                                         const ShiftCoefficients& coeffs);

/// Negative log-likelihood and its gradient (projected to the zero-sum
/// hyperplane) at b; exposed for optimizer checks.
double shift_nll(const std::vector<std::vector<double>>& logit_rows,
                 const std::vector<int>& labels, std::span<const double> b);
std::vector<double> shift_gradient(const std::vector<std::vector<double>>& logit_rows,
                                   const std::vector<int>& labels, std::span<const double> b);

/// Deterministic seeded split into (floor(fraction * n), rest) index sets.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_for_shift(
    std::size_t n, double fraction, std::uint64_t seed);

}  // namespace infosel
