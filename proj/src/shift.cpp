#include "infosel/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "infosel/errors.hpp"
#include "infosel/rng.hpp"

namespace infosel {

namespace {

constexpr double kLogClip = -30.0;
constexpr double kBoxBound = 15.0;

std::vector<std::vector<double>> to_logits(const std::vector<std::vector<double>>& rows,
                                           bool rows_are_logits) {
    std::vector<std::vector<double>> logits;
    logits.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<double> z(rows[i].size());
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            const double v = rows_are_logits
                                 ? rows[i][k]
                                 : std::max(std::log(std::max(rows[i][k], 0.0)), kLogClip);
            if (!std::isfinite(v))
                throw NonFinite("non-finite logit at row " + std::to_string(i));
            z[k] = v;
        }
        logits.push_back(std::move(z));
    }
    return logits;
}

// Row posterior softmax(z + b), numerically stable.
std::vector<double> row_softmax(const std::vector<double>& z, std::span<const double> b) {
    std::vector<double> p(z.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < z.size(); ++k) top = std::max(top, z[k] + b[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) sum += (p[k] = std::exp(z[k] + b[k] - top));
    for (double& v : p) v /= sum;
    return p;
}

// Solves the (K-1)x(K-1) system A x = rhs by Gaussian elimination with
// partial pivoting; A gets a small ridge beforehand to stay invertible on
// degenerate inputs.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> rhs) {
    const std::size_t d = rhs.size();
    for (std::size_t i = 0; i < d; ++i) A[i][i] += 1e-10;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        }
        std::swap(A[col], A[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < d; ++c) A[r][c] -= f * A[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(d);
    for (std::size_t ri = d; ri-- > 0;) {
        double acc = rhs[ri];
        for (std::size_t c = ri + 1; c < d; ++c) acc -= A[ri][c] * x[c];
        x[ri] = acc / A[ri][ri];
    }
    return x;
}

void clip_to_box(std::vector<double>& b) {
    for (double& v : b) v = std::clamp(v, -kBoxBound, kBoxBound);
}

}  // namespace

double shift_nll(const std::vector<std::vector<double>>& logit_rows,
                 const std::vector<int>& labels, std::span<const double> b) {
    double nll = 0.0;
    for (std::size_t i = 0; i < logit_rows.size(); ++i) {
        const auto& z = logit_rows[i];
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < z.size(); ++k) top = std::max(top, z[k] + b[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) sum += std::exp(z[k] + b[k] - top);
        nll += top + std::log(sum) - (z[labels[i] - 1] + b[labels[i] - 1]);
    }
    return nll;
}

std::vector<double> shift_gradient(const std::vector<std::vector<double>>& logit_rows,
                                   const std::vector<int>& labels, std::span<const double> b) {
    std::vector<double> g(b.size(), 0.0);
    for (std::size_t i = 0; i < logit_rows.size(); ++i) {
        const auto p = row_softmax(logit_rows[i], b);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += p[k];
        g[labels[i] - 1] -= 1.0;
    }
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    for (double& v : g) v -= mean;
    return g;
}

ShiftCoefficients fit_vector_scaling(const std::vector<std::vector<double>>& rows,
                                     const std::vector<int>& labels,
                                     const ShiftFitOptions& options) {
    if (rows.empty()) throw EmptyInput("no rows to fit");
    if (rows.size() != labels.size())
        throw DimensionMismatch("rows and labels differ in length");
    const std::size_t K = rows[0].size();
    if (K < 2) throw DimensionMismatch("need at least two classes");
    if (rows.size() < K) throw TooFew("need at least K rows to fit K coefficients");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != K) throw DimensionMismatch("ragged row " + std::to_string(i));
        if (labels[i] < 1 || labels[i] > static_cast<int>(K))
            throw ParseError("label out of range at row " + std::to_string(i));
    }
    const auto logits = to_logits(rows, options.rows_are_logits);

    std::vector<double> b(K, 0.0);
    double nll = shift_nll(logits, labels, b);
    ShiftCoefficients result;
    result.b = b;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const auto g = shift_gradient(logits, labels, b);
        double gnorm = 0.0;
        for (double v : g) gnorm += v * v;
        gnorm = std::sqrt(gnorm);
        result.b = b;
        result.final_gradient_norm = gnorm;
        result.iterations = iter;
        if (gnorm <= options.gradient_tolerance) {
            result.converged = true;
            // Converged at a box bound means the true optimum may lie outside.
            for (double v : b) {
                if (std::abs(v) >= kBoxBound) result.converged = false;
            }
            return result;
        }

        // Newton step on the K-1 free coordinates (b_K closes the zero sum).
        std::vector<std::vector<double>> H(K, std::vector<double>(K, 0.0));
        for (const auto& z : logits) {
            const auto p = row_softmax(z, b);
            for (std::size_t a = 0; a < K; ++a) {
                for (std::size_t c = 0; c < K; ++c) {
                    H[a][c] += (a == c ? p[a] : 0.0) - p[a] * p[c];
                }
            }
        }
        std::vector<std::vector<double>> Hr(K - 1, std::vector<double>(K - 1));
        std::vector<double> gr(K - 1);
        for (std::size_t a = 0; a + 1 < K; ++a) {
            gr[a] = g[a] - g[K - 1];
            for (std::size_t c = 0; c + 1 < K; ++c) {
                Hr[a][c] = H[a][c] - H[a][K - 1] - H[K - 1][c] + H[K - 1][K - 1];
            }
        }
        const auto step = solve_dense(std::move(Hr), gr);

        // Backtracking line search on the NLL.
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> trial = b;
            double last = 0.0;
            for (std::size_t a = 0; a + 1 < K; ++a) {
                trial[a] -= t * step[a];
                last -= trial[a];
            }
            trial[K - 1] = last;
            clip_to_box(trial);
            // Re-center after clipping so the zero-sum invariant holds.
            const double mean = std::accumulate(trial.begin(), trial.end(), 0.0) /
                                static_cast<double>(K);
            for (double& v : trial) v -= mean;
            const double trial_nll = shift_nll(logits, labels, trial);
            // Accept a tie on the full Newton step: near the optimum the
            // decrease is below double rounding while the step still shrinks
            // the gradient quadratically.
            if (trial_nll < nll || (ls == 0 && trial_nll == nll)) {
                b = std::move(trial);
                nll = trial_nll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No descent direction left at double precision.
            result.b = b;
            result.converged = result.final_gradient_norm <= options.gradient_tolerance;
            return result;
        }
    }
    const auto g = shift_gradient(logits, labels, b);
    double gnorm = 0.0;
    for (double v : g) gnorm += v * v;
    result.b = b;
    result.final_gradient_norm = std::sqrt(gnorm);
    result.iterations = options.max_iterations;
    result.converged = false;
    return result;
}

std::vector<double> apply_vector_scaling(std::span<const double> prob_row,
                                         const ShiftCoefficients& coeffs) {
    if (prob_row.size() != coeffs.b.size())
        throw DimensionMismatch("row length does not match coefficient count");
    std::vector<double> out(prob_row.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        sum += (out[k] = prob_row[k] * std::exp(coeffs.b[k]));
    }
    if (sum <= 0.0) throw ProbabilityOutOfRange("row has no probability mass");
    for (double& v : out) v /= sum;
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_for_shift(
    std::size_t n, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ParseError("fraction must lie strictly between 0 and 1");
    const auto fit_size = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(n)));
    if (fit_size == 0 || fit_size == n)
        throw TooFew("both parts of the split must be nonempty");

    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        std::swap(indices[i], indices[rng.below(i + 1)]);
    }
    std::vector<std::size_t> fit(indices.begin(), indices.begin() + fit_size);
    std::vector<std::size_t> rest(indices.begin() + fit_size, indices.end());
    std::sort(fit.begin(), fit.end());
    std::sort(rest.begin(), rest.end());
    return {std::move(fit), std::move(rest)};
}

}  // namespace infosel
