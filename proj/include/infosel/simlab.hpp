#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "infosel/label_set.hpp"

namespace infosel {

/// Four-component planar Gaussian mixture with identity covariance and
/// component means (0,0), (snr,0), (snr,snr), (0,snr).
struct MixtureSpec {
    double snr = 2.0;
    std::array<double, 4> pi = {0.25, 0.25, 0.25, 0.25};
    std::uint64_t seed = 0;
};

struct MixtureSample {
    std::vector<std::array<double, 2>> x;
    std::vector<int> y;  // 1-based component labels
};

MixtureSample sample_mixture(const MixtureSpec& spec, std::size_t count);

/// Exact posterior class probabilities under the mixture described by
/// `spec` (which need not match the data-generating one).
std::vector<double> bayes_posteriors(const std::array<double, 2>& x, const MixtureSpec& spec);

struct MetricsRow {
    std::string scenario;
    std::string method;
    int rep = 0;
    double fcp = 0.0;
    double tcp = 0.0;
    int n_selected = 0;
    bool failed = false;
    std::string error;
};

/// fcp = miscovered / max(selected, 1); tcp = sum over covered selections of
/// 1 / |set|.
void compute_metrics(const std::vector<std::size_t>& selected, const std::vector<LabelSet>& sets,
                     const std::vector<int>& truths, MetricsRow& row);

struct Scenario {
    std::string id;
    double snr = 2.0;
    std::array<double, 4> pi = {0.25, 0.25, 0.25, 0.25};        // data-generating prior
    std::array<double, 4> pi_train = {0.25, 0.25, 0.25, 0.25};  // prior baked into the model
    std::string family = "nontrivial";  // "nontrivial" or "exclude=<k>"
};

struct ExperimentConfig {
    std::vector<Scenario> scenarios;
    std::vector<std::string> methods;  // subset of kExperimentMethods
    int reps = 100;
    std::size_t n_cal = 200;
    std::size_t m_test = 200;
    double alpha = 0.1;
    std::uint64_t seed = 1;
    double shift_fraction = 0.2;  // calibration share used by the *_vs fits
    int threads = 0;              // 0: use INFOSEL_THREADS, then hardware
};

inline constexpr const char* kExperimentMethods[] = {
    "og_infosp", "og_infosp_cal_only", "classic",
    "info_sp",   "og_infosp_vs",       "og_infosp_cal_only_vs",
};

struct AggregateRow {
    std::string scenario;
    std::string method;
    int reps = 0;  // successful reps
    double fcr = 0.0;
    double fcr_se = 0.0;
    double tcp_mean = 0.0;
    double tcp_se = 0.0;
    double mean_selected = 0.0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;  // ordered by (scenario, rep, method)
    std::vector<AggregateRow> aggregates;
};

/// Runs every (scenario, rep) on a shared data draw per rep, each method on
/// identical calibration/test samples. Reps run in parallel on derived RNG
/// streams; the output ordering is deterministic. Method errors become
/// failure rows instead of aborting.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace infosel
