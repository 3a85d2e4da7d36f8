#include "infosel/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>

#include "infosel/errors.hpp"
#include "infosel/rng.hpp"
#include "infosel/selector.hpp"
#include "infosel/shift.hpp"
#include "infosel/special.hpp"

namespace infosel {

namespace {

std::array<double, 2> component_mean(int k, double snr) {
    switch (k) {
        case 1: return {0.0, 0.0};
        case 2: return {snr, 0.0};
        case 3: return {snr, snr};
        default: return {0.0, snr};
    }
}

InformativeFamily goal_family(const std::string& name) {
    if (name == "nontrivial")
        return InformativeFamily::build(FamilySpec::cardinality({}, 1, 3), 4);
    if (name.rfind("exclude=", 0) == 0) {
        const int k = std::stoi(name.substr(8));
        return InformativeFamily::build(FamilySpec::cardinality({k}, 1, 3), 4);
    }
    throw ParseError("unknown family shorthand: " + name);
}

struct RepData {
    std::vector<std::vector<double>> cal_rows;
    std::vector<int> cal_labels;
    std::vector<std::vector<double>> test_rows;
    std::vector<int> test_labels;
};

RepData draw_rep(const Scenario& scenario, const ExperimentConfig& config,
                 std::uint64_t stream_seed) {
    MixtureSpec data_spec{scenario.snr, scenario.pi, stream_seed};
    const auto cal = sample_mixture(data_spec, config.n_cal);
    MixtureSpec test_spec = data_spec;
    test_spec.seed = derive_seed(stream_seed, 0x7e57, 1);
    const auto test = sample_mixture(test_spec, config.m_test);

    // The "classifier" believes the training prior; under label shift that
    // differs from the prior the data were drawn with.
    MixtureSpec model_spec{scenario.snr, scenario.pi_train, 0};
    RepData data;
    data.cal_labels = cal.y;
    data.test_labels = test.y;
    for (const auto& x : cal.x) data.cal_rows.push_back(bayes_posteriors(x, model_spec));
    for (const auto& x : test.x) data.test_rows.push_back(bayes_posteriors(x, model_spec));
    return data;
}

ShiftCoefficients fit_shift_on_split(const RepData& data, double fraction,
                                     std::uint64_t stream_seed,
                                     std::vector<std::size_t>& keep) {
    auto [fit_part, rest] =
        split_for_shift(data.cal_rows.size(), fraction, derive_seed(stream_seed, 0x5911, 2));
    std::vector<std::vector<double>> fit_rows;
    std::vector<int> fit_labels;
    for (std::size_t i : fit_part) {
        fit_rows.push_back(data.cal_rows[i]);
        fit_labels.push_back(data.cal_labels[i]);
    }
    keep = std::move(rest);
    return fit_vector_scaling(fit_rows, fit_labels);
}

void run_method(const std::string& method, const RepData& data, const InformativeFamily& family,
                const ExperimentConfig& config, std::uint64_t stream_seed, MetricsRow& row) {
    const double alpha = config.alpha;
    std::vector<std::size_t> selected;
    std::vector<LabelSet> sets;
    std::vector<int> truths = data.test_labels;

    const bool vs = method == "og_infosp_vs" || method == "og_infosp_cal_only_vs";
    std::vector<std::vector<double>> cal_rows = data.cal_rows;
    std::vector<int> cal_labels = data.cal_labels;
    std::vector<std::vector<double>> test_rows = data.test_rows;
    if (vs) {
        std::vector<std::size_t> keep;
        const auto coeffs =
            fit_shift_on_split(data, config.shift_fraction, stream_seed, keep);
        std::vector<std::vector<double>> kept_rows;
        std::vector<int> kept_labels;
        for (std::size_t i : keep) {
            kept_rows.push_back(apply_vector_scaling(data.cal_rows[i], coeffs));
            kept_labels.push_back(data.cal_labels[i]);
        }
        cal_rows = std::move(kept_rows);
        cal_labels = std::move(kept_labels);
        for (auto& r : test_rows) r = apply_vector_scaling(r, coeffs);
    }

    if (method == "og_infosp" || method == "og_infosp_vs") {
        const auto outcome = run_og_infosp(cal_rows, cal_labels, test_rows, family, alpha);
        selected = outcome.selected;
        sets = outcome.sets;
    } else if (method == "og_infosp_cal_only" || method == "og_infosp_cal_only_vs") {
        const auto rule = fit_cal_only(cal_rows, cal_labels, family, alpha);
        for (std::size_t j = 0; j < test_rows.size(); ++j) {
            if (auto set = apply_cal_only(rule, test_rows[j])) {
                selected.push_back(j);
                sets.push_back(std::move(*set));
            }
        }
    } else if (method == "classic") {
        const auto outcome = run_classic_baseline(cal_rows, cal_labels, test_rows, family, alpha);
        selected = outcome.selected;
        sets = outcome.sets;
    } else if (method == "info_sp") {
        const auto outcome = run_info_sp(cal_rows, cal_labels, test_rows, family, alpha);
        selected = outcome.selected;
        sets = outcome.sets;
    } else {
        throw ParseError("unknown method: " + method);
    }
    compute_metrics(selected, sets, truths, row);
}

int worker_count(const ExperimentConfig& config) {
    int threads = config.threads;
    if (threads == 0) {
        if (const char* env = std::getenv("INFOSEL_THREADS")) threads = std::atoi(env);
    }
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(threads, 1);
}

}  // namespace

MixtureSample sample_mixture(const MixtureSpec& spec, std::size_t count) {
    if (count < 1) throw EmptyInput("count must be at least 1");
    double total = 0.0;
    for (double w : spec.pi) total += w;
    if (std::abs(total - 1.0) > 1e-12)
        throw ProbabilityOutOfRange("mixture weights must sum to 1");

    Rng rng(spec.seed);
    MixtureSample sample;
    sample.x.reserve(count);
    sample.y.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform();
        int label = 4;
        double acc = 0.0;
        for (int k = 1; k <= 4; ++k) {
            acc += spec.pi[k - 1];
            if (u < acc) {
                label = k;
                break;
            }
        }
        const auto mean = component_mean(label, spec.snr);
        sample.x.push_back({mean[0] + rng.normal(), mean[1] + rng.normal()});
        sample.y.push_back(label);
    }
    return sample;
}

std::vector<double> bayes_posteriors(const std::array<double, 2>& x, const MixtureSpec& spec) {
    std::array<double, 4> log_terms;
    double top = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4; ++k) {
        const auto mean = component_mean(k, spec.snr);
        const double dx = x[0] - mean[0];
        const double dy = x[1] - mean[1];
        const double prior = spec.pi[k - 1];
        log_terms[k - 1] = prior > 0.0 ? std::log(prior) - 0.5 * (dx * dx + dy * dy)
                                       : -std::numeric_limits<double>::infinity();
        top = std::max(top, log_terms[k - 1]);
    }
    std::vector<double> p(4);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += (p[k] = std::exp(log_terms[k] - top));
    for (double& v : p) v /= sum;
    return p;
}

void compute_metrics(const std::vector<std::size_t>& selected, const std::vector<LabelSet>& sets,
                     const std::vector<int>& truths, MetricsRow& row) {
    if (selected.size() != sets.size())
        throw DimensionMismatch("selected indices and sets differ in length");
    std::size_t miss = 0;
    double tcp = 0.0;
    for (std::size_t idx = 0; idx < selected.size(); ++idx) {
        const bool covered = sets[idx].contains(truths[selected[idx]]);
        if (!covered) ++miss;
        if (covered) tcp += 1.0 / static_cast<double>(sets[idx].size());
    }
    row.n_selected = static_cast<int>(selected.size());
    row.fcp = selected.empty()
                  ? 0.0
                  : static_cast<double>(miss) / static_cast<double>(selected.size());
    row.tcp = tcp;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.reps < 1) throw EmptyInput("need at least one repetition");
    if (config.scenarios.empty()) throw EmptyInput("no scenarios");
    if (config.methods.empty()) throw EmptyInput("no methods");

    const std::size_t methods = config.methods.size();
    const std::size_t per_rep = methods;
    const std::size_t jobs = config.scenarios.size() * static_cast<std::size_t>(config.reps);

    ExperimentResult result;
    result.rows.resize(jobs * per_rep);

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t job = cursor.fetch_add(1);
            if (job >= jobs) return;
            const std::size_t s = job / static_cast<std::size_t>(config.reps);
            const int rep = static_cast<int>(job % static_cast<std::size_t>(config.reps));
            const Scenario& scenario = config.scenarios[s];
            const std::uint64_t stream_seed =
                derive_seed(config.seed, s + 1, static_cast<std::uint64_t>(rep) + 1);

            RepData data;
            std::optional<InformativeFamily> family;
            bool draw_ok = true;
            std::string draw_error;
            try {
                family = goal_family(scenario.family);
                data = draw_rep(scenario, config, stream_seed);
            } catch (const std::exception& e) {
                draw_ok = false;
                draw_error = e.what();
            }
            for (std::size_t mi = 0; mi < methods; ++mi) {
                MetricsRow& row = result.rows[job * per_rep + mi];
                row.scenario = scenario.id;
                row.method = config.methods[mi];
                row.rep = rep;
                if (!draw_ok) {
                    row.failed = true;
                    row.error = draw_error;
                    continue;
                }
                try {
                    run_method(config.methods[mi], data, *family, config, stream_seed, row);
                } catch (const std::exception& e) {
                    row.failed = true;
                    row.error = e.what();
                }
            }
        }
    };

    const int threads = std::min<std::size_t>(worker_count(config), jobs);
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    // Ordered reduction: scenario-major, then method, over successful reps.
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        for (std::size_t mi = 0; mi < methods; ++mi) {
            AggregateRow agg;
            agg.scenario = config.scenarios[s].id;
            agg.method = config.methods[mi];
            double fcp_sum = 0.0, fcp_sq = 0.0, tcp_sum = 0.0, tcp_sq = 0.0, sel_sum = 0.0;
            for (int rep = 0; rep < config.reps; ++rep) {
                const MetricsRow& row =
                    result.rows[(s * config.reps + rep) * per_rep + mi];
                if (row.failed) continue;
                ++agg.reps;
                fcp_sum += row.fcp;
                fcp_sq += row.fcp * row.fcp;
                tcp_sum += row.tcp;
                tcp_sq += row.tcp * row.tcp;
                sel_sum += row.n_selected;
            }
            if (agg.reps > 0) {
                const double r = agg.reps;
                agg.fcr = fcp_sum / r;
                agg.tcp_mean = tcp_sum / r;
                agg.mean_selected = sel_sum / r;
                if (agg.reps > 1) {
                    const double fcp_var =
                        std::max(0.0, (fcp_sq - r * agg.fcr * agg.fcr) / (r - 1.0));
                    const double tcp_var =
                        std::max(0.0, (tcp_sq - r * agg.tcp_mean * agg.tcp_mean) / (r - 1.0));
                    agg.fcr_se = std::sqrt(fcp_var / r);
                    agg.tcp_se = std::sqrt(tcp_var / r);
                }
            }
            result.aggregates.push_back(std::move(agg));
        }
    }
    return result;
}

}  // namespace infosel
