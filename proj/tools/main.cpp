#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infosel/envelope.hpp"
#include "infosel/errors.hpp"
#include "infosel/io.hpp"
#include "infosel/oracle.hpp"
#include "infosel/policy.hpp"
#include "infosel/selector.hpp"
#include "infosel/shift.hpp"
#include "infosel/simlab.hpp"

namespace {

using namespace infosel;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitNoSelection = 3;

SelectionMethod parse_method(const std::string& name) {
    if (name == "all-intersections") return SelectionMethod::AllIntersections;
    if (name == "envelope-traversal") return SelectionMethod::EnvelopeTraversal;
    if (name == "threshold") return SelectionMethod::ThresholdForm;
    throw ParseError("unknown method '" + name +
                     "' (expected all-intersections | envelope-traversal | threshold)");
}

struct SelectArgs {
    std::string cal_probs, cal_labels, test_probs, family, method = "threshold";
    double alpha = 0.1;
    double shift_fraction = 0.0;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

int run_select(const SelectArgs& args) {
    auto cal = read_probs_csv(args.cal_probs);
    auto labels = read_labels_csv(args.cal_labels, cal);
    auto test = read_probs_csv(args.test_probs);
    if (test.class_count != cal.class_count)
        throw ParseError("calibration and test files disagree on the class count");
    const auto family = parse_family(args.family, cal.class_count);

    if (args.shift_fraction > 0.0) {
        auto [fit_part, rest] = split_for_shift(cal.rows.size(), args.shift_fraction, args.seed);
        std::vector<std::vector<double>> fit_rows;
        std::vector<int> fit_labels;
        for (std::size_t i : fit_part) {
            fit_rows.push_back(cal.rows[i]);
            fit_labels.push_back(labels[i]);
        }
        const auto coeffs = fit_vector_scaling(fit_rows, fit_labels);
        ProbTable kept;
        kept.class_count = cal.class_count;
        std::vector<int> kept_labels;
        for (std::size_t i : rest) {
            kept.ids.push_back(cal.ids[i]);
            kept.rows.push_back(apply_vector_scaling(cal.rows[i], coeffs));
            kept_labels.push_back(labels[i]);
        }
        cal = std::move(kept);
        labels = std::move(kept_labels);
        for (auto& row : test.rows) row = apply_vector_scaling(row, coeffs);
    }

    const auto outcome =
        run_og_infosp(cal.rows, labels, test.rows, family, args.alpha, parse_method(args.method));

    const std::string selection_path = args.out_dir + "/selection.json";
    const std::string manifest_path = args.out_dir + "/manifest.json";
    write_file(selection_path, selection_to_json(outcome, test));
    json config{{"cal_probs", args.cal_probs},
                {"cal_labels", args.cal_labels},
                {"test_probs", args.test_probs},
                {"family", args.family},
                {"alpha", args.alpha},
                {"method", args.method},
                {"shift_fraction", args.shift_fraction}};
    write_file(manifest_path,
               manifest_json("select", config.dump(), args.seed, {selection_path}));
    if (std::isinf(outcome.mu_alpha)) {
        std::cerr << "no multiplier satisfies the FCP bound; nothing selected\n";
        return kExitNoSelection;
    }
    return kExitOk;
}

int run_cal_rule(const std::string& cal_probs, const std::string& cal_labels,
                 const std::string& family_text, double alpha, const std::string& out_dir) {
    const auto cal = read_probs_csv(cal_probs);
    const auto labels = read_labels_csv(cal_labels, cal);
    const auto family = parse_family(family_text, cal.class_count);
    const auto rule = fit_cal_only(cal.rows, labels, family, alpha);

    json doc;
    doc["mu_alpha"] = std::isinf(rule.mu_alpha) ? json("inf") : json(rule.mu_alpha);
    doc["alpha"] = alpha;
    doc["family"] = family_text;
    const std::string rule_path = out_dir + "/rule.json";
    write_file(rule_path, doc.dump(2) + "\n");
    json config{{"cal_probs", cal_probs},
                {"cal_labels", cal_labels},
                {"family", family_text},
                {"alpha", alpha}};
    write_file(out_dir + "/manifest.json",
               manifest_json("cal-rule", config.dump(), 0, {rule_path}));
    if (std::isinf(rule.mu_alpha)) {
        std::cerr << "no multiplier satisfies the calibration-only FCP bound\n";
        return kExitNoSelection;
    }
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    const auto config = parse_experiment_config(config_path);
    const auto result = run_experiment(config);
    const std::string metrics_path = out_dir + "/metrics.csv";
    const std::string aggregate_path = out_dir + "/aggregate.json";
    write_file(metrics_path, metrics_to_csv(result.rows));
    write_file(aggregate_path, aggregate_to_json(result.aggregates));
    write_file(out_dir + "/manifest.json",
               manifest_json("simulate", config_path, config.seed,
                             {metrics_path, aggregate_path}));
    return kExitOk;
}

int run_oracle(const std::string& atoms_path, const std::string& family_text, double alpha,
               std::size_t test_size, const std::string& out_dir) {
    const auto model = read_atoms_csv(atoms_path);
    const int K = static_cast<int>(model.atoms.front().prob_row.size());
    const auto family = parse_family(family_text, K);

    json doc;
    try {
        const auto report = solve_mu_star(model, family, alpha, test_size);
        doc = json::parse(oracle_report_to_json(report));
        doc["degenerate"] = false;
    } catch (const DegenerateRegime&) {
        doc["degenerate"] = true;
        doc["trivial_policy"] = json::array();
        for (const auto& decision : trivial_policy(model, family, alpha)) {
            doc["trivial_policy"].push_back(
                json{{"set", decision.set.members()}, {"selected", decision.selected}});
        }
    }
    const std::string report_path = out_dir + "/report.json";
    write_file(report_path, doc.dump(2) + "\n");
    json config{{"atoms", atoms_path}, {"family", family_text}, {"alpha", alpha},
                {"m", test_size}};
    write_file(out_dir + "/manifest.json",
               manifest_json("oracle", config.dump(), 0, {report_path}));
    return kExitOk;
}

int run_shift_fit(const std::string& probs_path, const std::string& labels_path, bool logits,
                  const std::string& out_dir) {
    const auto table = read_probs_csv(probs_path);
    const auto labels = read_labels_csv(labels_path, table);
    ShiftFitOptions options;
    options.rows_are_logits = logits;
    const auto coeffs = fit_vector_scaling(table.rows, labels, options);
    const std::string out_path = out_dir + "/shift.json";
    write_file(out_path,
               shift_to_json(coeffs.b, coeffs.converged, coeffs.final_gradient_norm));
    json config{{"probs", probs_path}, {"labels", labels_path}, {"logits", logits}};
    write_file(out_dir + "/manifest.json",
               manifest_json("shift-fit", config.dump(), 0, {out_path}));
    return kExitOk;
}

int run_envelope(const std::string& probs_path, const std::string& family_text, double alpha,
                 const std::string& out_dir) {
    const auto table = read_probs_csv(probs_path);
    const auto family = parse_family(family_text, table.class_count);

    json doc = json::array();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto env = upper_envelope(build_lines(
            table.rows[i], family, alpha, reduce_candidates(table.rows[i], family)));
        json entry;
        entry["x_id"] = table.ids[i];
        entry["segments"] = json::array();
        for (const auto& seg : env.segments) {
            entry["segments"].push_back(json{{"start_mu", seg.start_mu},
                                             {"set", seg.line.candidate.members()},
                                             {"intercept", seg.line.intercept},
                                             {"slope", seg.line.slope}});
        }
        entry["zero_crossing"] = env.zero_crossing ? json(*env.zero_crossing) : json("inf");
        const auto nested = verify_nestedness(env);
        entry["nested"] = nested.ok;
        doc.push_back(std::move(entry));
    }
    const std::string out_path = out_dir + "/envelope.json";
    write_file(out_path, doc.dump(2) + "\n");
    json config{{"probs", probs_path}, {"family", family_text}, {"alpha", alpha}};
    write_file(out_dir + "/manifest.json",
               manifest_json("envelope", config.dump(), 0, {out_path}));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"informative conformal selection toolkit"};
    app.require_subcommand(1);

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "batch selection with FCR control");
    select->add_option("--cal-probs", select_args.cal_probs)->required();
    select->add_option("--cal-labels", select_args.cal_labels)->required();
    select->add_option("--test-probs", select_args.test_probs)->required();
    select->add_option("--family", select_args.family)->required();
    select->add_option("--alpha", select_args.alpha)->required();
    select->add_option("--method", select_args.method);
    select->add_option("--shift-fraction", select_args.shift_fraction);
    select->add_option("--seed", select_args.seed);
    select->add_option("--out-dir", select_args.out_dir);

    std::string cr_probs, cr_labels, cr_family, cr_out = ".";
    double cr_alpha = 0.1;
    auto* cal_rule = app.add_subcommand("cal-rule", "fit a calibration-only threshold rule");
    cal_rule->add_option("--cal-probs", cr_probs)->required();
    cal_rule->add_option("--cal-labels", cr_labels)->required();
    cal_rule->add_option("--family", cr_family)->required();
    cal_rule->add_option("--alpha", cr_alpha)->required();
    cal_rule->add_option("--out-dir", cr_out);

    std::string sim_config, sim_out = ".";
    auto* simulate = app.add_subcommand("simulate", "run a simulation sweep");
    simulate->add_option("--config", sim_config)->required();
    simulate->add_option("--out-dir", sim_out);

    std::string or_atoms, or_family, or_out = ".";
    double or_alpha = 0.1;
    std::size_t or_m = 1;
    auto* oracle = app.add_subcommand("oracle", "solve the population problem on an atomic model");
    oracle->add_option("--atoms", or_atoms)->required();
    oracle->add_option("--family", or_family)->required();
    oracle->add_option("--alpha", or_alpha)->required();
    oracle->add_option("--m", or_m);
    oracle->add_option("--out-dir", or_out);

    std::string sf_probs, sf_labels, sf_out = ".";
    bool sf_logits = false;
    auto* shift_fit = app.add_subcommand("shift-fit", "fit vector-scaling coefficients");
    shift_fit->add_option("--probs", sf_probs)->required();
    shift_fit->add_option("--labels", sf_labels)->required();
    shift_fit->add_flag("--logits", sf_logits);
    shift_fit->add_option("--out-dir", sf_out);

    std::string env_probs, env_family, env_out = ".";
    double env_alpha = 0.1;
    auto* envelope = app.add_subcommand("envelope", "dump per-row envelopes");
    envelope->add_option("--probs", env_probs)->required();
    envelope->add_option("--family", env_family)->required();
    envelope->add_option("--alpha", env_alpha)->required();
    envelope->add_option("--out-dir", env_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (select->parsed()) return run_select(select_args);
        if (cal_rule->parsed())
            return run_cal_rule(cr_probs, cr_labels, cr_family, cr_alpha, cr_out);
        if (simulate->parsed()) return run_simulate(sim_config, sim_out);
        if (oracle->parsed()) return run_oracle(or_atoms, or_family, or_alpha, or_m, or_out);
        if (shift_fit->parsed()) return run_shift_fit(sf_probs, sf_labels, sf_logits, sf_out);
        if (envelope->parsed()) return run_envelope(env_probs, env_family, env_alpha, env_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
