#pragma once

#include <string>
#include <vector>

#include "infosel/family.hpp"
#include "infosel/oracle.hpp"
#include "infosel/selector.hpp"
#include "infosel/simlab.hpp"

namespace infosel {

/// Probability matrix keyed by example id. Header: x_id,p_1,...,p_K.
struct ProbTable {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    int class_count = 0;
};

ProbTable read_probs_csv(const std::string& path);

/// Labels CSV (header x_id,y) aligned against a probability table: ids must
/// match one-to-one in order.
std::vector<int> read_labels_csv(const std::string& path, const ProbTable& table);

/// Atoms CSV (header mass,p_1,...,p_K); validated.
AtomicModel read_atoms_csv(const std::string& path);

/// Family description: the shorthands "nontrivial" and "exclude=<k>", or a
/// path to a JSON file with either
///   {"kind":"cardinality","excluded":[..],"min_card":..,"max_card":..}
/// or
///   {"kind":"explicit","sets":[[1],[2,3]],"weights":{"[2,3]":0.5,...}}
/// (weights optional; default 1/|C|).
InformativeFamily parse_family(const std::string& text, int class_count);

/// Experiment config JSON; see README for the schema.
ExperimentConfig parse_experiment_config(const std::string& path);

std::string selection_to_json(const SelectionOutcome& outcome, const ProbTable& test);
std::string oracle_report_to_json(const OracleReport& report);
std::string shift_to_json(const std::vector<double>& b, bool converged, double grad_norm);
std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
std::string aggregate_to_json(const std::vector<AggregateRow>& aggregates);

/// Provenance record written next to every CLI output.
std::string manifest_json(const std::string& command, const std::string& resolved_config,
                          std::uint64_t seed, const std::vector<std::string>& outputs);

void write_file(const std::string& path, const std::string& content);

}  // namespace infosel
