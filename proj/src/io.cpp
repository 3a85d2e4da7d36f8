#include "infosel/io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace.
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? ""
                                                    : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
}

json mu_to_json(double mu) {
    if (std::isinf(mu)) return "inf";
    return mu;
}

LabelSet set_from_json(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ParseError(where + ": set must be an array of class indices");
    std::vector<int> members;
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw ParseError(where + ": class index must be an integer");
        members.push_back(v.get<int>());
    }
    return LabelSet(std::move(members));
}

std::array<double, 4> prior_from_json(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() != 4)
        throw ParseError(where + ": prior must be an array of 4 weights");
    std::array<double, 4> pi{};
    for (int k = 0; k < 4; ++k) pi[k] = arr[k].get<double>();
    return pi;
}

}  // namespace

ProbTable read_probs_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path + ":1: empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "x_id")
        throw ParseError(path + ":1: expected header x_id,p_1,...,p_K");
    const int K = static_cast<int>(header.size()) - 1;
    for (int k = 1; k <= K; ++k) {
        if (header[k] != "p_" + std::to_string(k))
            throw ParseError(path + ":1: expected column p_" + std::to_string(k) + ", got '" +
                             header[k] + "'");
    }

    ProbTable table;
    table.class_count = K;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (static_cast<int>(fields.size()) != K + 1)
            throw ParseError(path + ":" + std::to_string(i + 1) + ": expected " +
                             std::to_string(K + 1) + " fields, got " +
                             std::to_string(fields.size()));
        table.ids.push_back(fields[0]);
        std::vector<double> row(K);
        for (int k = 0; k < K; ++k) row[k] = parse_double(fields[k + 1], path, i + 1);
        try {
            validate_prob_row(row);
        } catch (const Error& e) {
            throw ParseError(path + ":" + std::to_string(i + 1) + ": row '" + fields[0] +
                             "': " + e.what());
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw ParseError(path + ": no data rows");
    return table;
}

std::vector<int> read_labels_csv(const std::string& path, const ProbTable& table) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path + ":1: empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() != 2 || header[0] != "x_id" || header[1] != "y")
        throw ParseError(path + ":1: expected header x_id,y");

    std::vector<int> labels;
    std::size_t row = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 2)
            throw ParseError(path + ":" + std::to_string(i + 1) + ": expected 2 fields");
        if (row >= table.ids.size())
            throw ParseError(path + ":" + std::to_string(i + 1) + ": more labels than rows");
        if (fields[0] != table.ids[row])
            throw ParseError(path + ":" + std::to_string(i + 1) + ": id '" + fields[0] +
                             "' does not match probability row id '" + table.ids[row] + "'");
        const double y = parse_double(fields[1], path, i + 1);
        const int label = static_cast<int>(y);
        if (y != label || label < 1 || label > table.class_count)
            throw ParseError(path + ":" + std::to_string(i + 1) +
                             ": label must be an integer in [1," +
                             std::to_string(table.class_count) + "]");
        labels.push_back(label);
        ++row;
    }
    if (labels.size() != table.rows.size())
        throw ParseError(path + ": got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(table.rows.size()) + " rows");
    return labels;
}

AtomicModel read_atoms_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path + ":1: empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "mass")
        throw ParseError(path + ":1: expected header mass,p_1,...,p_K");
    const int K = static_cast<int>(header.size()) - 1;

    AtomicModel model;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (static_cast<int>(fields.size()) != K + 1)
            throw ParseError(path + ":" + std::to_string(i + 1) + ": expected " +
                             std::to_string(K + 1) + " fields");
        Atom atom;
        atom.mass = parse_double(fields[0], path, i + 1);
        atom.prob_row.resize(K);
        for (int k = 0; k < K; ++k) atom.prob_row[k] = parse_double(fields[k + 1], path, i + 1);
        model.atoms.push_back(std::move(atom));
    }
    try {
        validate_model(model, K);
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model;
}

InformativeFamily parse_family(const std::string& text, int class_count) {
    if (text == "nontrivial") {
        return InformativeFamily::build(FamilySpec::cardinality({}, 1, class_count - 1),
                                        class_count);
    }
    if (text.rfind("exclude=", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(text.substr(8));
        } catch (const std::exception&) {
            throw ParseError("family: bad class index in '" + text + "'");
        }
        return InformativeFamily::build(FamilySpec::cardinality({k}, 1, class_count - 1),
                                        class_count);
    }

    json doc;
    try {
        std::ifstream in(text);
        if (!in) throw ParseError("family: cannot open '" + text + "'");
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("family: " + text + ": " + e.what());
    }
    const std::string kind = doc.value("kind", "");
    if (kind == "cardinality") {
        std::set<int> excluded;
        for (const auto& v : doc.value("excluded", json::array())) excluded.insert(v.get<int>());
        return InformativeFamily::build(
            FamilySpec::cardinality(excluded, doc.value("min_card", 1),
                                    doc.value("max_card", class_count - 1)),
            class_count);
    }
    if (kind == "explicit") {
        std::vector<LabelSet> sets;
        for (const auto& arr : doc.at("sets")) sets.push_back(set_from_json(arr, text));
        if (doc.contains("weights")) {
            std::map<LabelSet, double> weights;
            for (const auto& [key, value] : doc.at("weights").items()) {
                weights[set_from_json(json::parse(key), text)] = value.get<double>();
            }
            // Sets without an entry keep the default inverse-cardinality weight.
            for (const auto& s : sets) {
                if (!weights.count(s)) weights[s] = 1.0 / static_cast<double>(s.size());
            }
            return InformativeFamily::build(FamilySpec::explicit_sets(sets), class_count,
                                            weights);
        }
        return InformativeFamily::build(FamilySpec::explicit_sets(sets), class_count);
    }
    throw ParseError("family: " + text + ": kind must be 'cardinality' or 'explicit'");
}

ExperimentConfig parse_experiment_config(const std::string& path) {
    json doc;
    try {
        std::ifstream in(path);
        if (!in) throw ParseError(path + ": cannot open");
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    ExperimentConfig config;
    try {
        config.reps = doc.value("reps", 100);
        config.n_cal = doc.value("n_cal", 200);
        config.m_test = doc.value("m_test", 200);
        config.alpha = doc.value("alpha", 0.1);
        config.seed = doc.value("seed", 1);
        config.shift_fraction = doc.value("shift_fraction", 0.2);
        config.threads = doc.value("threads", 0);
        for (const auto& name : doc.at("methods")) config.methods.push_back(name.get<std::string>());
        for (const auto& s : doc.at("scenarios")) {
            Scenario scenario;
            scenario.id = s.at("id").get<std::string>();
            scenario.snr = s.value("snr", 2.0);
            if (s.contains("pi")) scenario.pi = prior_from_json(s["pi"], path);
            scenario.pi_train =
                s.contains("pi_train") ? prior_from_json(s["pi_train"], path) : scenario.pi;
            scenario.family = s.value("family", "nontrivial");
            config.scenarios.push_back(std::move(scenario));
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return config;
}

std::string selection_to_json(const SelectionOutcome& outcome, const ProbTable& test) {
    json doc;
    doc["mu_alpha"] = mu_to_json(outcome.mu_alpha);
    doc["fcp_hat"] = outcome.fcp_hat_at_solution;
    doc["selected"] = json::array();
    for (std::size_t idx = 0; idx < outcome.selected.size(); ++idx) {
        json entry;
        entry["x_id"] = test.ids[outcome.selected[idx]];
        entry["set"] = outcome.sets[idx].members();
        doc["selected"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::string oracle_report_to_json(const OracleReport& report) {
    json doc;
    doc["mu_star"] = mu_to_json(report.mu_star);
    doc["power"] = report.power;
    doc["constraint"] = report.constraint;
    doc["mfcr"] = report.mfcr;
    doc["fcr_factor"] = report.fcr_factor;
    doc["fcr"] = report.mfcr * report.fcr_factor;
    return doc.dump(2) + "\n";
}

std::string shift_to_json(const std::vector<double>& b, bool converged, double grad_norm) {
    json doc;
    doc["b"] = b;
    doc["converged"] = converged;
    doc["grad_norm"] = grad_norm;
    return doc.dump(2) + "\n";
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "scenario,method,rep,fcp,tcp,n_selected\n";
    out.precision(17);
    for (const auto& row : rows) {
        if (row.failed) {
            out << row.scenario << "," << row.method << "," << row.rep << ",failed,failed,0\n";
            continue;
        }
        out << row.scenario << "," << row.method << "," << row.rep << "," << row.fcp << ","
            << row.tcp << "," << row.n_selected << "\n";
    }
    return out.str();
}

std::string aggregate_to_json(const std::vector<AggregateRow>& aggregates) {
    json doc = json::array();
    for (const auto& agg : aggregates) {
        json entry;
        entry["scenario"] = agg.scenario;
        entry["method"] = agg.method;
        entry["reps"] = agg.reps;
        entry["fcr"] = agg.fcr;
        entry["fcr_se"] = agg.fcr_se;
        entry["tcp_mean"] = agg.tcp_mean;
        entry["tcp_se"] = agg.tcp_se;
        entry["mean_selected"] = agg.mean_selected;
        doc.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::string manifest_json(const std::string& command, const std::string& resolved_config,
                          std::uint64_t seed, const std::vector<std::string>& outputs) {
    json doc;
    doc["command"] = command;
    doc["config"] = resolved_config;
    doc["seed"] = seed;
    doc["generator"] = "splitmix64";
    doc["version"] = "1.0.0";
    doc["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
    doc["outputs"] = outputs;
    return doc.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << content;
}

}  // namespace infosel
