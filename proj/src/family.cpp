#include "infosel/family.hpp"

#include <cmath>

#include "infosel/errors.hpp"

namespace infosel {

namespace {

void validate_weights(const std::map<LabelSet, double>& table) {
    for (const auto& [set, w] : table) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw InvalidWeight("weight for " + set.to_string() +
                                " must be a finite positive real");
        }
    }
}

}  // namespace

InformativeFamily InformativeFamily::build(const FamilySpec& spec, int K) {
    return build(spec, K, {});
}

InformativeFamily InformativeFamily::build(const FamilySpec& spec, int K,
                                           const std::map<LabelSet, double>& weights) {
    if (K < 2) throw EmptyFamily("class count must be at least 2");
    InformativeFamily fam;
    fam.K_ = K;
    fam.spec_ = spec;
    if (!weights.empty()) {
        validate_weights(weights);
        fam.weight_kind_ = WeightKind::ExplicitTable;
        fam.weight_table_ = weights;
    }

    if (spec.kind == FamilySpec::Kind::CardinalityBased) {
        for (int k : spec.excluded) {
            if (k < 1 || k > K) throw EmptyFamily("excluded class out of range [1,K]");
        }
        if (static_cast<int>(spec.excluded.size()) >= K)
            throw EmptyFamily("all classes excluded");
        if (spec.min_card < 1 || spec.min_card > spec.max_card || spec.max_card > K)
            throw EmptyFamily("inconsistent cardinality bounds");
        if (spec.min_card > fam.non_excluded_count())
            throw EmptyFamily("min cardinality exceeds number of non-excluded classes");
        if (fam.weight_kind_ == WeightKind::ExplicitTable)
            throw InvalidWeight("explicit weight tables require an explicit family");
    } else {
        std::vector<LabelSet> sets = spec.sets;
        std::sort(sets.begin(), sets.end());
        sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
        if (sets.empty()) throw EmptyFamily("explicit family has no sets");
        for (const auto& s : sets) {
            if (s.empty()) throw EmptyFamily("explicit family contains an empty set");
            for (int k : s.members()) {
                if (k < 1 || k > K) throw EmptyFamily("class index out of range in " + s.to_string());
            }
        }
        if (fam.weight_kind_ == WeightKind::ExplicitTable) {
            for (const auto& s : sets) {
                if (!fam.weight_table_.count(s))
                    throw InvalidWeight("missing weight for " + s.to_string());
            }
        }
        fam.spec_.sets = std::move(sets);
    }
    return fam;
}

bool InformativeFamily::contains(const LabelSet& set) const {
    if (set.empty()) return false;
    if (spec_.kind == FamilySpec::Kind::Explicit) {
        return std::binary_search(spec_.sets.begin(), spec_.sets.end(), set);
    }
    const int card = static_cast<int>(set.size());
    if (card < spec_.min_card || card > spec_.max_card) return false;
    for (int k : set.members()) {
        if (k < 1 || k > K_ || spec_.excluded.count(k)) return false;
    }
    return true;
}

double InformativeFamily::weight_of(const LabelSet& set) const {
    if (!contains(set)) throw NotInFamily(set.to_string() + " is not in the family");
    if (weight_kind_ == WeightKind::InverseCardinality)
        return 1.0 / static_cast<double>(set.size());
    return weight_table_.at(set);
}

NestednessCertificate InformativeFamily::nestedness_certificate() const {
    if (spec_.kind == FamilySpec::Kind::CardinalityBased &&
        weight_kind_ == WeightKind::InverseCardinality) {
        return {true, ""};
    }
    return {false,
            "nestedness is not structurally guaranteed; verify per instance "
            "(policy::verify_nestedness) before running the selector"};
}

}  // namespace infosel
