#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "infosel/label_set.hpp"

namespace infosel {

/// Specification of the candidate collection. Cardinality-based families are
/// kept implicit (never enumerated); explicit families carry the full list.
struct FamilySpec {
    enum class Kind { CardinalityBased, Explicit };
    Kind kind = Kind::CardinalityBased;

    // CardinalityBased
    std::set<int> excluded;
    int min_card = 1;
    int max_card = 1;

    // Explicit
    std::vector<LabelSet> sets;

    static FamilySpec cardinality(std::set<int> excluded, int min_card, int max_card) {
        FamilySpec s;
        s.kind = Kind::CardinalityBased;
        s.excluded = std::move(excluded);
        s.min_card = min_card;
        s.max_card = max_card;
        return s;
    }
    static FamilySpec explicit_sets(std::vector<LabelSet> sets) {
        FamilySpec s;
        s.kind = Kind::Explicit;
        s.sets = std::move(sets);
        return s;
    }
};

enum class WeightKind { InverseCardinality, ExplicitTable };

struct NestednessCertificate {
    bool guaranteed = false;
    std::string note;  // for NotGuaranteed: what must be verified per instance
};

/// The collection of informative candidate sets together with the weight
/// function w. Immutable after construction; safe to share across threads.
class InformativeFamily {
public:
    static InformativeFamily build(const FamilySpec& spec, int K);
    static InformativeFamily build(const FamilySpec& spec, int K,
                                   const std::map<LabelSet, double>& weights);

    int class_count() const { return K_; }
    FamilySpec::Kind kind() const { return spec_.kind; }
    WeightKind weight_kind() const { return weight_kind_; }
    const std::set<int>& excluded() const { return spec_.excluded; }
    int min_card() const { return spec_.min_card; }
    int max_card() const { return spec_.max_card; }

    /// Members of an Explicit family (deduplicated, lexicographically sorted).
    /// Empty for CardinalityBased families, which are never materialized.
    const std::vector<LabelSet>& explicit_members() const { return spec_.sets; }

    bool contains(const LabelSet& set) const;
    double weight_of(const LabelSet& set) const;

    NestednessCertificate nestedness_certificate() const;

    /// Number of non-excluded classes; for CardinalityBased the effective
    /// largest candidate cardinality is min(max_card, this value).
    int non_excluded_count() const { return K_ - static_cast<int>(spec_.excluded.size()); }

private:
    InformativeFamily() = default;
    int K_ = 0;
    FamilySpec spec_;
    WeightKind weight_kind_ = WeightKind::InverseCardinality;
    std::map<LabelSet, double> weight_table_;
};

}  // namespace infosel
