#pragma once

#include <algorithm>
#include <compare>
#include <string>
#include <vector>

namespace infosel {

/// A subset of the classes [K], kept sorted ascending with 1-based indices.
/// Lexicographic order on the sorted member list is the systematic tie order
/// used throughout.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<int> members) : members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    const std::vector<int>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }

    bool contains(int k) const {
        return std::binary_search(members_.begin(), members_.end(), k);
    }

    bool subset_of(const LabelSet& other) const {
        return std::includes(other.members_.begin(), other.members_.end(),
                             members_.begin(), members_.end());
    }

    friend bool operator==(const LabelSet& a, const LabelSet& b) = default;
    friend auto operator<=>(const LabelSet& a, const LabelSet& b) {
        return a.members_ <=> b.members_;
    }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(members_[i]);
        }
        return s + "}";
    }

private:
    std::vector<int> members_;
};

}  // namespace infosel
