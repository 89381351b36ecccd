#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace editodds {

// Maps raw string ids (user names, IP addresses, subsystem paths, article
// titles) to dense indices assigned in first-appearance order.
class Vocabulary {
public:
    Vocabulary() = default;

    // Returns the index of `raw`, inserting it if unseen.
    int add(std::string_view raw) {
        auto it = index_.find(raw);
        if (it != index_.end()) return it->second;
        const int idx = static_cast<int>(ids_.size());
        ids_.emplace_back(raw);
        index_.emplace(ids_.back(), idx);
        return idx;
    }

    std::optional<int> find(std::string_view raw) const {
        auto it = index_.find(raw);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& id(int index) const {
        if (index < 0 || index >= static_cast<int>(ids_.size())) {
            throw std::out_of_range("vocabulary index " + std::to_string(index) +
                                    " out of range [0, " + std::to_string(ids_.size()) + ")");
        }
        return ids_[static_cast<size_t>(index)];
    }

    int size() const { return static_cast<int>(ids_.size()); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    struct Hash {
        using is_transparent = void;
        size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };

    std::vector<std::string> ids_;
    std::unordered_map<std::string, int, Hash, std::equal_to<>> index_;
};

}  // namespace editodds
