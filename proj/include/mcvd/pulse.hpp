#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcvd/errors.hpp"

namespace mcvd {

/// Molecules released per sub-slot to signal bit "1". Sub-slot i starts i*t_s/I into the slot.
struct PulseShape {
    std::vector<std::int64_t> counts;
    double slot_duration = 0.0;  ///< t_s, seconds

    [[nodiscard]] int subslots() const noexcept { return static_cast<int>(counts.size()); }
    [[nodiscard]] std::int64_t total() const noexcept {
        return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    }

    void validate() const {
        if (counts.empty()) throw DomainError("pulse: at least one sub-slot required");
        if (std::any_of(counts.begin(), counts.end(), [](std::int64_t g) { return g < 0; }))
            throw DomainError("pulse: negative molecule count");
    }
};

}  // namespace mcvd
