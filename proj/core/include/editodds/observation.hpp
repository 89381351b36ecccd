#pragma once

#include <cstdint>

namespace editodds {

// One edit event: user `user` touched item `item` with outcome q in [0,1]
// (1 = fully retained/accepted, 0 = rejected/reverted) at time `ts`.
// Indices are dense and refer to some Vocabulary.
struct Observation {
    int user = 0;
    int item = 0;
    double q = 0.0;
    std::int64_t ts = 0;
};

}  // namespace editodds
