#pragma once

#include <string>

#include "editodds/model.hpp"

namespace editodds {

// Checkpoints are a single self-describing JSON document: format_version,
// variant tag, dimensions, vocabularies, and parameter arrays as flat
// row-major lists. Doubles are written in shortest round-trip form, so
// save -> load -> save reproduces the file byte for byte.
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const Predictor& pred, const std::string& path);
Predictor load_checkpoint(const std::string& path);  // rejects unknown format_version

}  // namespace editodds
