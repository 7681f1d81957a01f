#pragma once

#include <iosfwd>

#include <nlohmann/json.hpp>

#include "synlm/numcore/parameters.hpp"

namespace synlm::num {

/// Checkpoint layout:
///
///   line 1   "synlm-checkpoint 1"
///   line 2   one-line JSON metadata; always contains "format_version" and a
///            "parameters" array of {name, shape} in registration order
///   rest     every parameter's values as little-endian IEEE-754 float64,
///            concatenated in the order of the "parameters" array
///
/// Callers supply the remaining metadata (architecture, dimensions,
/// vocabulary, seed).
inline constexpr int kCheckpointFormatVersion = 1;

void write_checkpoint(std::ostream& out, nlohmann::json metadata, const ParameterSet& params);

/// Reads only the metadata line pair, leaving the stream at the tensor blob.
nlohmann::json read_checkpoint_metadata(std::istream& in);

/// Fills `params`, whose names and shapes must match the stored ones.
void read_checkpoint_tensors(std::istream& in, const nlohmann::json& metadata, ParameterSet& params);

}  // namespace synlm::num
