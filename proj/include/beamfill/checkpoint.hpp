#pragma once

#include <memory>
#include <string>

#include "beamfill/estimators.hpp"

namespace beamfill {

/// Binary model container: magic, format version, estimator kind, missing
/// mask, window length, kind-specific layer sizes, then every parameter
/// tensor as name + shape + little-endian 64-bit floats.
void save_checkpoint(const std::string& path, NeuralEstimator& net);

/// Rebuilds the estimator the file describes. Every tensor name and shape
/// is validated against the reconstructed architecture; any mismatch or
/// truncation raises CheckpointError.
std::unique_ptr<NeuralEstimator> load_checkpoint(const std::string& path);

}  // namespace beamfill
