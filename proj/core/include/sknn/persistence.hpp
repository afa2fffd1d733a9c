#pragma once

#include <iosfwd>
#include <string>

#include "sknn/engine.hpp"

namespace sknn {

// Snapshot format: self-describing text header (magic, version, digest,
// schema, hyperparameters) followed by a length-prefixed little-endian
// binary body holding deviations, confusion matrices, cached stats, and
// case values bit-exactly. Canonical ordering makes save deterministic.
void save_model(const Model& m, std::ostream& out);
void save_model(const Model& m, const std::string& path);

Model load_model(std::istream& in);
Model load_model(const std::string& path);

}  // namespace sknn
