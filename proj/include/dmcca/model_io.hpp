#pragma once

#include <string>

#include "dmcca/cca_family.hpp"

namespace dmcca {

/// Single JSON document: method, fusion, d, d_max, eigenvalues, per-set
/// means, per-set projection blocks as row-major arrays. Floats are written
/// with shortest round-trip precision, so save/load is lossless.
std::string model_to_json(const ProjectionModel& model);
ProjectionModel model_from_json(const std::string& text);

void save_model(const std::string& path, const ProjectionModel& model);
ProjectionModel load_model(const std::string& path);

}  // namespace dmcca
