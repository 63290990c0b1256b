#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>

namespace lrvmc {

// Checkpoints are a JSON manifest (<stem>.json) plus a flat little-endian f64
// parameter block (<stem>.bin). The round trip is bit-exact.
struct Checkpoint {
  nlohmann::json manifest;
  Eigen::VectorXd parameters;
};

void save_checkpoint(const std::filesystem::path& stem, const nlohmann::json& manifest,
                     const Eigen::VectorXd& parameters);

Checkpoint load_checkpoint(const std::filesystem::path& stem);

}  // namespace lrvmc
