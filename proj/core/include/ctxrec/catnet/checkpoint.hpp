#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctxrec/catnet/model.hpp"

namespace ctxrec::catnet {

// Layout (little-endian):
//   8 bytes  "CTXCATNT"
//   u32      format version
//   u64      header length N
//   N bytes  JSON header: {config, loss_curve, metadata, tensors: [{name, rows, cols}]}
//   doubles  every tensor in header order, column-major
inline constexpr char kCheckpointMagic[8] = {'C', 'T', 'X', 'C', 'A', 'T', 'N', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  Parameters params;
  std::vector<double> loss_curve;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Writes to a temporary sibling and renames, so readers never see a partial file.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const Parameters& params,
                     const std::vector<double>& loss_curve = {},
                     const nlohmann::json& metadata = nlohmann::json::object());

[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Raw named tensors of a checkpoint file, without building a model. Used to
/// seed a backbone from converted pretrained weights.
[[nodiscard]] std::map<std::string, Eigen::MatrixXd> read_checkpoint_tensors(const std::filesystem::path& path);

/// Copies every tensor whose name starts with `prefix` into `params`; shapes
/// must match. Returns the number of tensors copied.
std::size_t assign_tensors(Parameters& params, const std::map<std::string, Eigen::MatrixXd>& tensors,
                           const std::string& prefix);

}  // namespace ctxrec::catnet
