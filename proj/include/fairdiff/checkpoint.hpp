#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fairdiff/net.hpp"

namespace fairdiff::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary model snapshot. Parameters are stored as 32-bit reals in named
/// blocks; the config snapshot rebuilds the architecture on load.
///
/// File layout (little-endian):
///   magic "A2GD" | u32 version | u64 config bytes | config (key=value lines)
///   | u32 epoch | u64 n | n x f32 validation history
///   | u32 block count | blocks: u32 name len, name, u64 rows, u64 cols, f32 data
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::map<std::string, std::string> config;
  std::uint32_t epoch = 0;
  std::vector<float> val_history;

  struct Block {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<float> data;

    bool operator==(const Block&) const = default;
  };
  std::vector<Block> blocks;

  bool operator==(const Checkpoint&) const = default;

  const Block* find(const std::string& name) const;

  /// Appends one block per layer parameter under `prefix` (f64 -> f32).
  void add_net(const std::string& prefix, const num::DenseNet& net);

  /// Rebuilds a net whose architecture matches `like` from blocks under
  /// `prefix`. Throws IncompatError on missing blocks or shape mismatch.
  num::DenseNet extract_net(const std::string& prefix, const num::DenseNet& like) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws IncompatError on bad magic, version mismatch (naming both
/// versions), or truncation. No partial state escapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fairdiff::train
