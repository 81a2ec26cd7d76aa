#pragma once

#include <string>
#include <vector>

#include "fcgrad/agent/update.hpp"

namespace fcg::agent {

// Binary layout, all integers and doubles little-endian:
//   magic    8 bytes  "FCGCKPT1"
//   version  u32      kCheckpointVersion
//   tag      u32 length + bytes   free-form run description
//   agents   u32
//   per agent:
//     obs_dim, hidden, actions   u64 each
//     layout_hash                u64 (NetShape::layout_hash)
//     policy_params              f64 x policy_size
//     value_params               f64 x value_size
//     policy Adam: t u64, m f64 x policy_size, v f64 x policy_size
//     value Adam:  t u64, m f64 x value_size,  v f64 x value_size
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string tag;
  std::vector<AgentState> agents;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
// Throws Error(Io) on I/O failure or a malformed file, Error(Config) when the
// stored layout hash does not match its dimensions.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fcg::agent
