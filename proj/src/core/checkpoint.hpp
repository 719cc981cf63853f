#pragma once

#include <string>

#include "nn.hpp"

namespace fgsmbench {

// Checkpoint container, little-endian throughout:
//   "FGSMBNCH"                  8-byte magic
//   u32 format version (1)
//   u32 channels, height, width
//   u32 layer count, then per layer a u32 kind tag plus its u32 fields
//     0 conv    {in, out, kernel}
//     1 relu    {}
//     2 maxpool {window}
//     3 flatten {}
//     4 fc      {in, out}
//   per layer: u64 weight count + raw f64 bits, u64 bias count + raw f64 bits
// load(save(m)) reproduces every parameter bit for bit.

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

} // namespace fgsmbench
