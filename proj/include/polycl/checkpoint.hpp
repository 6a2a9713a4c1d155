//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_CHECKPOINT_HPP_
#define POLYCL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "polycl/encoder.hpp"

namespace polycl {

// Binary layout, all integers and floats little-endian:
//
//   "PCLCKPT\0"                       8-byte magic
//   u32 version                        currently 1
//   u32 vocab_size, d_model, n_layers, n_heads, d_feedforward, max_len,
//       projector_out
//   f64 dropout_ratio
//   u32 tensor count
//   per tensor, in EncoderParams::tensors() order:
//     u32 rows, u32 cols, rows*cols f64 in row-major order
//   u32 CRC-32 of every preceding byte
//
// See docs/checkpoint.md.
std::string serialize_checkpoint(const EncoderParams &params);

// Throws CheckpointError on bad magic, version, shape, or checksum.
EncoderParams deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const EncoderParams &params,
                     const std::filesystem::path &path);

EncoderParams load_checkpoint(const std::filesystem::path &path);

// CRC-32 over the serialized form; used to verify that frozen encoders stay
// untouched.
std::uint32_t parameter_checksum(const EncoderParams &params);

}  // namespace polycl

#endif  // POLYCL_CHECKPOINT_HPP_
