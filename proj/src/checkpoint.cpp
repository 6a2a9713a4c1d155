//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#include "polycl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "polycl/errors.hpp"

namespace polycl {
namespace {

constexpr char kMagic[8] = { 'P', 'C', 'L', 'C', 'K', 'P', 'T', '\0' };
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string &out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t crc(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

class Reader {
public:
  explicit Reader(std::string_view bytes): bytes_(bytes) { }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw CheckpointError("checkpoint truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const EncoderParams &params) {
  const EncoderConfig &c = params.config;
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  for (int v: { c.vocab_size, c.d_model, c.n_layers, c.n_heads,
                c.d_feedforward, c.max_len, c.projector_out })
    put_u32(out, static_cast<std::uint32_t>(v));
  put_f64(out, c.dropout_ratio);

  const auto ts = params.tensors();
  put_u32(out, static_cast<std::uint32_t>(ts.size()));
  for (const Matrix *t: ts) {
    put_u32(out, static_cast<std::uint32_t>(t->rows()));
    put_u32(out, static_cast<std::uint32_t>(t->cols()));
    for (Eigen::Index r = 0; r < t->rows(); ++r)
      for (Eigen::Index col = 0; col < t->cols(); ++col)
        put_f64(out, (*t)(r, col));
  }
  put_u32(out, crc(out));
  return out;
}

EncoderParams deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 4)
    throw CheckpointError("checkpoint truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.u32() != crc(body))
    throw CheckpointError("checkpoint checksum mismatch");

  Reader in(body);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic)))
    throw CheckpointError("not a checkpoint file (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version "
                          + std::to_string(version));

  EncoderConfig c;
  c.vocab_size = static_cast<int>(in.u32());
  c.d_model = static_cast<int>(in.u32());
  c.n_layers = static_cast<int>(in.u32());
  c.n_heads = static_cast<int>(in.u32());
  c.d_feedforward = static_cast<int>(in.u32());
  c.max_len = static_cast<int>(in.u32());
  c.projector_out = static_cast<int>(in.u32());
  c.dropout_ratio = in.f64();
  try {
    c.validate();
  } catch (const ConfigError &e) {
    throw CheckpointError(std::string("invalid config in checkpoint: ")
                          + e.what());
  }

  EncoderParams p = EncoderParams::init(c, 0);
  auto ts = p.tensors();
  if (in.u32() != ts.size())
    throw CheckpointError("checkpoint tensor count does not match its config");
  for (Matrix *t: ts) {
    const auto rows = in.u32();
    const auto cols = in.u32();
    if (rows != t->rows() || cols != t->cols())
      throw CheckpointError("checkpoint tensor shape does not match its config");
    for (Eigen::Index r = 0; r < t->rows(); ++r)
      for (Eigen::Index col = 0; col < t->cols(); ++col)
        (*t)(r, col) = in.f64();
  }
  if (in.remaining() != 0)
    throw CheckpointError("trailing bytes in checkpoint");
  return p;
}

void save_checkpoint(const EncoderParams &params,
                     const std::filesystem::path &path) {
  const std::string bytes = serialize_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw CheckpointError("failed writing checkpoint " + path.string());
}

EncoderParams load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError &e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

std::uint32_t parameter_checksum(const EncoderParams &params) {
  return crc(serialize_checkpoint(params));
}

}  // namespace polycl
