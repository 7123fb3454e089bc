#pragma once

#include "dcqn/dcn.hpp"
#include "dcqn/iqn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace dcqn {

// Binary layout, all integers and reals little-endian:
//   "DCQN" | u32 version | u32 kind | u64 features | u64 horizon
//   backbone: u64 layers, channels, kernel_size, then one u64 dilation per layer
//   extras: u32 count, then (string key, u64 value) pairs
//   feature stats: u64 n, n f64 means, n f64 standard deviations
//   tensors: u64 count, then per tensor: string name, u32 rank, rank u64 dims, f64 values
// Strings are a u32 byte length followed by the bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint32_t { Iqn = 1, Dcn = 2 };

std::string to_string(ModelKind kind);

std::string encode_checkpoint(const QuantileModel& model);
std::string encode_checkpoint(const CorrelationModel& model);

// Throw FormatError on a bad magic, a version other than
// kCheckpointVersion, a different model kind or truncated content.
QuantileModel decode_iqn_checkpoint(std::string_view bytes);
CorrelationModel decode_dcn_checkpoint(std::string_view bytes);

ModelKind checkpoint_kind(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const QuantileModel& model);
void save_checkpoint(const std::filesystem::path& path, const CorrelationModel& model);
QuantileModel load_iqn_checkpoint(const std::filesystem::path& path);
CorrelationModel load_dcn_checkpoint(const std::filesystem::path& path);

}  // namespace dcqn
