#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mednns/tensor.hpp"

namespace mednns {

// Little-endian binary primitives. All file formats in this project are
// little-endian regardless of host byte order.
void write_u8(std::ostream& out, std::uint8_t v);
void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);

std::uint8_t read_u8(std::istream& in, const std::string& what);
std::uint16_t read_u16(std::istream& in, const std::string& what);
std::uint32_t read_u32(std::istream& in, const std::string& what);
std::uint64_t read_u64(std::istream& in, const std::string& what);
float read_f32(std::istream& in, const std::string& what);

// MNNSW001 tensor container: magic "MNNSW001", u32 tensor count, then per
// tensor u32 rank, u32 dims, f32 payload.
void save_tensors(const std::string& path, const std::vector<const Tensor*>& tensors);
std::vector<Tensor> load_tensors(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::uint64_t file_fingerprint(const std::string& path);

}  // namespace mednns
