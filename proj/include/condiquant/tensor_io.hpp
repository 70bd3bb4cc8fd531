#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "condiquant/matrix.hpp"

namespace cq {

/// Named matrices in container order.
using NamedMatrices = std::vector<std::pair<std::string, Matrix>>;

/// CQTENSOR v1: 8-byte magic "CQTENSOR", u16 LE version (1), u32 LE entry
/// count, then per entry u16 LE name length, UTF-8 name, u32 LE rows,
/// u32 LE cols, and rows*cols IEEE-754 doubles in little-endian row-major
/// order. Names must be unique and trailing bytes are rejected.
std::vector<std::uint8_t> encode_container(const NamedMatrices& matrices);
NamedMatrices decode_container(const std::vector<std::uint8_t>& bytes);

void write_container(const std::filesystem::path& path, const NamedMatrices& matrices);
NamedMatrices read_container(const std::filesystem::path& path);

}  // namespace cq
