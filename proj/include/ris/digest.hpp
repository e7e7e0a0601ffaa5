// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace ris {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);
std::array<std::uint8_t, 32> sha256(std::string_view text);

/// CRC-32C (Castagnoli), reflected, init/xorout 0xFFFFFFFF.
std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

}  // namespace ris
