#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::pcio {

// Little-endian container: "PCB1", u32 record count, then per record u32 N,
// u32 class label (0xFFFFFFFF when absent), u8 has_parts, N*3 f32 positions
// and, when has_parts is 1, N u32 part labels. Positions are stored as f32.

std::string encode_pcb(const Dataset& dataset);
/// Throws FormatError with the byte offset of the first bad field.
Dataset decode_pcb(std::string_view bytes);

void write_pcb(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_pcb(const std::filesystem::path& path);

}  // namespace pcattn::pcio
