#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advsim/types.hpp"

namespace advsim {

/// "000042" for tick 42.
std::string tick_stem(std::size_t tick);

/// x, y, z, intensity as little-endian float32; intensity is always 0.
std::vector<unsigned char> encode_cloud(const PointCloud& cloud);
/// Throws FormatError (naming `source`) unless the size is a multiple of 16.
PointCloud decode_cloud(const std::vector<unsigned char>& bytes, const std::filesystem::path& source = {});

nlohmann::ordered_json labels_to_json(const FrameRecord& record);
FrameRecord labels_from_json(const nlohmann::json& j);

/// Writes <tick>.bin and <tick>.json into an existing directory.
void export_frame(const FrameRecord& record, const std::filesystem::path& dir);

/// Inverse of export_frame; coordinates come back at float32 precision.
FrameRecord load_frame(const std::filesystem::path& dir, std::size_t tick);

/// Ticks that have a cloud file in `dir`, ascending.
std::vector<std::size_t> list_frame_ticks(const std::filesystem::path& dir);

void write_metadata(const std::filesystem::path& dir, const nlohmann::ordered_json& metadata);
/// Throws IoError when metadata.json is absent.
nlohmann::json read_metadata(const std::filesystem::path& dir);

/// Writes bytes to a file, throwing IoError on failure.
void write_file(const std::filesystem::path& file, const std::string& bytes);
std::string read_file(const std::filesystem::path& file);

}  // namespace advsim
