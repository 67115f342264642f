#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "glove/nn.hpp"

namespace glove {

// Model container layout (little-endian):
//   [0..4)    magic "GLVM"
//   [4..8)    u32 format version (currently 1)
//   [8..12)   u32 length S of the JSON architecture header
//   [12..12+S) architecture JSON (canonical: sorted keys, no whitespace)
//   ...       raw float32 weight tensors, in layer order, each layer's
//             tensors in slot order (sizes derived from the header)
//   [-4..)    u32 CRC-32 (zlib polynomial) over everything before it
inline constexpr uint32_t kModelFormatVersion = 1;

std::string spec_to_json(const ModelSpec& m);
ModelSpec spec_from_json(const std::string& text);

std::string serialize_model(const ModelSpec& m, const ModelWeights& w);
std::pair<ModelSpec, ModelWeights> deserialize_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const ModelSpec& m,
                const ModelWeights& w);
std::pair<ModelSpec, ModelWeights> load_model(const std::filesystem::path& path);

}  // namespace glove
