#include "glove/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "glove/errors.hpp"

namespace glove {
namespace {

constexpr char kMagic[4] = {'G', 'L', 'V', 'M'};

void put_u32(std::string& out, uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

uint32_t get_u32(std::string_view b, size_t at) {
    return uint32_t(uint8_t(b[at])) | uint32_t(uint8_t(b[at + 1])) << 8 |
           uint32_t(uint8_t(b[at + 2])) << 16 | uint32_t(uint8_t(b[at + 3])) << 24;
}

uint32_t checksum(std::string_view data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    return uint32_t(
        crc32(crc, reinterpret_cast<const Bytef*>(data.data()), uInt(data.size())));
}

}  // namespace

std::string spec_to_json(const ModelSpec& m) {
    nlohmann::json j;
    j["name"] = m.name;
    j["input"] = {m.in_ch, m.in_len};
    auto& layers = j["layers"] = nlohmann::json::array();
    for (const auto& l : m.layers) {
        nlohmann::json lj;
        lj["kind"] = std::string(kind_name(l.kind));
        switch (l.kind) {
            case LayerKind::Conv1D:
                lj["filters"] = l.filters;
                lj["kernel"] = l.kernel;
                break;
            case LayerKind::MaxPool1D:
                lj["pool"] = l.pool;
                lj["stride"] = l.stride;
                break;
            case LayerKind::Dropout:
                lj["rate"] = l.rate;
                break;
            case LayerKind::Dense:
                lj["units"] = l.units;
                break;
            default:
                break;
        }
        layers.push_back(std::move(lj));
    }
    return j.dump();
}

ModelSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelIoError(std::string("bad architecture header: ") + e.what());
    }
    ModelSpec m;
    try {
        m.name = j.at("name").get<std::string>();
        m.in_ch = j.at("input").at(0).get<int>();
        m.in_len = j.at("input").at(1).get<int>();
        for (const auto& lj : j.at("layers")) {
            LayerKind k = kind_from_name(lj.at("kind").get<std::string>());
            switch (k) {
                case LayerKind::Conv1D:
                    m.layers.push_back(LayerSpec::conv1d(
                        lj.at("filters").get<int>(), lj.at("kernel").get<int>()));
                    break;
                case LayerKind::ChannelNorm:
                    m.layers.push_back(LayerSpec::channel_norm());
                    break;
                case LayerKind::BatchNorm:
                    m.layers.push_back(LayerSpec::batch_norm());
                    break;
                case LayerKind::MaxPool1D:
                    m.layers.push_back(LayerSpec::max_pool(
                        lj.at("pool").get<int>(), lj.at("stride").get<int>()));
                    break;
                case LayerKind::Dropout:
                    m.layers.push_back(LayerSpec::dropout(lj.at("rate").get<float>()));
                    break;
                case LayerKind::Flatten:
                    m.layers.push_back(LayerSpec::flatten());
                    break;
                case LayerKind::Dense:
                    m.layers.push_back(LayerSpec::dense(lj.at("units").get<int>()));
                    break;
                case LayerKind::ReLU:
                    m.layers.push_back(LayerSpec::relu());
                    break;
                case LayerKind::Softmax:
                    m.layers.push_back(LayerSpec::softmax());
                    break;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelIoError(std::string("bad architecture header: ") + e.what());
    }
    try {
        shape_chain(m);
    } catch (const Error& e) {
        throw ModelIoError(std::string("architecture does not validate: ") + e.what());
    }
    return m;
}

std::string serialize_model(const ModelSpec& m, const ModelWeights& w) {
    auto chain = shape_chain(m);
    if (w.layers.size() != m.layers.size())
        throw ModelIoError("weights do not match the architecture");
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kModelFormatVersion);
    std::string spec = spec_to_json(m);
    put_u32(out, uint32_t(spec.size()));
    out += spec;
    for (size_t i = 0; i < m.layers.size(); ++i) {
        auto sizes = tensor_sizes(m.layers[i], chain[i]);
        if (w.layers[i].tensors.size() != sizes.size())
            throw ModelIoError("weights do not match the architecture");
        for (size_t t = 0; t < sizes.size(); ++t) {
            const auto& v = w.layers[i].tensors[t];
            if (v.size() != sizes[t])
                throw ModelIoError("weights do not match the architecture");
            for (float f : v) put_u32(out, std::bit_cast<uint32_t>(f));
        }
    }
    put_u32(out, checksum(out));
    return out;
}

std::pair<ModelSpec, ModelWeights> deserialize_model(std::string_view bytes) {
    if (bytes.size() < 16) throw ModelIoError("model file truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw ModelIoError("not a model file (bad magic)");
    uint32_t version = get_u32(bytes, 4);
    if (version != kModelFormatVersion)
        throw ModelIoError("unsupported model format version " +
                           std::to_string(version) + " (expected " +
                           std::to_string(kModelFormatVersion) + ")");
    uint32_t spec_len = get_u32(bytes, 8);
    if (bytes.size() < 12 + size_t(spec_len) + 4)
        throw ModelIoError("model file truncated");
    ModelSpec m = spec_from_json(std::string(bytes.substr(12, spec_len)));

    auto chain = shape_chain(m);
    size_t n_floats = 0;
    for (size_t i = 0; i < m.layers.size(); ++i)
        for (size_t s : tensor_sizes(m.layers[i], chain[i])) n_floats += s;
    const size_t expect = 12 + size_t(spec_len) + 4 * n_floats + 4;
    if (bytes.size() < expect) throw ModelIoError("model file truncated");
    if (bytes.size() > expect)
        throw ModelIoError("model file has trailing bytes");

    uint32_t stored = get_u32(bytes, bytes.size() - 4);
    if (checksum(bytes.substr(0, bytes.size() - 4)) != stored)
        throw ModelIoError("model file checksum mismatch");

    ModelWeights w;
    w.layers.resize(m.layers.size());
    size_t at = 12 + spec_len;
    for (size_t i = 0; i < m.layers.size(); ++i) {
        auto sizes = tensor_sizes(m.layers[i], chain[i]);
        w.layers[i].tensors.resize(sizes.size());
        for (size_t t = 0; t < sizes.size(); ++t) {
            auto& v = w.layers[i].tensors[t];
            v.resize(sizes[t]);
            for (size_t k = 0; k < sizes[t]; ++k, at += 4)
                v[k] = std::bit_cast<float>(get_u32(bytes, at));
        }
    }
    return {std::move(m), std::move(w)};
}

void save_model(const std::filesystem::path& path, const ModelSpec& m,
                const ModelWeights& w) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ModelIoError("cannot open " + path.string() + " for writing");
    std::string bytes = serialize_model(m, w);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw ModelIoError("short write to " + path.string());
}

std::pair<ModelSpec, ModelWeights> load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ModelIoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace glove
