//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/model_io.hpp"

#include "edgecnn/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace edgecnn
{

using nlohmann::json;

namespace
{

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* dtype_tag(WeightDtype dtype)
{
    return dtype == WeightDtype::Float32 ? "float32" : "uint8";
}

json layer_to_json(const LayerSpec& layer)
{
    json j;
    j["type"] = layer_type_name(layer);
    std::visit(Overloaded{
                   [&](const Conv2DLayer& l) {
                       j["filters"]   = l.filters;
                       j["kernel"]    = l.kernel;
                       j["trainable"] = l.trainable;
                   },
                   [&](const DepthwiseConv2DLayer& l) {
                       j["kernel"]    = l.kernel;
                       j["trainable"] = l.trainable;
                   },
                   [&](const DenseLayer& l) {
                       j["units"]     = l.units;
                       j["trainable"] = l.trainable;
                   },
                   [&](const AddLayer& l) { j["skip_source"] = l.skip_source; },
                   [](const auto&) {},
               },
               layer);
    return j;
}

LayerSpec layer_from_json(const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    if (type == "conv2d")
    {
        return Conv2DLayer{ j.at("filters").get<int>(), j.at("kernel").get<int>(), j.at("trainable").get<bool>() };
    }
    if (type == "depthwise_conv2d")
    {
        return DepthwiseConv2DLayer{ j.at("kernel").get<int>(), j.at("trainable").get<bool>() };
    }
    if (type == "max_pool")
    {
        return MaxPoolLayer{};
    }
    if (type == "flatten")
    {
        return FlattenLayer{};
    }
    if (type == "dense")
    {
        return DenseLayer{ j.at("units").get<int>(), j.at("trainable").get<bool>() };
    }
    if (type == "relu")
    {
        return ReluLayer{};
    }
    if (type == "softmax")
    {
        return SoftmaxLayer{};
    }
    if (type == "add")
    {
        return AddLayer{ j.at("skip_source").get<int>() };
    }
    throw FormatError("unknown layer type '" + type + "'", kModelPrefixSize);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8)
    {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
    {
        v = (v << 8) | bytes[at + static_cast<std::size_t>(i)];
    }
    return v;
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& values)
{
    for (float f : values)
    {
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
}

LayerSpec without_trainable_flag(LayerSpec layer)
{
    std::visit(Overloaded{ [](Conv2DLayer& l) { l.trainable = true; },
                           [](DepthwiseConv2DLayer& l) { l.trainable = true; },
                           [](DenseLayer& l) { l.trainable = true; }, [](auto&) {} },
               layer);
    return layer;
}

/// The header must be exactly what the builder for its family and hyperparameters would emit
/// (trainable flags aside), so corrupted headers cannot decode into a different valid model.
void check_canonical(const ModelSpec& spec, std::span<const std::uint8_t> header_bytes)
{
    const std::string stored(header_bytes.begin(), header_bytes.end());
    if (encode_header(spec) != stored)
    {
        throw FormatError("header is not in canonical form", kModelPrefixSize);
    }
    ModelSpec built = [&] {
        try
        {
            return build_family(spec.family(), spec.hyper());
        }
        catch (const std::exception& e)
        {
            throw FormatError(std::string("header hyperparameters do not build: ") + e.what(), kModelPrefixSize);
        }
    }();
    bool same = built.id() == spec.id() && built.hyper() == spec.hyper() &&
                built.input_shape() == spec.input_shape() && built.layers().size() == spec.layers().size();
    for (std::size_t i = 0; same && i < built.layers().size(); ++i)
    {
        same = without_trainable_flag(built.layers()[i]) == without_trainable_flag(spec.layers()[i]);
    }
    if (!same)
    {
        throw FormatError("header for " + spec.id() + " does not match its family builder", kModelPrefixSize);
    }
}

}    // namespace

std::string encode_header(const ModelSpec& spec, WeightDtype dtype)
{
    json j;
    j["id"]     = spec.id();
    j["family"] = to_string(spec.family());
    j["hyper"]  = {
        { "blocks", spec.hyper().blocks },   { "filters", spec.hyper().filters }, { "image", spec.hyper().image },
        { "outputs", spec.hyper().outputs }, { "alpha", spec.hyper().alpha },
    };
    j["input_shape"] = spec.input_shape().dims();
    j["layers"]      = json::array();
    for (const LayerSpec& l : spec.layers())
    {
        j["layers"].push_back(layer_to_json(l));
    }
    j["dtype"] = dtype_tag(dtype);
    return j.dump();
}

SizeEstimate estimate_size(const ModelSpec& spec)
{
    SizeEstimate s;
    s.params         = count_parameters(spec);
    s.file_bytes_f32 = static_cast<std::int64_t>(kModelPrefixSize + encode_header(spec, WeightDtype::Float32).size()) +
                       4 * s.params;
    s.file_bytes_u8 =
        static_cast<std::int64_t>(kModelPrefixSize + encode_header(spec, WeightDtype::Uint8).size()) + s.params;
    return s;
}

std::vector<std::uint8_t> serialize(const ModelSpec& spec)
{
    if (!spec.has_weights())
    {
        throw ParameterError("model " + spec.id() + " has no weights to serialize");
    }
    const std::string header = encode_header(spec);
    try
    {
        check_canonical(spec, std::span(reinterpret_cast<const std::uint8_t*>(header.data()), header.size()));
    }
    catch (const FormatError& e)
    {
        throw ParameterError(std::string("only family-built models can be stored: ") + e.what());
    }
    std::vector<std::uint8_t> out;
    out.reserve(kModelPrefixSize + header.size() + 4 * static_cast<std::size_t>(count_parameters(spec)));
    out.insert(out.end(), std::begin(kModelMagic), std::end(kModelMagic));
    put_u16(out, kModelVersion);
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out.insert(out.end(), header.begin(), header.end());
    for (const LayerWeights& w : spec.weights())
    {
        put_floats(out, w.kernel);
        put_floats(out, w.bias);
    }
    return out;
}

ModelSpec deserialize(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kModelPrefixSize)
    {
        throw FormatError("file too short for model preamble", bytes.size());
    }
    if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0)
    {
        throw FormatError("bad magic, expected CNNM", 0);
    }
    const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kModelVersion)
    {
        throw FormatError("unsupported model format version " + std::to_string(version), 4);
    }
    const std::uint32_t header_len = get_u32(bytes, 6);
    if (header_len > bytes.size() - kModelPrefixSize)
    {
        throw FormatError("header length " + std::to_string(header_len) + " runs past end of file", 6);
    }

    const auto header_bytes = bytes.subspan(kModelPrefixSize, header_len);
    json j;
    try
    {
        j = json::parse(header_bytes.begin(), header_bytes.end());
    }
    catch (const json::parse_error& e)
    {
        throw FormatError(std::string("malformed JSON header: ") + e.what(), kModelPrefixSize + e.byte);
    }

    std::optional<ModelSpec> spec;
    try
    {
        if (j.at("dtype").get<std::string>() != dtype_tag(WeightDtype::Float32))
        {
            throw FormatError("unsupported weight dtype '" + j.at("dtype").get<std::string>() + "'",
                              kModelPrefixSize);
        }
        const json& hj = j.at("hyper");
        HyperParams h;
        h.blocks  = hj.at("blocks").get<int>();
        h.filters = hj.at("filters").get<int>();
        h.image   = hj.at("image").get<int>();
        h.outputs = hj.at("outputs").get<int>();
        h.alpha   = hj.at("alpha").get<double>();

        std::vector<LayerSpec> layers;
        for (const json& lj : j.at("layers"))
        {
            layers.push_back(layer_from_json(lj));
        }
        spec.emplace(j.at("id").get<std::string>(), parse_family(j.at("family").get<std::string>()), h,
                     Shape(j.at("input_shape").get<std::vector<int>>()), std::move(layers));
    }
    catch (const FormatError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        throw FormatError(std::string("invalid model header: ") + e.what(), kModelPrefixSize);
    }
    check_canonical(*spec, header_bytes);

    std::size_t at          = kModelPrefixSize + header_len;
    const std::size_t need  = 4 * static_cast<std::size_t>(count_parameters(*spec));
    const std::size_t avail = bytes.size() - at;
    if (avail < need)
    {
        throw FormatError("truncated weight blob: need " + std::to_string(need) + " bytes, have " +
                              std::to_string(avail),
                          bytes.size());
    }
    if (avail > need)
    {
        throw FormatError(std::to_string(avail - need) + " trailing bytes after weight blob", at + need);
    }

    auto take = [&](std::size_t n) {
        std::vector<float> v(n);
        for (std::size_t k = 0; k < n; ++k, at += 4)
        {
            v[k] = std::bit_cast<float>(get_u32(bytes, at));
        }
        return v;
    };
    std::vector<LayerWeights> weights;
    weights.reserve(spec->layers().size());
    for (const WeightLayout& wl : spec->weight_layout())
    {
        LayerWeights w;
        w.kernel = take(wl.kernel);
        w.bias   = take(wl.bias);
        weights.push_back(std::move(w));
    }
    spec->set_weights(std::move(weights));
    return std::move(*spec);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
    {
        throw IoError("read failed for " + path.string());
    }
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

void save_model(const ModelSpec& spec, const std::filesystem::path& path)
{
    write_file_bytes(path, serialize(spec));
}

ModelSpec load_model(const std::filesystem::path& path)
{
    return deserialize(read_file_bytes(path));
}

}    // namespace edgecnn
