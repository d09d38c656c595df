//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/generator.hpp"

#include "edgecnn/errors.hpp"
#include "edgecnn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace edgecnn
{

using nlohmann::json;

void Range::validate(const char* name) const
{
    if (increment <= 0)
    {
        throw ParameterError(std::string(name) + ": increment must be positive");
    }
    if (start > end)
    {
        throw ParameterError(std::string(name) + ": start must not exceed end");
    }
    if (start <= 0)
    {
        throw ParameterError(std::string(name) + ": values must be positive");
    }
}

std::vector<int> Range::values() const
{
    std::vector<int> v;
    for (int x = start; x <= end; x += increment)
    {
        v.push_back(x);
    }
    return v;
}

void Grid::validate() const
{
    blocks.validate("blocks");
    image.validate("image");
    outputs.validate("outputs");
    if (filters)
    {
        filters->validate("filters");
    }
    if (family == Family::Conv2D && !filters)
    {
        throw ParameterError("conv2d grid needs a filters range");
    }
    if (family != Family::Conv2D && family != Family::Depthwise)
    {
        throw ParameterError("grids are defined for the conv2d and depthwise families only");
    }
}

Grid Grid::builtin_conv2d()
{
    return Grid{ Family::Conv2D, { 2, 6, 1 }, Range{ 34, 42, 4 }, { 16, 224, 52 }, { 2, 10, 4 } };
}

Grid Grid::builtin_depthwise()
{
    return Grid{ Family::Depthwise, { 1, 5, 1 }, std::nullopt, { 64, 224, 32 }, { 2, 82, 16 } };
}

namespace
{

Range range_from_json(const json& j)
{
    return Range{ j.at("start").get<int>(), j.at("end").get<int>(), j.at("increment").get<int>() };
}

json parse_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw FormatError(path.string() + ": " + e.what(), e.byte);
    }
}

}    // namespace

Grid load_grid(const std::filesystem::path& path)
{
    const json j = parse_json_file(path);
    Grid g;
    try
    {
        g.family  = parse_family(j.at("family").get<std::string>());
        g.blocks  = range_from_json(j.at("blocks"));
        g.image   = range_from_json(j.at("image"));
        g.outputs = range_from_json(j.at("outputs"));
        if (j.contains("filters"))
        {
            g.filters = range_from_json(j.at("filters"));
        }
    }
    catch (const json::exception& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
    g.validate();
    return g;
}

std::vector<HyperParams> enumerate_grid(const Grid& grid)
{
    grid.validate();
    const std::vector<int> filters = grid.filters ? grid.filters->values() : std::vector<int>{ 0 };
    std::vector<HyperParams> out;
    for (int b : grid.blocks.values())
    {
        for (int f : filters)
        {
            for (int i : grid.image.values())
            {
                for (int o : grid.outputs.values())
                {
                    out.push_back(HyperParams{ b, f, i, o });
                }
            }
        }
    }
    return out;
}

void DeviceProfile::validate() const
{
    if (max_file_bytes <= 0 || max_input_edge <= 0 || min_feature_edge <= 0)
    {
        throw ParameterError("device profile '" + name + "': all limits must be positive");
    }
}

bool DeviceProfile::supports(Family family) const
{
    return supported_families.empty() ||
           std::find(supported_families.begin(), supported_families.end(), family) != supported_families.end();
}

DeviceProfile DeviceProfile::sipeed_like()
{
    const auto cap = static_cast<std::int64_t>(std::floor(5.9 * 1024.0 * 1024.0));
    return DeviceProfile{ "sipeed-like", cap, 224, 4, { Family::Conv2D, Family::Depthwise, Family::MobileNetLike } };
}

DeviceProfile DeviceProfile::unconstrained()
{
    return DeviceProfile{ "unconstrained", std::numeric_limits<std::int64_t>::max(),
                          std::numeric_limits<int>::max(), 1, {} };
}

DeviceProfile load_profile(const std::filesystem::path& path)
{
    const json j = parse_json_file(path);
    DeviceProfile p;
    try
    {
        p.name             = j.at("name").get<std::string>();
        p.max_file_bytes   = j.at("max_file_bytes").get<std::int64_t>();
        p.max_input_edge   = j.at("max_input_edge").get<int>();
        p.min_feature_edge = j.at("min_feature_edge").get<int>();
        if (j.contains("supported_families"))
        {
            for (const auto& f : j.at("supported_families"))
            {
                p.supported_families.push_back(parse_family(f.get<std::string>()));
            }
        }
    }
    catch (const json::exception& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
    p.validate();
    return p;
}

DeviceProfile resolve_profile(const std::string& name_or_path)
{
    if (name_or_path == "sipeed-like")
    {
        return DeviceProfile::sipeed_like();
    }
    if (name_or_path == "unconstrained")
    {
        return DeviceProfile::unconstrained();
    }
    return load_profile(name_or_path);
}

FeasibilityReport check_feasible(const HyperParams& h, const DeviceProfile& profile,
                                 const std::optional<SizeEstimate>& size)
{
    h.validate();
    FeasibilityReport r;
    r.hyper = h;

    const int edge = final_feature_edge(h.image, h.blocks);
    if (edge < profile.min_feature_edge)
    {
        r.violations.push_back({ kFinalFeatureEdge, edge, profile.min_feature_edge });
    }
    if (h.image > profile.max_input_edge)
    {
        r.violations.push_back({ kInputEdge, h.image, profile.max_input_edge });
    }
    if (size && size->file_bytes_f32 > profile.max_file_bytes)
    {
        r.violations.push_back({ kFileBytes, size->file_bytes_f32, profile.max_file_bytes });
    }
    r.feasible = r.violations.empty();
    return r;
}

void initialize_weights(ModelSpec& spec, std::uint64_t seed)
{
    const std::uint64_t model_seed = mix_seed(seed, fnv1a(spec.id()));
    std::vector<LayerWeights> weights(spec.layers().size());
    for (std::size_t i = 0; i < spec.layers().size(); ++i)
    {
        const WeightLayout& wl = spec.weight_layout()[i];
        if (wl.kernel == 0)
        {
            continue;
        }
        // kernel / bias is k*k*cin for conv, k*k for depthwise and n for dense.
        const double fan_in = static_cast<double>(wl.kernel) / static_cast<double>(wl.bias);
        const double bound  = std::sqrt(6.0 / fan_in);

        SplitMix64 rng(mix_seed(model_seed, i));
        weights[i].kernel.resize(wl.kernel);
        for (float& v : weights[i].kernel)
        {
            v = static_cast<float>(rng.uniform(-bound, bound));
        }
        weights[i].bias.assign(wl.bias, 0.0f);
    }
    spec.set_weights(std::move(weights));
}

std::string format_violations(const std::vector<Violation>& violations)
{
    std::ostringstream os;
    for (std::size_t k = 0; k < violations.size(); ++k)
    {
        const Violation& v = violations[k];
        const char* op     = v.constraint == kFinalFeatureEdge ? "<" : ">";
        os << (k ? ";" : "") << v.constraint << ':' << v.actual << op << v.limit;
    }
    return os.str();
}

void write_manifest_csv(const std::vector<ManifestRow>& rows, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "id,family,blocks,filters,image,outputs,params,file_bytes,feasible,violations\n";
    for (const ManifestRow& r : rows)
    {
        out << r.id << ',' << to_string(r.family) << ',' << r.hyper.blocks << ',';
        if (r.hyper.filters > 0)
        {
            out << r.hyper.filters;
        }
        out << ',' << r.hyper.image << ',' << r.hyper.outputs << ',';
        if (r.params)
        {
            out << *r.params;
        }
        out << ',';
        if (r.file_bytes)
        {
            out << *r.file_bytes;
        }
        out << ',' << (r.feasible ? "true" : "false") << ',' << format_violations(r.violations) << '\n';
    }
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

SuiteManifest generate_suite(const Grid& grid, const DeviceProfile& profile, std::uint64_t seed,
                             const std::filesystem::path& out_dir)
{
    profile.validate();
    if (!profile.supports(grid.family))
    {
        throw ParameterError("profile '" + profile.name + "' does not support family " + to_string(grid.family));
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
    {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }

    SuiteManifest manifest;
    manifest.manifest_path = out_dir / "manifest.csv";
    std::set<std::string> seen;

    try
    {
        for (const HyperParams& h : enumerate_grid(grid))
        {
            ManifestRow row;
            row.family = grid.family;
            row.hyper  = h;
            row.id     = model_id(grid.family, h);
            if (!seen.insert(row.id).second)
            {
                throw std::logic_error("duplicate model id " + row.id);
            }

            std::optional<ModelSpec> spec;
            std::optional<SizeEstimate> size;
            try
            {
                spec.emplace(build_family(grid.family, h));
                size = estimate_size(*spec);
                row.params     = size->params;
                row.file_bytes = size->file_bytes_f32;
            }
            catch (const InfeasibleArchitectureError&)
            {
                // Reported through the final-feature-edge clause below.
            }

            const FeasibilityReport report = check_feasible(h, profile, size);
            row.feasible                   = report.feasible && spec.has_value();
            row.violations                 = report.violations;

            if (row.feasible)
            {
                initialize_weights(*spec, seed);
                row.file = out_dir / (row.id + ".cnnm");
                save_model(*spec, row.file);
                ++manifest.feasible_count;
            }
            manifest.rows.push_back(std::move(row));
        }
    }
    catch (const IoError& e)
    {
        std::sort(manifest.rows.begin(), manifest.rows.end(),
                  [](const ManifestRow& a, const ManifestRow& b) { return a.id < b.id; });
        const auto partial = out_dir / "manifest.partial.csv";
        try
        {
            write_manifest_csv(manifest.rows, partial);
        }
        catch (const IoError&)
        {
        }
        throw IoError(std::string(e.what()) + "; generation aborted, partial manifest at " + partial.string());
    }

    std::sort(manifest.rows.begin(), manifest.rows.end(),
              [](const ManifestRow& a, const ManifestRow& b) { return a.id < b.id; });
    write_manifest_csv(manifest.rows, manifest.manifest_path);
    return manifest;
}

}    // namespace edgecnn
