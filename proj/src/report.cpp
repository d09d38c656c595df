//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/report.hpp"

#include "edgecnn/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace edgecnn
{

GroupBy parse_group_by(const std::string& name)
{
    if (name == "blocks")
    {
        return GroupBy::Blocks;
    }
    if (name == "filters")
    {
        return GroupBy::Filters;
    }
    if (name == "image")
    {
        return GroupBy::Image;
    }
    if (name == "outputs")
    {
        return GroupBy::Outputs;
    }
    if (name == "params")
    {
        return GroupBy::Params;
    }
    throw ParameterError("unknown group-by column '" + name + "'");
}

std::string to_string(GroupBy g)
{
    switch (g)
    {
        case GroupBy::Blocks:
            return "blocks";
        case GroupBy::Filters:
            return "filters";
        case GroupBy::Image:
            return "image";
        case GroupBy::Outputs:
            return "outputs";
        case GroupBy::Params:
            return "params";
    }
    return "params";
}

std::string format_exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ReportRow to_report_row(const BenchmarkResult& r)
{
    ReportRow row;
    row.model_id = r.model_id;
    row.family   = to_string(r.family);
    row.blocks   = r.hyper.blocks;
    if (r.hyper.filters > 0)
    {
        row.filters = r.hyper.filters;
    }
    row.image          = r.hyper.image;
    row.outputs        = r.hyper.outputs;
    row.params         = r.params;
    row.file_bytes     = r.file_bytes;
    row.runs           = static_cast<int>(r.samples.size());
    row.warmup         = r.config.warmup_runs;
    row.latency_p95_ms = r.latency_p95_ms;
    row.throughput_fps = r.throughput_fps;
    row.host_tag       = r.config.host_tag;
    return row;
}

namespace
{

std::optional<double> group_value(const ReportRow& r, GroupBy g)
{
    auto as_double = [](const auto& opt) -> std::optional<double> {
        if (opt)
        {
            return static_cast<double>(*opt);
        }
        return std::nullopt;
    };
    switch (g)
    {
        case GroupBy::Blocks:
            return as_double(r.blocks);
        case GroupBy::Filters:
            return as_double(r.filters);
        case GroupBy::Image:
            return as_double(r.image);
        case GroupBy::Outputs:
            return as_double(r.outputs);
        case GroupBy::Params:
            return as_double(r.params);
    }
    return std::nullopt;
}

template <class T>
std::string opt_str(const std::optional<T>& v)
{
    return v ? std::to_string(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ','))
    {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',')
    {
        fields.emplace_back();
    }
    return fields;
}

std::ifstream open_csv(const std::filesystem::path& path, const std::string& expected_header)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r')
    {
        header.pop_back();
    }
    if (header != expected_header)
    {
        throw FormatError(path.string() + ": unexpected header '" + header + "'", 0);
    }
    return in;
}

template <class T>
T parse_number(const std::string& text, const std::filesystem::path& path, int line, const char* column)
{
    try
    {
        std::size_t used = 0;
        T value{};
        if constexpr (std::is_same_v<T, double>)
        {
            value = std::stod(text, &used);
        }
        else if constexpr (std::is_same_v<T, std::int64_t>)
        {
            value = std::stoll(text, &used);
        }
        else
        {
            value = std::stoi(text, &used);
        }
        if (used != text.size())
        {
            throw std::invalid_argument("trailing characters");
        }
        return value;
    }
    catch (const std::exception&)
    {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": bad " + column + " value '" + text + "'");
    }
}

template <class T>
std::optional<T> parse_optional(const std::string& text, const std::filesystem::path& path, int line,
                                const char* column)
{
    if (text.empty())
    {
        return std::nullopt;
    }
    return parse_number<T>(text, path, line, column);
}

}    // namespace

void write_report_csv(std::vector<ReportRow> rows, const std::filesystem::path& path, GroupBy group_by)
{
    std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) {
        const auto ga = group_value(a, group_by);
        const auto gb = group_value(b, group_by);
        if (ga.has_value() != gb.has_value())
        {
            return ga.has_value();
        }
        if (ga && *ga != *gb)
        {
            return *ga < *gb;
        }
        if (a.host_tag != b.host_tag)
        {
            return a.host_tag < b.host_tag;
        }
        return a.model_id < b.model_id;
    });

    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << kReportHeader << '\n';
    for (const ReportRow& r : rows)
    {
        out << r.model_id << ',' << r.family << ',' << opt_str(r.blocks) << ',' << opt_str(r.filters) << ','
            << opt_str(r.image) << ',' << opt_str(r.outputs) << ',' << opt_str(r.params) << ','
            << opt_str(r.file_bytes) << ',' << r.runs << ',' << r.warmup << ',' << format_exact(r.latency_p95_ms)
            << ',' << format_exact(r.throughput_fps) << ',' << r.host_tag << '\n';
    }
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path)
{
    std::ifstream in = open_csv(path, kReportHeader);
    std::vector<ReportRow> rows;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 13)
        {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 13 columns, got " +
                              std::to_string(f.size()));
        }
        ReportRow r;
        r.model_id       = f[0];
        r.family         = f[1];
        r.blocks         = parse_optional<int>(f[2], path, line_no, "blocks");
        r.filters        = parse_optional<int>(f[3], path, line_no, "filters");
        r.image          = parse_optional<int>(f[4], path, line_no, "image");
        r.outputs        = parse_optional<int>(f[5], path, line_no, "outputs");
        r.params         = parse_optional<std::int64_t>(f[6], path, line_no, "params");
        r.file_bytes     = parse_optional<std::int64_t>(f[7], path, line_no, "file_bytes");
        r.runs           = parse_number<int>(f[8], path, line_no, "runs");
        r.warmup         = parse_number<int>(f[9], path, line_no, "warmup");
        r.latency_p95_ms = parse_number<double>(f[10], path, line_no, "latency_p95_ms");
        r.throughput_fps = parse_number<double>(f[11], path, line_no, "throughput_fps");
        r.host_tag       = f[12];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_samples_csv(const std::vector<BenchmarkResult>& results, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << kSamplesHeader << '\n';
    for (const BenchmarkResult& r : results)
    {
        for (std::size_t i = 0; i < r.samples.size(); ++i)
        {
            out << r.model_id << ',' << i << ',' << format_exact(r.samples[i]) << '\n';
        }
    }
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

std::map<std::string, std::vector<double>> read_samples_csv(const std::filesystem::path& path)
{
    std::ifstream in = open_csv(path, kSamplesHeader);
    std::map<std::string, std::vector<double>> samples;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 3)
        {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
        }
        auto& series    = samples[f[0]];
        const int index = parse_number<int>(f[1], path, line_no, "run_index");
        if (index != static_cast<int>(series.size()))
        {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": run_index out of sequence");
        }
        series.push_back(parse_number<double>(f[2], path, line_no, "ms"));
    }
    return samples;
}

std::filesystem::path samples_path_for(const std::filesystem::path& report_path)
{
    std::filesystem::path p = report_path;
    p.replace_extension();
    return p.string() + ".samples.csv";
}

void write_report(const std::vector<BenchmarkResult>& results, const std::filesystem::path& path,
                  GroupBy group_by)
{
    if (results.empty())
    {
        throw ParameterError("no benchmark results to report");
    }
    std::vector<ReportRow> rows;
    rows.reserve(results.size());
    for (const auto& r : results)
    {
        rows.push_back(to_report_row(r));
    }
    write_report_csv(std::move(rows), path, group_by);
    write_samples_csv(results, samples_path_for(path));
}

Histogram params_histogram(const std::vector<std::int64_t>& params, int per_decade)
{
    Histogram h;
    if (params.empty())
    {
        return h;
    }
    if (per_decade <= 0)
    {
        throw ParameterError("per_decade must be positive");
    }
    const auto [mn, mx] = std::minmax_element(params.begin(), params.end());
    if (*mn <= 0)
    {
        throw ParameterError("parameter counts must be positive");
    }
    const double lo = std::floor(std::log10(static_cast<double>(*mn)));
    double hi       = std::ceil(std::log10(static_cast<double>(*mx)));
    if (hi <= lo)
    {
        hi = lo + 1.0;
    }
    const int buckets = static_cast<int>(std::lround((hi - lo) * per_decade));
    for (int k = 0; k <= buckets; ++k)
    {
        h.edges.push_back(std::pow(10.0, lo + static_cast<double>(k) / per_decade));
    }
    h.counts.assign(static_cast<std::size_t>(buckets), 0);
    for (std::int64_t p : params)
    {
        const double pos = (std::log10(static_cast<double>(p)) - lo) * per_decade;
        auto idx         = static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(pos)), 0, buckets - 1));
        ++h.counts[idx];
    }
    return h;
}

namespace
{

constexpr std::array<const char*, 6> kPalette = { "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b" };
constexpr double kWidth  = 640;
constexpr double kHeight = 420;
constexpr double kLeft   = 70;
constexpr double kRight  = 20;
constexpr double kTop    = 30;
constexpr double kBottom = 50;

struct Axis
{
    double lo;
    double hi;
    bool log;

    double map(double v, double from, double to) const
    {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double x = log ? std::log10(v) : v;
        return b == a ? (from + to) / 2 : from + (x - a) / (b - a) * (to - from);
    }
};

Axis make_axis(const std::vector<double>& values, bool log)
{
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn;
    double hi = *mx;
    if (!log)
    {
        const double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
        lo = std::max(0.0, lo);
    }
    if (hi == lo)
    {
        hi = lo + 1;
    }
    return Axis{ lo, hi, log };
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

void svg_frame(std::ostream& os, const std::string& title, const std::string& xlabel, const std::string& ylabel)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
       << "</text>\n"
       << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
       << kHeight - kBottom << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
       << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

void svg_ticks(std::ostream& os, const Axis& x, const Axis& y)
{
    for (int k = 0; k <= 4; ++k)
    {
        const double t  = k / 4.0;
        const double xv = x.log ? std::pow(10.0, std::log10(x.lo) + t * (std::log10(x.hi) - std::log10(x.lo)))
                                : x.lo + t * (x.hi - x.lo);
        const double yv = y.log ? std::pow(10.0, std::log10(y.lo) + t * (std::log10(y.hi) - std::log10(y.lo)))
                                : y.lo + t * (y.hi - y.lo);
        const double px = x.map(xv, kLeft, kWidth - kRight);
        const double py = y.map(yv, kHeight - kBottom, kTop);
        os << "<text x=\"" << px << "\" y=\"" << kHeight - kBottom + 14 << "\" text-anchor=\"middle\">" << fmt(xv)
           << "</text>\n";
        os << "<text x=\"" << kLeft - 4 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(yv)
           << "</text>\n";
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

std::string scatter_svg(const std::vector<ReportRow>& rows, GroupBy x_axis, bool latency)
{
    std::vector<const ReportRow*> usable;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rows)
    {
        const auto xv = group_value(r, x_axis);
        const double yv = latency ? r.latency_p95_ms : r.throughput_fps;
        if (xv && *xv > 0 && yv > 0)
        {
            usable.push_back(&r);
            xs.push_back(*xv);
            ys.push_back(yv);
        }
    }
    const std::string ylabel = latency ? "latency p95 [ms]" : "throughput [fps]";
    std::ostringstream os;
    svg_frame(os, ylabel + " vs " + to_string(x_axis), to_string(x_axis), ylabel);
    if (!usable.empty())
    {
        const Axis x = make_axis(xs, x_axis == GroupBy::Params);
        const Axis y = make_axis(ys, false);
        svg_ticks(os, x, y);

        std::vector<std::string> hosts;
        for (const auto* r : usable)
        {
            if (std::find(hosts.begin(), hosts.end(), r->host_tag) == hosts.end())
            {
                hosts.push_back(r->host_tag);
            }
        }
        for (std::size_t i = 0; i < usable.size(); ++i)
        {
            const auto h = static_cast<std::size_t>(
                std::find(hosts.begin(), hosts.end(), usable[i]->host_tag) - hosts.begin());
            os << "<circle cx=\"" << x.map(xs[i], kLeft, kWidth - kRight) << "\" cy=\""
               << y.map(ys[i], kHeight - kBottom, kTop) << "\" r=\"3\" fill=\"" << kPalette[h % kPalette.size()]
               << "\" fill-opacity=\"0.75\"><title>" << usable[i]->model_id << "</title></circle>\n";
        }
        for (std::size_t h = 0; h < hosts.size(); ++h)
        {
            const double ly = kTop + 14.0 * static_cast<double>(h);
            os << "<circle cx=\"" << kWidth - 150 << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
               << kPalette[h % kPalette.size()] << "\"/><text x=\"" << kWidth - 142 << "\" y=\"" << ly + 4 << "\">"
               << hosts[h] << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string histogram_svg(const Histogram& h)
{
    std::ostringstream os;
    svg_frame(os, "Distribution of parameter counts", "parameters (log scale)", "models");
    if (!h.counts.empty())
    {
        const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());
        const Axis x{ h.edges.front(), h.edges.back(), true };
        const Axis y{ 0.0, static_cast<double>(std::max<std::size_t>(peak, 1)), false };
        svg_ticks(os, x, y);
        for (std::size_t k = 0; k < h.counts.size(); ++k)
        {
            const double x0 = x.map(h.edges[k], kLeft, kWidth - kRight);
            const double x1 = x.map(h.edges[k + 1], kLeft, kWidth - kRight);
            const double y0 = y.map(static_cast<double>(h.counts[k]), kHeight - kBottom, kTop);
            os << "<rect x=\"" << x0 + 1 << "\" y=\"" << y0 << "\" width=\"" << std::max(0.0, x1 - x0 - 2)
               << "\" height=\"" << kHeight - kBottom - y0 << "\" fill=\"#1f77b4\"><title>" << h.counts[k]
               << "</title></rect>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}    // namespace

std::vector<std::filesystem::path> write_svg_charts(const std::vector<ReportRow>& rows,
                                                   const std::filesystem::path& dir, GroupBy x_axis)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const std::string x = to_string(x_axis);
    std::vector<std::filesystem::path> written = { dir / ("latency_vs_" + x + ".svg"),
                                                   dir / ("throughput_vs_" + x + ".svg"),
                                                   dir / "params_histogram.svg" };
    write_text_file(written[0], scatter_svg(rows, x_axis, true));
    write_text_file(written[1], scatter_svg(rows, x_axis, false));

    std::vector<std::int64_t> params;
    for (const auto& r : rows)
    {
        if (r.params && *r.params > 0)
        {
            params.push_back(*r.params);
        }
    }
    write_text_file(written[2], histogram_svg(params_histogram(params)));
    return written;
}

}    // namespace edgecnn
