// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/output.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmv/error.hpp"

namespace rmv
{
namespace
{
std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape_xml(std::string const& s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void flatten(Json const& j, std::string const& prefix, std::vector<std::pair<std::string, std::string>>& out)
{
    if (j.is_object())
    {
        for (auto const& [k, v] : j.items())
            flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    }
    else if (j.is_array())
    {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
    else if (j.is_string())
        out.emplace_back(prefix, j.get<std::string>());
    else if (j.is_number_float())
        out.emplace_back(prefix, num(j.get<double>()));
    else
        out.emplace_back(prefix, j.dump());
}

std::string csv_field(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}
}  // namespace

std::string report_json(Report const& r, RunConfig const& cfg)
{
    Json tables = Json::object();
    for (auto const& t : r.tables)
        tables[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
    Json doc = {{"format_version", kReportFormatVersion},
                {"command", r.command},
                {"config_hash", cfg.hash},
                {"config", cfg.effective},
                {"summary", r.summary},
                {"tables", tables}};
    if (r.has_verdict)
        doc["passed"] = r.passed;
    return doc.dump(2) + "\n";
}

std::string table_csv(Table const& t, std::string const& config_hash)
{
    std::ostringstream os;
    os << "# rmvlab-csv v" << kReportFormatVersion << " " << t.name << " " << config_hash << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (auto const& row : t.rows)
    {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << num(row[c]);
        os << "\n";
    }
    return os.str();
}

std::string summary_csv(Report const& r, std::string const& config_hash)
{
    std::vector<std::pair<std::string, std::string>> kv;
    flatten(r.summary, "", kv);
    std::ostringstream os;
    os << "# rmvlab-csv v" << kReportFormatVersion << " summary " << config_hash << "\n";
    os << "key,value\n";
    os << "command," << r.command << "\n";
    if (r.has_verdict)
        os << "passed," << (r.passed ? "true" : "false") << "\n";
    for (auto const& [k, v] : kv)
        os << csv_field(k) << "," << csv_field(v) << "\n";
    return os.str();
}

std::string plot_svg(Plot const& p)
{
    double const w = 640, h = 400, left = 70, right = 20, top = 40, bottom = 50;
    auto tx = [&](double v) { return p.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.logy ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!p.logx || x > 0) && (!p.logy || y > 0);
    };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto const& s : p.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (usable(s.x[i], s.y[i]))
            {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
    if (x0 > x1)
        x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-300)
        x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-300)
        y0 -= 0.5, y1 += 0.5;
    double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (w - left - right); };
    auto py = [&](double v) { return h - bottom - (ty(v) - y0) / (y1 - y0) * (h - top - bottom); };

    static char const* const colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << escape_xml(p.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w - left - right
       << "\" height=\"" << h - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k)
    {
        double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
        double vx = p.logx ? std::pow(10, fx) : fx, vy = p.logy ? std::pow(10, fy) : fy;
        double sx = left + (w - left - right) * k / 4, sy = h - bottom - (h - top - bottom) * k / 4;
        os << "<text x=\"" << sx << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\">"
           << short_num(vx) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
           << short_num(vy) << "</text>\n";
        os << "<line x1=\"" << left << "\" y1=\"" << sy << "\" x2=\"" << w - right << "\" y2=\""
           << sy << "\" stroke=\"#e0e0e0\"/>\n";
    }
    os << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12
       << "\" text-anchor=\"middle\">" << escape_xml(p.xlabel) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (top + h - bottom) / 2 << ")\">" << escape_xml(p.ylabel) << "</text>\n";
    for (std::size_t s = 0; s < p.series.size(); ++s)
    {
        auto const& ser = p.series[s];
        char const* col = colors[s % 8];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
            if (usable(ser.x[i], ser.y[i]))
            {
                os << (first ? "" : " ") << short_num(px(ser.x[i])) << "," << short_num(py(ser.y[i]));
                first = false;
            }
        os << "\"/>\n";
        os << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 14 * s << "\" fill=\"" << col
           << "\">" << escape_xml(ser.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_atomic(std::string const& path, std::string const& content)
{
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::io_error, "cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            fail(ErrorCode::io_error, "short write to '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::io_error, "cannot rename onto '" + path + "'");
    }
}

std::vector<std::string> write_report(Report const& r, RunConfig const& cfg,
                                      std::string const& out_dir, std::string const& format,
                                      bool plots)
{
    require(format == "json" || format == "csv", ErrorCode::invalid_argument,
            "format must be 'json' or 'csv'");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        fail(ErrorCode::io_error, "cannot create output directory '" + out_dir + "'");
    std::vector<std::string> written;
    auto put = [&](std::string const& name, std::string const& content) {
        auto path = (std::filesystem::path(out_dir) / name).string();
        write_atomic(path, content);
        written.push_back(path);
    };
    if (format == "json")
        put(r.command + ".json", report_json(r, cfg));
    else
    {
        put(r.command + "_summary.csv", summary_csv(r, cfg.hash));
        for (auto const& t : r.tables)
            put(r.command + "_" + t.name + ".csv", table_csv(t, cfg.hash));
    }
    if (plots)
        for (auto const& p : r.plots)
            put(r.command + "_" + p.name + ".svg", plot_svg(p));
    return written;
}
}  // namespace rmv
