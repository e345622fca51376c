#pragma once

#include <map>
#include <string>

#include "forestinv/common/text.hpp"
#include "forestinv/geodata/grid.hpp"

namespace forestinv::geodata {

// ESRI ASCII grid. Header keys are case-insensitive; XLLCENTER/YLLCENTER are
// accepted and converted to corner registration. One data line per raster row.
inline Grid parse_ascii_grid(std::string_view buf, const std::string& name = "<memory>") {
    text::LineReader lines(buf);
    std::string_view line;
    std::map<std::string, double> header;
    bool have_pending = false;
    std::string_view pending;
    std::size_t pending_line = 0;

    while (lines.next(line)) {
        auto t = text::trim(line);
        if (t.empty()) continue;
        auto toks = text::split_ws(t);
        const char c0 = toks[0][0];
        const bool numeric_start = (c0 >= '0' && c0 <= '9') || c0 == '-' || c0 == '+' || c0 == '.';
        if (numeric_start) {
            have_pending = true;
            pending = t;
            pending_line = lines.line_number();
            break;
        }
        const std::string key = text::to_lower(toks[0]);
        static const char* known[] = {"ncols", "nrows", "xllcorner", "yllcorner", "xllcenter",
                                      "yllcenter", "cellsize", "nodata_value"};
        bool ok = false;
        for (auto* k : known) ok = ok || key == k;
        if (!ok) throw ParseError(name, lines.line_number(), "unknown header key '" + std::string(toks[0]) + "'");
        if (toks.size() != 2)
            throw ParseError(name, lines.line_number(), "header key '" + std::string(toks[0]) + "' needs one value");
        auto v = text::parse_double(toks[1]);
        if (!v || !std::isfinite(*v))
            throw ParseError(name, lines.line_number(), "non-numeric header value '" + std::string(toks[1]) + "'");
        if (header.count(key)) throw ParseError(name, lines.line_number(), "duplicate header key '" + key + "'");
        header[key] = *v;
    }

    auto need = [&](const char* k) {
        auto it = header.find(k);
        if (it == header.end()) throw ParseError(name, lines.line_number(), std::string("missing header key ") + k);
        return it->second;
    };
    auto as_int = [&](const char* k) {
        const double v = need(k);
        if (v != std::floor(v) || v < 1)
            throw ParseError(name, lines.line_number(), std::string(k) + " must be a positive integer");
        return static_cast<int>(v);
    };

    GridGeometry g;
    g.ncols = as_int("ncols");
    g.nrows = as_int("nrows");
    g.cellsize = need("cellsize");
    if (!(g.cellsize > 0)) throw ParseError(name, lines.line_number(), "cellsize must be > 0");
    if (header.count("xllcorner")) g.xll = header["xllcorner"];
    else g.xll = need("xllcenter") - 0.5 * g.cellsize;
    if (header.count("yllcorner")) g.yll = header["yllcorner"];
    else g.yll = need("yllcenter") - 0.5 * g.cellsize;
    const double nodata = header.count("nodata_value") ? header["nodata_value"] : Grid::kDefaultNodata;

    std::vector<double> values;
    values.reserve(g.size());
    int row = 0;
    auto consume = [&](std::string_view data, std::size_t line_no) {
        auto toks = text::split_ws(data);
        if (row >= g.nrows)
            throw ParseError(name, line_no, "more data rows than NROWS " + std::to_string(g.nrows));
        if (toks.size() != static_cast<std::size_t>(g.ncols))
            throw ParseError(name, line_no,
                             "row " + std::to_string(row + 1) + ": expected " + std::to_string(g.ncols) +
                                 " values, found " + std::to_string(toks.size()));
        for (auto tok : toks) {
            auto v = text::parse_double(tok);
            if (!v) throw ParseError(name, line_no, "non-numeric value '" + std::string(tok) + "' in row " +
                                                        std::to_string(row + 1));
            values.push_back(*v);
        }
        ++row;
    };
    if (have_pending) consume(pending, pending_line);
    while (lines.next(line)) {
        auto t = text::trim(line);
        if (t.empty()) continue;
        consume(t, lines.line_number());
    }
    if (row != g.nrows)
        throw ParseError(name, lines.line_number(),
                         "found " + std::to_string(row) + " data rows, NROWS declares " + std::to_string(g.nrows));
    return Grid(g, nodata, std::move(values));
}

inline Grid read_ascii_grid(const std::string& path) { return parse_ascii_grid(text::read_file(path), path); }

inline std::string format_ascii_grid(const Grid& grid) {
    const auto& g = grid.geometry();
    std::string out;
    out.reserve(grid.size() * 8 + 128);
    out += "ncols " + std::to_string(g.ncols) + "\n";
    out += "nrows " + std::to_string(g.nrows) + "\n";
    out += "xllcorner " + text::format_double(g.xll) + "\n";
    out += "yllcorner " + text::format_double(g.yll) + "\n";
    out += "cellsize " + text::format_double(g.cellsize) + "\n";
    out += "NODATA_value " + text::format_double(grid.nodata()) + "\n";
    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            if (c) out += ' ';
            const double v = grid.at(r, c);
            out += grid.is_nodata_value(v) ? text::format_double(grid.nodata()) : text::format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline void write_ascii_grid(const Grid& grid, const std::string& path) {
    text::write_file(path, format_ascii_grid(grid));
}

} // namespace forestinv::geodata
