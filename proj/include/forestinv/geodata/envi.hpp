#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "forestinv/common/text.hpp"
#include "forestinv/geodata/hypercube.hpp"

namespace forestinv::geodata {

struct EnviHeader {
    int samples = 0;
    int lines = 0;
    int bands = 0;
    int data_type = 4;
    int byte_order = 0;
    std::size_t header_offset = 0;
    std::string interleave = "bsq";
    std::vector<double> wavelengths;
    GridGeometry geometry;
};

namespace detail {

inline std::size_t envi_type_size(int data_type) {
    switch (data_type) {
    case 4: return 4;
    case 12: return 2;
    default: return 0;
    }
}

} // namespace detail

inline EnviHeader parse_envi_header(std::string_view buf, const std::string& name = "<memory>") {
    text::LineReader lines(buf);
    std::string_view line;
    if (!lines.next(line) || text::trim(line) != "ENVI")
        throw ParseError(name, 1, "ENVI header must start with the line 'ENVI'");

    std::map<std::string, std::string> kv;
    std::map<std::string, std::size_t> kv_line;
    while (lines.next(line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == ';') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError(name, lines.line_number(), "expected 'key = value'");
        const std::size_t start_line = lines.line_number();
        std::string key = text::to_lower(text::trim(t.substr(0, eq)));
        std::string value(text::trim(t.substr(eq + 1)));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                if (!lines.next(line)) throw ParseError(name, start_line, "unterminated '{' for key '" + key + "'");
                value += ' ';
                value += text::trim(line);
            }
            const auto close = value.find('}');
            value = std::string(text::trim(std::string_view(value).substr(1, close - 1)));
        }
        kv[key] = value;
        kv_line[key] = start_line;
    }

    EnviHeader h;
    auto get_int = [&](const std::string& key, bool required, int fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (required) throw ParseError(name, lines.line_number(), "missing header key '" + key + "'");
            return fallback;
        }
        auto v = text::parse_int<int>(it->second);
        if (!v) throw ParseError(name, kv_line[key], "non-integer value for '" + key + "'");
        return *v;
    };
    h.samples = get_int("samples", true, 0);
    h.lines = get_int("lines", true, 0);
    h.bands = get_int("bands", true, 0);
    h.data_type = get_int("data type", true, 0);
    h.byte_order = get_int("byte order", false, 0);
    h.header_offset = static_cast<std::size_t>(get_int("header offset", false, 0));
    if (h.samples < 1 || h.lines < 1 || h.bands < 1) throw DataError(name + ": samples, lines and bands must be >= 1");
    if (detail::envi_type_size(h.data_type) == 0)
        throw DataError(name + ": unsupported data type " + std::to_string(h.data_type) +
                        " (supported: 4 = float32, 12 = uint16)");
    if (h.byte_order != 0 && h.byte_order != 1) throw DataError(name + ": byte order must be 0 or 1");
    if (kv.count("interleave")) h.interleave = text::to_lower(kv["interleave"]);
    if (h.interleave != "bsq") throw DataError(name + ": unsupported interleave '" + h.interleave + "' (only bsq)");

    if (kv.count("wavelength")) {
        for (auto tok : text::split(kv["wavelength"], ',')) {
            auto v = text::parse_double(tok);
            if (!v) throw ParseError(name, kv_line["wavelength"], "non-numeric wavelength '" + std::string(tok) + "'");
            h.wavelengths.push_back(*v);
        }
        if (h.wavelengths.size() != static_cast<std::size_t>(h.bands))
            throw DataError(name + ": wavelength list has " + std::to_string(h.wavelengths.size()) +
                            " entries for " + std::to_string(h.bands) + " bands");
    }

    h.geometry.ncols = h.samples;
    h.geometry.nrows = h.lines;
    if (kv.count("map info")) {
        // {projection, ref x, ref y, easting, northing, pixel x, pixel y, ...}; ref pixel is 1-based.
        auto parts = text::split(kv["map info"], ',');
        if (parts.size() < 7) throw ParseError(name, kv_line["map info"], "map info needs at least 7 fields");
        double f[6];
        for (int i = 0; i < 6; ++i) {
            auto v = text::parse_double(parts[static_cast<std::size_t>(i + 1)]);
            if (!v) throw ParseError(name, kv_line["map info"], "non-numeric map info field");
            f[i] = *v;
        }
        if (std::abs(f[4] - f[5]) > 1e-12 * std::abs(f[4]))
            throw DataError(name + ": only square pixels are supported");
        const double x_ul = f[2] - (f[0] - 1.0) * f[4];
        const double y_ul = f[3] + (f[1] - 1.0) * f[5];
        h.geometry.cellsize = f[4];
        h.geometry.xll = x_ul;
        h.geometry.yll = y_ul - h.lines * f[5];
    }
    h.geometry.validate();
    return h;
}

inline HyperCube decode_envi_cube(const EnviHeader& h, std::string_view data, const std::string& name = "<memory>") {
    const std::size_t type_size = detail::envi_type_size(h.data_type);
    const std::size_t n = static_cast<std::size_t>(h.samples) * h.lines * h.bands;
    if (data.size() != h.header_offset + n * type_size)
        throw DataError(name + ": data file is " + std::to_string(data.size()) + " bytes, expected " +
                        std::to_string(h.header_offset + n * type_size) + " for " + std::to_string(h.samples) +
                        "x" + std::to_string(h.lines) + "x" + std::to_string(h.bands) + " samples");
    const bool swap = (h.byte_order == 1) != (std::endian::native == std::endian::big);
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data()) + h.header_offset;
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char b[4];
        std::memcpy(b, bytes + i * type_size, type_size);
        if (swap) std::reverse(b, b + type_size);
        if (h.data_type == 4) {
            float f;
            std::memcpy(&f, b, 4);
            samples[i] = f;
        } else {
            std::uint16_t u;
            std::memcpy(&u, b, 2);
            samples[i] = u;
        }
    }
    return HyperCube(h.geometry, h.bands, h.wavelengths, std::move(samples));
}

inline HyperCube read_envi_cube(const std::string& header_path, const std::string& data_path) {
    const auto header = parse_envi_header(text::read_file(header_path), header_path);
    return decode_envi_cube(header, text::read_file(data_path), data_path);
}

/// Writes a float32 little-endian BSQ cube and its header.
inline void write_envi_cube(const HyperCube& cube, const std::string& header_path, const std::string& data_path) {
    const auto& g = cube.geometry();
    std::string hdr = "ENVI\n";
    hdr += "description = {forestinv cube}\n";
    hdr += "samples = " + std::to_string(g.ncols) + "\n";
    hdr += "lines = " + std::to_string(g.nrows) + "\n";
    hdr += "bands = " + std::to_string(cube.nbands()) + "\n";
    hdr += "header offset = 0\n";
    hdr += "file type = ENVI Standard\n";
    hdr += "data type = 4\n";
    hdr += "interleave = bsq\n";
    hdr += "byte order = 0\n";
    hdr += "map info = {Arbitrary, 1, 1, " + text::format_double(g.xll) + ", " + text::format_double(g.ytop()) +
           ", " + text::format_double(g.cellsize) + ", " + text::format_double(g.cellsize) + ", units=Meters}\n";
    if (!cube.wavelengths().empty()) {
        hdr += "wavelength units = Micrometers\n";
        hdr += "wavelength = {";
        for (std::size_t i = 0; i < cube.wavelengths().size(); ++i) {
            if (i) hdr += ", ";
            hdr += text::format_double(cube.wavelengths()[i]);
        }
        hdr += "}\n";
    }
    text::write_file(header_path, hdr);

    const auto& s = cube.samples();
    std::string data(s.size() * 4, '\0');
    for (std::size_t i = 0; i < s.size(); ++i) {
        const float f = static_cast<float>(s[i]);
        unsigned char b[4];
        std::memcpy(b, &f, 4);
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 4);
        std::memcpy(data.data() + i * 4, b, 4);
    }
    text::write_file(data_path, data);
}

} // namespace forestinv::geodata
