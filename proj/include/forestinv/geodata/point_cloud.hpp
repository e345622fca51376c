#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "forestinv/common/text.hpp"

namespace forestinv::geodata {

struct LidarPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::optional<double> height_above_ground;
    int return_number = 1;
    bool is_ground = false;
};

struct PointCloud {
    std::vector<LidarPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

namespace detail {

inline bool parse_flag(std::string_view tok, bool& out) {
    const auto t = text::to_lower(text::trim(tok));
    if (t == "1" || t == "true" || t == "t" || t == "yes") return out = true, true;
    if (t == "0" || t == "false" || t == "f" || t == "no") return out = false, true;
    return false;
}

} // namespace detail

// Delimited point format: a header naming the columns (x, y, z required;
// return_number, is_ground, hag optional, any order; unknown columns ignored),
// then one point per line.
inline PointCloud parse_point_cloud(std::string_view buf, const std::string& name = "<memory>") {
    text::LineReader lines(buf);
    std::string_view line;
    bool got_header = false;
    while (lines.next(line)) {
        if (!text::trim(line).empty()) {
            got_header = true;
            break;
        }
    }
    if (!got_header) throw DataError(name + ": empty point cloud file");

    int ix = -1, iy = -1, iz = -1, iret = -1, iground = -1, ihag = -1;
    const auto cols = text::split(text::trim(line), ',');
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto key = text::to_lower(text::trim(cols[i]));
        const int idx = static_cast<int>(i);
        if (key == "x") ix = idx;
        else if (key == "y") iy = idx;
        else if (key == "z") iz = idx;
        else if (key == "return_number") iret = idx;
        else if (key == "is_ground") iground = idx;
        else if (key == "hag" || key == "height_above_ground") ihag = idx;
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(name, lines.line_number(), "header must name columns x, y and z");
    const std::size_t ncols = cols.size();

    PointCloud cloud;
    cloud.points.reserve(buf.size() / 24);
    std::vector<std::string_view> fields;
    fields.reserve(ncols);
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        fields.clear();
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            if (pos == std::string_view::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != ncols)
            throw ParseError(name, lines.line_number(),
                             "expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
        LidarPoint p;
        auto coord = [&](int idx, const char* what) {
            auto v = text::parse_double(fields[static_cast<std::size_t>(idx)]);
            if (!v || !std::isfinite(*v))
                throw ParseError(name, lines.line_number(),
                                 std::string("non-numeric ") + what + " '" +
                                     std::string(fields[static_cast<std::size_t>(idx)]) + "'");
            return *v;
        };
        p.x = coord(ix, "x");
        p.y = coord(iy, "y");
        p.z = coord(iz, "z");
        if (iret >= 0) {
            auto r = text::parse_int<int>(fields[static_cast<std::size_t>(iret)]);
            if (!r || *r < 1) throw ParseError(name, lines.line_number(), "return_number must be an integer >= 1");
            p.return_number = *r;
        }
        if (iground >= 0 && !detail::parse_flag(fields[static_cast<std::size_t>(iground)], p.is_ground))
            throw ParseError(name, lines.line_number(), "is_ground must be 0/1 or true/false");
        if (ihag >= 0) {
            auto field = text::trim(fields[static_cast<std::size_t>(ihag)]);
            if (!field.empty()) p.height_above_ground = coord(ihag, "hag");
        }
        cloud.points.push_back(p);
    }
    if (cloud.points.empty()) throw DataError(name + ": point cloud file has a header but no points");
    return cloud;
}

inline PointCloud read_point_cloud(const std::string& path) { return parse_point_cloud(text::read_file(path), path); }

inline std::string format_point_cloud(const PointCloud& cloud) {
    std::string out = "x,y,z,return_number,is_ground\n";
    out.reserve(cloud.size() * 40);
    for (const auto& p : cloud.points) {
        out += text::format_double(p.x);
        out += ',';
        out += text::format_double(p.y);
        out += ',';
        out += text::format_double(p.z);
        out += ',';
        out += std::to_string(p.return_number);
        out += p.is_ground ? ",1\n" : ",0\n";
    }
    return out;
}

inline void write_point_cloud(const PointCloud& cloud, const std::string& path) {
    text::write_file(path, format_point_cloud(cloud));
}

} // namespace forestinv::geodata
