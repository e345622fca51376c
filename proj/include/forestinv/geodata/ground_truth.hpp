#pragma once

#include <string>
#include <vector>

#include "forestinv/common/text.hpp"

namespace forestinv::geodata {

enum class SampleRole { Unassigned, Train, Test };

inline std::string to_string(SampleRole r) {
    switch (r) {
    case SampleRole::Train: return "train";
    case SampleRole::Test: return "test";
    default: return "unassigned";
    }
}

struct GroundTruthPoint {
    double x = 0.0;
    double y = 0.0;
    std::string species_code;
    SampleRole role = SampleRole::Unassigned;
};

/// `x,y,species_code[,role]` with a header line.
inline std::vector<GroundTruthPoint> parse_ground_truth(std::string_view buf, const std::string& name = "<memory>") {
    text::LineReader lines(buf);
    std::string_view line;
    while (lines.next(line) && text::trim(line).empty()) {
    }
    if (text::trim(line).empty()) throw DataError(name + ": empty ground-truth file");
    int ix = -1, iy = -1, isp = -1, irole = -1;
    const auto cols = text::split(text::trim(line), ',');
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto k = text::to_lower(text::trim(cols[i]));
        if (k == "x") ix = static_cast<int>(i);
        else if (k == "y") iy = static_cast<int>(i);
        else if (k == "species_code" || k == "species") isp = static_cast<int>(i);
        else if (k == "role") irole = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || isp < 0) throw ParseError(name, lines.line_number(), "header needs x, y, species_code");

    std::vector<GroundTruthPoint> out;
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != cols.size()) throw ParseError(name, lines.line_number(), "wrong number of fields");
        GroundTruthPoint p;
        auto x = text::parse_double(f[static_cast<std::size_t>(ix)]);
        auto y = text::parse_double(f[static_cast<std::size_t>(iy)]);
        if (!x || !y) throw ParseError(name, lines.line_number(), "non-numeric coordinate");
        p.x = *x;
        p.y = *y;
        p.species_code = std::string(text::trim(f[static_cast<std::size_t>(isp)]));
        if (p.species_code.empty()) throw ParseError(name, lines.line_number(), "empty species_code");
        if (irole >= 0) {
            const auto r = text::to_lower(text::trim(f[static_cast<std::size_t>(irole)]));
            if (r == "train") p.role = SampleRole::Train;
            else if (r == "test") p.role = SampleRole::Test;
            else if (r.empty() || r == "unassigned") p.role = SampleRole::Unassigned;
            else throw ParseError(name, lines.line_number(), "role must be train, test or unassigned");
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<GroundTruthPoint> read_ground_truth(const std::string& path) {
    return parse_ground_truth(text::read_file(path), path);
}

inline void write_ground_truth(const std::vector<GroundTruthPoint>& pts, const std::string& path) {
    std::string out = "x,y,species_code,role\n";
    for (const auto& p : pts)
        out += text::format_double(p.x) + "," + text::format_double(p.y) + "," + p.species_code + "," +
               to_string(p.role) + "\n";
    text::write_file(path, out);
}

} // namespace forestinv::geodata
