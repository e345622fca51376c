#pragma once

#include <string>
#include <variant>
#include <vector>

#include "forestinv/classify/centroid.hpp"
#include "forestinv/classify/svm.hpp"
#include "forestinv/common/text.hpp"

namespace forestinv::classify {

using Model = std::variant<CentroidModel, SvmModel>;

inline const std::vector<int>& model_bands(const Model& m) {
    return std::visit([](const auto& v) -> const std::vector<int>& { return v.bands; }, m);
}

inline const std::vector<std::string>& model_species(const Model& m) {
    return std::visit([](const auto& v) -> const std::vector<std::string>& { return v.species; }, m);
}

inline std::size_t predict_index(const Model& m, const Eigen::VectorXd& features) {
    if (const auto* c = std::get_if<CentroidModel>(&m)) return predict_centroid_index(*c, features);
    return predict_svm_index(std::get<SvmModel>(m), features.transpose());
}

inline std::string predict(const Model& m, const Eigen::VectorXd& features) {
    return model_species(m)[predict_index(m, features)];
}

// Text format, one record per line, whitespace separated:
//   forestinv-model 1
//   type centroid|svm
//   species N s1 .. sN
//   bands K b1 .. bK
//   centroid: "centroid <species> v1 .. vD" per species
//   svm:      "params C gamma", "mean ..", "scale ..",
//             then per pair "pair pos neg rho nsv" followed by nsv lines "coef v1 .. vD"
namespace detail {

inline void append_values(std::string& out, const auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out += " " + text::format_double(v(i));
}

} // namespace detail

inline std::string format_model(const Model& model) {
    std::string out = "forestinv-model 1\n";
    const auto& sp = model_species(model);
    const auto& bands = model_bands(model);
    out += std::string("type ") + (std::holds_alternative<CentroidModel>(model) ? "centroid" : "svm") + "\n";
    out += "species " + std::to_string(sp.size());
    for (const auto& s : sp) out += " " + s;
    out += "\nbands " + std::to_string(bands.size());
    for (int b : bands) out += " " + std::to_string(b);
    out += "\n";
    if (const auto* c = std::get_if<CentroidModel>(&model)) {
        for (std::size_t k = 0; k < c->species.size(); ++k) {
            out += "centroid " + c->species[k];
            detail::append_values(out, c->centroids[k]);
            out += "\n";
        }
        return out;
    }
    const auto& m = std::get<SvmModel>(model);
    out += "params " + text::format_double(m.C) + " " + text::format_double(m.gamma) + "\nmean";
    detail::append_values(out, m.mean);
    out += "\nscale";
    detail::append_values(out, m.scale);
    out += "\n";
    for (const auto& p : m.pairs) {
        out += "pair " + std::to_string(p.positive) + " " + std::to_string(p.negative) + " " +
               text::format_double(p.svm.rho) + " " + std::to_string(p.svm.coef.size()) + "\n";
        for (std::size_t s = 0; s < p.svm.coef.size(); ++s) {
            out += "coef " + text::format_double(p.svm.coef[s]);
            detail::append_values(out, p.svm.support.row(static_cast<Eigen::Index>(s)));
            out += "\n";
        }
    }
    return out;
}

namespace detail {

class ModelReader {
public:
    ModelReader(std::string_view buf, std::string name) : lines_(buf), name_(std::move(name)) {}

    std::vector<std::string_view> expect(std::string_view key, std::size_t min_tokens = 1) {
        std::string_view line;
        while (lines_.next(line)) {
            auto tok = text::split_ws(line);
            if (tok.empty()) continue;
            if (tok.front() != key) fail("expected '" + std::string(key) + "', found '" + std::string(tok.front()) + "'");
            if (tok.size() < min_tokens) fail("truncated '" + std::string(key) + "' record");
            return tok;
        }
        throw DataError(name_ + ": unexpected end of model file (expected '" + std::string(key) + "')");
    }

    double number(std::string_view tok) {
        auto v = text::parse_double(tok);
        if (!v) fail("non-numeric token '" + std::string(tok) + "'");
        return *v;
    }

    std::size_t count(std::string_view tok) {
        auto v = text::parse_int<long long>(tok);
        if (!v || *v < 0) fail("invalid count '" + std::string(tok) + "'");
        return static_cast<std::size_t>(*v);
    }

    bool at_end() {
        std::string_view line;
        while (lines_.next(line))
            if (!text::trim(line).empty()) fail("trailing content");
        return true;
    }

    [[noreturn]] void fail(const std::string& what) { throw ParseError(name_, lines_.line_number(), what); }

private:
    text::LineReader lines_;
    std::string name_;
};

} // namespace detail

inline Model parse_model(std::string_view buf, const std::string& name = "<memory>") {
    detail::ModelReader r(buf, name);
    auto head = r.expect("forestinv-model", 2);
    if (head[1] != "1") r.fail("unsupported model version '" + std::string(head[1]) + "'");
    auto type = r.expect("type", 2);
    auto sp = r.expect("species", 2);
    const std::size_t ns = r.count(sp[1]);
    if (sp.size() != ns + 2) r.fail("species count mismatch");
    std::vector<std::string> species;
    for (std::size_t i = 0; i < ns; ++i) species.emplace_back(sp[i + 2]);
    auto bt = r.expect("bands", 2);
    const std::size_t nb = r.count(bt[1]);
    if (bt.size() != nb + 2) r.fail("band count mismatch");
    std::vector<int> bands;
    for (std::size_t i = 0; i < nb; ++i) bands.push_back(static_cast<int>(r.count(bt[i + 2])));

    auto vec = [&](const std::vector<std::string_view>& tok, std::size_t from) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(tok.size() - from));
        for (std::size_t i = from; i < tok.size(); ++i) v(static_cast<Eigen::Index>(i - from)) = r.number(tok[i]);
        return v;
    };

    if (type[1] == "centroid") {
        CentroidModel m{bands, species, {}};
        for (std::size_t k = 0; k < ns; ++k) {
            auto tok = r.expect("centroid", 2);
            if (tok[1] != species[k]) r.fail("centroid species out of order");
            m.centroids.push_back(vec(tok, 2));
            if (m.centroids.back().size() != m.centroids.front().size()) r.fail("centroid dimension mismatch");
        }
        r.at_end();
        return m;
    }
    if (type[1] != "svm") r.fail("unknown model type '" + std::string(type[1]) + "'");
    SvmModel m;
    m.bands = bands;
    m.species = species;
    auto params = r.expect("params", 3);
    m.C = r.number(params[1]);
    m.gamma = r.number(params[2]);
    m.mean = vec(r.expect("mean"), 1).transpose();
    m.scale = vec(r.expect("scale"), 1).transpose();
    const auto d = m.mean.size();
    if (m.scale.size() != d) r.fail("scale dimension mismatch");
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = a + 1; b < ns; ++b) {
            auto tok = r.expect("pair", 5);
            SvmModel::Pair p;
            p.positive = r.count(tok[1]);
            p.negative = r.count(tok[2]);
            if (p.positive != a || p.negative != b) r.fail("pair out of order");
            p.svm.rho = r.number(tok[3]);
            p.svm.gamma = m.gamma;
            const std::size_t nsv = r.count(tok[4]);
            p.svm.support.resize(static_cast<Eigen::Index>(nsv), d);
            for (std::size_t s = 0; s < nsv; ++s) {
                auto row = r.expect("coef", 2);
                if (static_cast<Eigen::Index>(row.size()) != d + 2) r.fail("support vector dimension mismatch");
                p.svm.coef.push_back(r.number(row[1]));
                p.svm.support.row(static_cast<Eigen::Index>(s)) = vec(row, 2).transpose();
            }
            m.pairs.push_back(std::move(p));
        }
    r.at_end();
    return m;
}

inline void save_model(const Model& m, const std::string& path) { text::write_file(path, format_model(m)); }

inline Model load_model(const std::string& path) { return parse_model(text::read_file(path), path); }

} // namespace forestinv::classify
