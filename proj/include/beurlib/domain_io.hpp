#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beurlib/errors.hpp"
#include "beurlib/geometry.hpp"

namespace beurlib {

namespace io_detail {

inline std::string line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return "line " + std::to_string(line);
}

inline double require_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw DomainParseError(path, "expected a number");
    return j.get<double>();
}

inline PlanePoint require_pair(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw DomainParseError(path, "expected a [x, y] pair");
    return {require_number(j[0], path + "[0]"), require_number(j[1], path + "[1]")};
}

inline const nlohmann::json& require_field(const nlohmann::json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DomainParseError(key, "missing required field");
    return *it;
}

}  // namespace io_detail

// Parses a domain spec. Kinds:
//   {"type":"disk","center":[x,y],"radius":r}
//   {"type":"halfplane","anchor":[x,y],"inward_normal":[nx,ny]}
//   {"type":"graph","samples":[[x,A],...],"support_radius":L,"lipschitz_bound":d}
//   {"type":"polygon","vertices":[[x,y],...]}
// Graph samples must sit on a uniform grid. Malformed input raises
// DomainParseError with a line (syntax) or field (schema) diagnostic.
inline Domain parse_domain(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainParseError(io_detail::line_of(text, e.byte), "JSON syntax error");
    }
    using io_detail::require_field;
    using io_detail::require_number;
    using io_detail::require_pair;
    if (!j.is_object()) throw DomainParseError("$", "expected a JSON object");
    const auto& type = require_field(j, "type");
    if (!type.is_string()) throw DomainParseError("type", "expected a string");
    std::string kind = type.get<std::string>();
    try {
        if (kind == "disk") {
            PlanePoint c = require_pair(require_field(j, "center"), "center");
            double r = require_number(require_field(j, "radius"), "radius");
            return make_disk(c, r);
        }
        if (kind == "halfplane") {
            PlanePoint a = require_pair(require_field(j, "anchor"), "anchor");
            PlanePoint n = require_pair(require_field(j, "inward_normal"), "inward_normal");
            return make_halfplane(a, n);
        }
        if (kind == "graph") {
            const auto& samples = require_field(j, "samples");
            if (!samples.is_array() || samples.size() < 2)
                throw DomainParseError("samples", "expected an array of at least two [x, A] pairs");
            std::vector<double> xs, as;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                PlanePoint p = require_pair(samples[i], "samples[" + std::to_string(i) + "]");
                xs.push_back(p.x);
                as.push_back(p.y);
            }
            double h = xs[1] - xs[0];
            if (!(h > 0.0)) throw DomainParseError("samples", "x values must be strictly increasing");
            for (std::size_t i = 1; i < xs.size(); ++i) {
                double expect = xs[0] + h * double(i);
                if (std::abs(xs[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
                    throw DomainParseError("samples[" + std::to_string(i) + "]",
                                           "x values must sit on a uniform grid");
            }
            double L = require_number(require_field(j, "support_radius"), "support_radius");
            double lip = require_number(require_field(j, "lipschitz_bound"), "lipschitz_bound");
            return make_graph(xs[0], h, std::move(as), L, lip);
        }
        if (kind == "polygon") {
            const auto& verts = require_field(j, "vertices");
            if (!verts.is_array() || verts.size() < 3)
                throw DomainParseError("vertices", "expected an array of at least three [x, y] pairs");
            std::vector<PlanePoint> vs;
            for (std::size_t i = 0; i < verts.size(); ++i)
                vs.push_back(require_pair(verts[i], "vertices[" + std::to_string(i) + "]"));
            return make_polygon(std::move(vs));
        }
    } catch (const InvalidDomain& e) {
        throw DomainParseError(kind, e.what());
    }
    throw DomainParseError("type", "unknown domain type '" + kind + "'");
}

inline Domain load_domain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainParseError(path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_domain(ss.str());
}

// Canonical serialization; feeds cache keys and the CLI round trip.
inline std::string domain_to_json(const Domain& dom) {
    nlohmann::json j;
    if (const auto* d = std::get_if<DiskDomain>(&dom)) {
        j["type"] = "disk";
        j["center"] = {d->center.x, d->center.y};
        j["radius"] = d->radius;
    } else if (const auto* h = std::get_if<HalfPlaneDomain>(&dom)) {
        j["type"] = "halfplane";
        j["anchor"] = {h->anchor.x, h->anchor.y};
        j["inward_normal"] = {h->inward_normal.nx, h->inward_normal.ny};
    } else if (const auto* g = std::get_if<LipschitzGraphDomain>(&dom)) {
        j["type"] = "graph";
        auto arr = nlohmann::json::array();
        for (std::size_t i = 0; i < g->samples.size(); ++i)
            arr.push_back({g->x0 + g->spacing * double(i), g->samples[i]});
        j["samples"] = std::move(arr);
        j["support_radius"] = g->support_radius;
        j["lipschitz_bound"] = g->lipschitz_bound;
    } else if (const auto* p = std::get_if<BoundedLipschitzDomain>(&dom)) {
        j["type"] = "polygon";
        auto arr = nlohmann::json::array();
        for (const auto& v : p->vertices) arr.push_back({v.x, v.y});
        j["vertices"] = std::move(arr);
    }
    return j.dump();
}

inline std::uint64_t domain_hash(const Domain& dom) { return fnv1a(domain_to_json(dom)); }

}  // namespace beurlib
