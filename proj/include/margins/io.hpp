#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "margins/algorithms.hpp"
#include "margins/error.hpp"
#include "margins/generate.hpp"
#include "margins/instance.hpp"
#include "margins/margin.hpp"
#include "margins/summary.hpp"
#include "margins/theorems.hpp"

namespace margins::io {

using json = nlohmann::json;

inline json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const json& j)
{
    const auto raw = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(raw.data(), static_cast<Index>(raw.size()));
}

// NaN and infinities are not representable in JSON
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

/// { "name", "columns": [[...], ...], "normalize" } with columns indexed by i.
inline json instance_to_json(const ProblemInstance& instance)
{
    json cols = json::array();
    for (Index i = 0; i < instance.size(); ++i) cols.push_back(to_json(instance.matrix().col(i)));
    return json{{"name", instance.name()}, {"columns", cols}, {"normalize", instance.normalized()}};
}

inline ProblemInstance instance_from_json(const json& j, double rank_rel_tol = kDefaultRankRelTol)
{
    if (!j.contains("columns")) throw InvalidArgument("instance JSON has no 'columns' field");
    const auto cols = j.at("columns").get<std::vector<std::vector<double>>>();
    const bool normalize = j.value("normalize", true);
    return ingest(cols, normalize, j.value("name", std::string{}), rank_rel_tol);
}

inline json spec_to_json(const GeneratorSpec& s)
{
    return json{{"kind", to_string(s.kind)}, {"d", s.d},           {"n", s.n},
                {"target_margin", s.target_margin}, {"seed", s.seed}, {"jitter", s.jitter},
                {"rank", s.rank}};
}

inline GeneratorSpec spec_from_json(const json& j)
{
    GeneratorSpec s;
    s.kind = generator_kind_from_string(j.at("kind").get<std::string>());
    s.d = j.value("d", s.d);
    s.n = j.value("n", s.n);
    s.target_margin = j.value("target_margin", s.target_margin);
    s.seed = j.value("seed", s.seed);
    s.jitter = j.value("jitter", s.jitter);
    s.rank = j.value("rank", s.rank);
    return s;
}

inline json generated_to_json(const GeneratedInstance& g)
{
    json j = instance_to_json(g.instance);
    json meta{{"generator", spec_to_json(g.spec)}};
    if (g.oracle_rho_affine) meta["oracle_rho_affine"] = *g.oracle_rho_affine;
    if (g.oracle_rho_classical) meta["oracle_rho_classical"] = *g.oracle_rho_classical;
    j["metadata"] = meta;
    return j;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

inline ProblemInstance load_instance(const std::string& path, double rank_rel_tol = kDefaultRankRelTol)
{
    return instance_from_json(read_json_file(path), rank_rel_tol);
}

inline json to_json(const SimplexPoint& p) { return to_json(p.weights()); }

inline json to_json(const MarginReport& r)
{
    json j{{"rho_classical", r.rho_classical},
           {"rho_affine", r.rho_affine},
           {"rho_plus", r.rho_plus},
           {"rho_minus", r.rho_minus},
           {"method", to_string(r.method)},
           {"rank", r.rank},
           {"rank_tolerance", r.rank_tolerance},
           {"ill_posed", r.ill_posed},
           {"tolerance_flagged", r.tolerance_flagged}};
    j["witness_direction"] = r.witness_direction ? to_json(r.witness_direction->vector) : json(nullptr);
    j["witness_weights"] = r.witness_weights ? to_json(*r.witness_weights) : json(nullptr);
    return j;
}

inline json to_json(const BallReport& b)
{
    return json{{"center", to_json(b.center)}, {"radius", b.radius}, {"support_weights", to_json(b.support_weights)}};
}

inline json to_json(const GordanVerdict& v)
{
    json j{{"gamma", v.gamma},
           {"part", v.part},
           {"alternative_held", to_string(v.alternative_held)},
           {"rho_affine", v.rho_affine},
           {"verified", v.verified},
           {"residuals", to_json(v.residuals)}};
    if (v.direction) j["witness"] = json{{"direction", to_json(v.direction->vector)}};
    if (v.weights) j["witness"] = json{{"weights", to_json(*v.weights)}};
    if (!v.samples.empty()) {
        json table = json::array();
        for (const auto& s : v.samples)
            table.push_back(json{{"v", to_json(s.v)},
                                 {"p", s.p ? to_json(*s.p) : json(nullptr)},
                                 {"residual", number(s.residual)}});
        j["witness"] = json{{"samples", table}};
    }
    return j;
}

inline json to_json(const HoffmanReport& r)
{
    json j{{"variant", to_string(r.variant)},
           {"bound_value", r.bound_value},
           {"margin_used", r.margin_used},
           {"constructed_witness", to_json(r.constructed_witness)},
           {"witness_distance", r.witness_distance},
           {"witness_residual", r.witness_residual},
           {"exact_distance", r.exact_distance ? json(*r.exact_distance) : json(nullptr)},
           {"slack", r.slack},
           {"short_circuit", r.short_circuit},
           {"verified", r.verified}};
    if (r.variant == HoffmanVariant::dual_simplex) j["relaxed_bound"] = r.relaxed_bound;
    if (r.nearest_point) j["nearest_point"] = to_json(*r.nearest_point);
    if (r.dual_chain_value) j["dual_chain_value"] = *r.dual_chain_value;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json to_json(const Certificate& c)
{
    json j{{"kind", to_string(c.kind)}, {"epsilon", c.epsilon}, {"iterations", c.iterations}, {"w", to_json(c.w)}};
    if (c.p) j["p"] = to_json(*c.p);
    return j;
}

inline json to_json(const RunSummary& s)
{
    json checks = json::array();
    for (const auto& c : s.checks)
        checks.push_back(json{{"name", c.name},
                              {"statement", c.statement},
                              {"checked", c.checked},
                              {"failed", c.failed},
                              {"passed", c.passed()},
                              {"worst_violation", c.worst_violation}});
    json j{{"instance", s.instance},
           {"algorithm", s.algorithm},
           {"mode", to_string(s.mode)},
           {"iterations", s.iterations},
           {"termination", to_string(s.termination)},
           {"certificate", s.certificate ? to_json(*s.certificate) : json(nullptr)},
           {"checks", checks},
           {"all_checks_passed", s.all_passed()}};
    if (s.oracle)
        j["oracle"] = json{{"rho_affine", s.oracle->rho_affine}, {"rho_classical", s.oracle->rho_classical}};
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

/// Trace CSV: t,norm_w,margin_t,loss,chosen_index with 17 significant digits.
inline void write_trace_csv(std::ostream& out, const IterateTrace& trace)
{
    out << "t,norm_w,margin_t,loss,chosen_index\n";
    out << std::setprecision(17);
    for (const auto& r : trace.records)
        out << r.t << ',' << r.norm_w << ',' << r.margin << ',' << r.loss << ',' << r.chosen_index << '\n';
}

struct CsvRow {
    long t = 0;
    double norm_w = 0.0;
    double margin = 0.0;
    double loss = 0.0;
    long chosen_index = -1;
};

inline std::vector<CsvRow> read_trace_csv(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    if (line != "t,norm_w,margin_t,loss,chosen_index") throw InvalidArgument("unexpected trace CSV header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& s : f) std::getline(ss, s, ',');
        CsvRow r;
        r.t = std::stol(f[0]);
        r.norm_w = std::stod(f[1]);
        r.margin = f[2] == "nan" || f[2] == "-nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[2]);
        r.loss = std::stod(f[3]);
        r.chosen_index = std::stol(f[4]);
        rows.push_back(r);
    }
    return rows;
}

/// Sidecar with alpha_t for every recorded iterate.
inline json alpha_to_json(const IterateTrace& trace)
{
    json rows = json::array();
    for (const auto& r : trace.records)
        if (r.alpha.size() > 0) rows.push_back(json{{"t", r.t}, {"alpha", to_json(r.alpha)}});
    return json{{"algorithm", trace.algorithm}, {"alpha", rows}};
}

}  // namespace margins::io
