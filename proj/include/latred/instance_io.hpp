#pragma once

// Versioned JSON round-trip for problem instances.  Every number is an exact
// rational rendered as "num/den" (or a plain integer string), so a file can
// travel through an arbitrary chain of reductions and load back bit-for-bit.

#include <cctype>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"
#include "latred/errors.hpp"
#include "latred/instances.hpp"

namespace latred {

using json = nlohmann::json;

constexpr int instance_schema_version = 1;
constexpr const char* software_version = "0.1.0";

inline bigint parse_bigint(const std::string& s) {
    try {
        return bigint(s);
    } catch (const std::invalid_argument&) {
        throw schema_error("not an integer: " + s);
    }
}

// ---------------------------------------------------------------------------
// Generic document: one problem instance plus its promise parameters.  The
// params map keeps exact strings so unknown tags survive load/save unchanged.

struct instance_doc {
    int version = instance_schema_version;
    rat p = rat(2);
    std::string tag;  // cvp-prime | bdd | agbdd | aggapcvp | svp
    rational_basis basis;
    rat_vec target;      // empty for homogeneous problems (svp)
    rat_vec weight_pow;  // optional per-coordinate weights, empty = all ones
    std::map<std::string, std::string> params;
    json provenance;  // opaque; reduce commands overwrite it
};

inline json instance_to_json(const instance_doc& doc) {
    json j;
    j["version"] = doc.version;
    j["p"] = rat_str(doc.p);
    j["problem"] = {{"tag", doc.tag}, {"params", json::object()}};
    for (const auto& [k, v] : doc.params) j["problem"]["params"][k] = v;
    json rows = json::array();
    for (const auto& row : doc.basis.m) {
        json r = json::array();
        for (const auto& x : row) r.push_back(rat_str(x));
        rows.push_back(std::move(r));
    }
    j["basis"] = std::move(rows);
    if (!doc.target.empty()) {
        json t = json::array();
        for (const auto& x : doc.target) t.push_back(rat_str(x));
        j["target"] = std::move(t);
    }
    if (!doc.weight_pow.empty()) {
        json w = json::array();
        for (const auto& x : doc.weight_pow) w.push_back(rat_str(x));
        j["weights"] = std::move(w);
    }
    if (!doc.provenance.is_null()) j["provenance"] = doc.provenance;
    return j;
}

namespace detail {

inline rat_vec parse_rat_array(const json& a, const char* what) {
    if (!a.is_array()) throw schema_error(std::string(what) + " must be an array");
    rat_vec out;
    out.reserve(a.size());
    for (const auto& x : a) {
        if (!x.is_string())
            throw schema_error(std::string(what) + " entries must be strings");
        out.push_back(parse_rat(x.get<std::string>()));
    }
    return out;
}

}  // namespace detail

inline instance_doc instance_from_json(const json& j) {
    if (!j.is_object()) throw schema_error("instance must be a JSON object");
    for (const char* key : {"version", "p", "problem", "basis"})
        if (!j.contains(key))
            throw schema_error(std::string("missing field: ") + key);

    instance_doc doc;
    if (!j["version"].is_number_integer())
        throw schema_error("version must be an integer");
    doc.version = j["version"].get<int>();
    if (doc.version != instance_schema_version)
        throw schema_error("unsupported schema version " +
                           std::to_string(doc.version));

    if (!j["p"].is_string()) throw schema_error("p must be a string");
    doc.p = parse_rat(j["p"].get<std::string>());
    if (!(doc.p >= 1)) throw schema_error("p must be >= 1");

    const json& prob = j["problem"];
    if (!prob.is_object() || !prob.contains("tag") || !prob["tag"].is_string())
        throw schema_error("problem must carry a string tag");
    doc.tag = prob["tag"].get<std::string>();
    if (prob.contains("params")) {
        if (!prob["params"].is_object())
            throw schema_error("problem params must be an object");
        for (const auto& [k, v] : prob["params"].items()) {
            if (!v.is_string())
                throw schema_error("param " + k + " must be a string");
            doc.params[k] = v.get<std::string>();
        }
    }

    if (!j["basis"].is_array() || j["basis"].empty())
        throw schema_error("basis must be a non-empty array of rows");
    for (const auto& row : j["basis"])
        doc.basis.m.push_back(detail::parse_rat_array(row, "basis row"));
    const std::size_t cols = doc.basis.m.front().size();
    if (cols == 0) throw schema_error("basis rows must be non-empty");
    for (const auto& row : doc.basis.m)
        if (row.size() != cols) throw schema_error("ragged basis rows");

    if (j.contains("target")) {
        doc.target = detail::parse_rat_array(j["target"], "target");
        if (doc.target.size() != doc.basis.m.size())
            throw schema_error("target length must match basis dimension");
    }
    if (j.contains("weights")) {
        doc.weight_pow = detail::parse_rat_array(j["weights"], "weights");
        if (doc.weight_pow.size() != doc.basis.m.size())
            throw schema_error("weights length must match basis dimension");
        for (const auto& w : doc.weight_pow)
            if (!(w > 0)) throw schema_error("weights must be positive");
    }
    if (j.contains("provenance")) doc.provenance = j["provenance"];
    return doc;
}

inline void save_instance(const std::string& path, const instance_doc& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << instance_to_json(doc).dump(2) << '\n';
}

inline instance_doc load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw schema_error(std::string("invalid JSON: ") + e.what());
    }
    return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Typed views.  Each getter checks the tag and the presence of its promise
// parameters; each maker records them exactly.

namespace detail {

inline const std::string& need_param(const instance_doc& doc,
                                     const std::string& key) {
    const auto it = doc.params.find(key);
    if (it == doc.params.end())
        throw schema_error(doc.tag + " instance missing param " + key);
    return it->second;
}

inline void need_tag(const instance_doc& doc, const char* tag) {
    if (doc.tag != tag)
        throw schema_error("expected a " + std::string(tag) +
                           " instance, got " + doc.tag);
}

inline void need_target(const instance_doc& doc) {
    if (doc.target.empty())
        throw schema_error(doc.tag + " instance requires a target");
}

}  // namespace detail

inline cvp_prime_instance to_cvp_prime(const instance_doc& doc) {
    detail::need_tag(doc, "cvp-prime");
    detail::need_target(doc);
    cvp_prime_instance inst;
    inst.basis = doc.basis;
    inst.target = doc.target;
    inst.gamma_pow = parse_rat(detail::need_param(doc, "gamma_pow"));
    check_instance(inst);
    return inst;
}

inline bdd_instance to_bdd(const instance_doc& doc) {
    detail::need_tag(doc, "bdd");
    detail::need_target(doc);
    bdd_instance inst;
    inst.basis = doc.basis;
    inst.target = doc.target;
    inst.alpha_pow = parse_rat(detail::need_param(doc, "alpha_pow"));
    inst.weight_pow = doc.weight_pow;
    check_instance(inst);
    return inst;
}

inline agbdd_instance to_agbdd(const instance_doc& doc) {
    detail::need_tag(doc, "agbdd");
    detail::need_target(doc);
    agbdd_instance inst;
    inst.basis = doc.basis;
    inst.target = doc.target;
    inst.r_pow = parse_rat(detail::need_param(doc, "r_pow"));
    inst.alpha_pow = parse_rat(detail::need_param(doc, "alpha_pow"));
    inst.a_bound = parse_bigint(detail::need_param(doc, "a_bound"));
    inst.g_bound = parse_bigint(detail::need_param(doc, "g_bound"));
    inst.weight_pow = doc.weight_pow;
    check_instance(inst);
    return inst;
}

inline aggapcvp_instance to_aggapcvp(const instance_doc& doc) {
    detail::need_tag(doc, "aggapcvp");
    detail::need_target(doc);
    aggapcvp_instance inst;
    inst.basis = doc.basis;
    inst.target = doc.target;
    inst.r_pow = parse_rat(detail::need_param(doc, "r_pow"));
    inst.u_pow = parse_rat(detail::need_param(doc, "u_pow"));
    inst.gamma_prime_pow =
        parse_rat(detail::need_param(doc, "gamma_prime_pow"));
    inst.a_bound = parse_bigint(detail::need_param(doc, "a_bound"));
    inst.g_bound = parse_bigint(detail::need_param(doc, "g_bound"));
    inst.weight_pow = doc.weight_pow;
    check_instance(inst);
    return inst;
}

inline svp_instance to_svp(const instance_doc& doc) {
    detail::need_tag(doc, "svp");
    svp_instance inst;
    inst.basis = doc.basis;
    inst.r_pow = parse_rat(detail::need_param(doc, "r_pow"));
    inst.gamma_pow = parse_rat(detail::need_param(doc, "gamma_pow"));
    inst.weight_pow = doc.weight_pow;
    check_instance(inst);
    return inst;
}

inline instance_doc doc_of(const cvp_prime_instance& inst, const rat& p) {
    instance_doc doc;
    doc.p = p;
    doc.tag = "cvp-prime";
    doc.basis = inst.basis;
    doc.target = inst.target;
    doc.params["gamma_pow"] = rat_str(inst.gamma_pow);
    return doc;
}

inline instance_doc doc_of(const bdd_instance& inst, const rat& p) {
    instance_doc doc;
    doc.p = p;
    doc.tag = "bdd";
    doc.basis = inst.basis;
    doc.target = inst.target;
    doc.weight_pow = inst.weight_pow;
    doc.params["alpha_pow"] = rat_str(inst.alpha_pow);
    return doc;
}

inline instance_doc doc_of(const agbdd_instance& inst, const rat& p) {
    instance_doc doc;
    doc.p = p;
    doc.tag = "agbdd";
    doc.basis = inst.basis;
    doc.target = inst.target;
    doc.weight_pow = inst.weight_pow;
    doc.params["r_pow"] = rat_str(inst.r_pow);
    doc.params["alpha_pow"] = rat_str(inst.alpha_pow);
    doc.params["a_bound"] = inst.a_bound.get_str();
    doc.params["g_bound"] = inst.g_bound.get_str();
    return doc;
}

inline instance_doc doc_of(const aggapcvp_instance& inst, const rat& p) {
    instance_doc doc;
    doc.p = p;
    doc.tag = "aggapcvp";
    doc.basis = inst.basis;
    doc.target = inst.target;
    doc.weight_pow = inst.weight_pow;
    doc.params["r_pow"] = rat_str(inst.r_pow);
    doc.params["u_pow"] = rat_str(inst.u_pow);
    doc.params["gamma_prime_pow"] = rat_str(inst.gamma_prime_pow);
    doc.params["a_bound"] = inst.a_bound.get_str();
    doc.params["g_bound"] = inst.g_bound.get_str();
    return doc;
}

inline instance_doc doc_of(const svp_instance& inst, const rat& p) {
    instance_doc doc;
    doc.p = p;
    doc.tag = "svp";
    doc.basis = inst.basis;
    doc.weight_pow = inst.weight_pow;
    doc.params["r_pow"] = rat_str(inst.r_pow);
    doc.params["gamma_pow"] = rat_str(inst.gamma_pow);
    return doc;
}

// Provenance block recorded by every transforming command.
inline json make_provenance(const std::string& stage,
                            const std::map<std::string, std::string>& params,
                            std::uint64_t seed) {
    json j;
    j["stage"] = stage;
    j["params"] = json::object();
    for (const auto& [k, v] : params) j["params"][k] = v;
    j["seed"] = seed;
    j["version"] = software_version;
    return j;
}

}  // namespace latred
