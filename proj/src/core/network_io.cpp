#include "network_io.hpp"

#include <cmath>

#include "expr.hpp"
#include "json_fields.hpp"

namespace msrd {

using nlohmann::json;

std::pair<int, int> line_column(const std::string& text, std::size_t byte_offset) {
    int line = 1, col = 1;
    const std::size_t end = std::min(byte_offset, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse_json_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the offset one past the offending byte.
        const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, col] = line_column(text, off);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         line, col, "");
    }
}

using namespace jf;

NetworkSpec network_from_json(const json& j, const std::string& base) {
    if (!j.is_object()) semantic(base.empty() ? "/" : base, "network must be an object");
    check_keys(j, {"name", "species", "constants", "reactions", "kernel", "theta", "initial"}, base);
    NetworkSpec s;
    if (j.contains("name")) s.name = get_string(j["name"], base + "/name");
    if (j.contains("species")) {
        const auto& sp = j["species"];
        const std::string p = base + "/species";
        if (!sp.is_object()) semantic(p, "expected an object");
        check_keys(sp, {"c", "d"}, p);
        if (sp.contains("c")) s.species_c = get_string(sp["c"], p + "/c");
        if (sp.contains("d")) s.species_d = get_string(sp["d"], p + "/d");
    }
    if (j.contains("constants")) {
        const auto& cs = j["constants"];
        const std::string p = base + "/constants";
        if (!cs.is_object()) semantic(p, "expected an object");
        for (auto it = cs.begin(); it != cs.end(); ++it) {
            if (it.key() == "x" || it.key() == "pi") semantic(p + "/" + it.key(), "reserved name");
            s.constants[it.key()] = get_number(it.value(), p + "/" + it.key());
        }
    }
    const auto& rs = require(j, "reactions", base);
    if (!rs.is_array()) semantic(base + "/reactions", "expected an array");
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const std::string p = base + "/reactions/" + std::to_string(i);
        const auto& r = rs[i];
        if (!r.is_object()) semantic(p, "expected an object");
        check_keys(r, {"label", "class", "gamma_c", "gamma_d", "rate"}, p);
        Reaction rx;
        if (r.contains("label")) rx.label = get_string(r["label"], p + "/label");
        const std::string cls = get_string(require(r, "class", p), p + "/class");
        if (!parse_reaction_class(cls, rx.cls))
            semantic(p + "/class", "unknown reaction class '" + cls + "'");
        if (r.contains("gamma_c")) rx.gamma_c = get_int(r["gamma_c"], p + "/gamma_c");
        if (r.contains("gamma_d")) rx.gamma_d = get_int(r["gamma_d"], p + "/gamma_d");
        const auto& terms = require(r, "rate", p);
        if (!terms.is_array()) semantic(p + "/rate", "expected an array of monomials");
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const std::string q = p + "/rate/" + std::to_string(k);
            const auto& t = terms[k];
            if (!t.is_object()) semantic(q, "expected an object");
            check_keys(t, {"coef", "e_c", "e_d"}, q);
            Monomial m;
            m.coef = get_number(require(t, "coef", q), q + "/coef");
            if (t.contains("e_c")) m.exp_c = get_int(t["e_c"], q + "/e_c");
            if (t.contains("e_d")) m.exp_d = get_int(t["e_d"], q + "/e_d");
            if (m.exp_c < 0 || m.exp_d < 0 || m.exp_c > 16 || m.exp_d > 16)
                semantic(q, "exponents must lie in [0, 16]");
            rx.rate.terms.push_back(m);
        }
        s.reactions.push_back(std::move(rx));
    }
    if (j.contains("kernel")) {
        const auto& k = j["kernel"];
        const std::string p = base + "/kernel";
        if (!k.is_object()) semantic(p, "expected an object");
        check_keys(k, {"type", "values"}, p);
        const std::string type = get_string(require(k, "type", p), p + "/type");
        KernelType kt;
        if (!parse_kernel_type(type, kt)) semantic(p + "/type", "unknown kernel type '" + type + "'");
        if (kt == KernelType::TableLookup) {
            const auto& vals = require(k, "values", p);
            if (!vals.is_array()) semantic(p + "/values", "expected an array");
            std::vector<double> v;
            for (std::size_t i = 0; i < vals.size(); ++i)
                v.push_back(get_number(vals[i], p + "/values/" + std::to_string(i)));
            try {
                s.kernel = Kernel::table(std::move(v));
            } catch (const std::invalid_argument& e) {
                semantic(p + "/values", e.what());
            }
        } else {
            if (k.contains("values")) semantic(p + "/values", "only TableLookup takes values");
            s.kernel = kt == KernelType::RaisedCosine ? Kernel::raised_cosine() : Kernel::constant_box();
        }
    }
    if (j.contains("theta")) s.theta = get_string(j["theta"], base + "/theta");
    if (j.contains("initial")) {
        const auto& in = j["initial"];
        const std::string p = base + "/initial";
        if (!in.is_object()) semantic(p, "expected an object");
        check_keys(in, {"c", "d"}, p);
        if (in.contains("c")) s.initial_c = get_string(in["c"], p + "/c");
        if (in.contains("d")) s.initial_d = get_string(in["d"], p + "/d");
    }
    // Surface expression errors at load time.
    try {
        (void)initial_forms(s);
    } catch (const ParseError& e) {
        semantic(base + e.path, e.what());
    }
    return s;
}

json network_to_json(const NetworkSpec& s) {
    json j;
    j["name"] = s.name;
    j["species"] = {{"c", s.species_c}, {"d", s.species_d}};
    json cs = json::object();
    for (const auto& [k, v] : s.constants) cs[k] = v;
    j["constants"] = cs;
    json rs = json::array();
    for (const auto& r : s.reactions) {
        json terms = json::array();
        for (const auto& m : r.rate.terms) terms.push_back({{"coef", m.coef}, {"e_c", m.exp_c}, {"e_d", m.exp_d}});
        rs.push_back({{"label", r.label},
                      {"class", to_string(r.cls)},
                      {"gamma_c", r.gamma_c},
                      {"gamma_d", r.gamma_d},
                      {"rate", terms}});
    }
    j["reactions"] = rs;
    json k = {{"type", to_string(s.kernel.type())}};
    if (s.kernel.type() == KernelType::TableLookup) k["values"] = s.kernel.table_values();
    j["kernel"] = k;
    j["theta"] = s.theta;
    j["initial"] = {{"c", s.initial_c}, {"d", s.initial_d}};
    return j;
}

NetworkSpec parse_network(const std::string& text) { return network_from_json(parse_json_document(text)); }

std::string serialize_network(const NetworkSpec& spec) { return network_to_json(spec).dump(2) + "\n"; }

InitialForms initial_forms(const NetworkSpec& spec) {
    InitialForms f;
    try {
        f.c = ClosedForm::parse(spec.initial_c, spec.constants);
    } catch (const ExprError& e) {
        throw ParseError(std::string("initial.c: ") + e.what(), 0, 0, "/initial/c");
    }
    try {
        f.d = ClosedForm::parse(spec.initial_d, spec.constants);
    } catch (const ExprError& e) {
        throw ParseError(std::string("initial.d: ") + e.what(), 0, 0, "/initial/d");
    }
    return f;
}

}  // namespace msrd
