#include "msrd/msrd.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "limit.hpp"
#include "network_io.hpp"
#include "ssa.hpp"

struct msrd_network {
    msrd::NetworkSpec spec;
};

struct msrd_result {
    msrd::CommandResult result;
    std::string output_dir;
};

namespace {

thread_local std::string g_last_error;

msrd_status fail(msrd_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.data(), s.size() + 1);
    return p;
}

std::string parse_message(const msrd::ParseError& e) {
    std::string m = e.what();
    if (e.line > 0 && m.find("line ") == std::string::npos)
        m += " (line " + std::to_string(e.line) + ", column " + std::to_string(e.column) + ")";
    if (!e.path.empty()) m += " at " + e.path;
    return m;
}

std::string violations_message(const msrd::ValidationError& e) {
    std::string m = "network validation failed:";
    for (const auto& v : e.violations) {
        m += "\n  ";
        if (v.reaction_index >= 0) m += "reaction " + std::to_string(v.reaction_index + 1) + ": ";
        m += v.reason;
    }
    return m;
}

// Maps the in-flight exception to a status and records its message.
msrd_status translate() {
    try {
        throw;
    } catch (const msrd::ParseError& e) {
        return fail(MSRD_PARSE, parse_message(e));
    } catch (const msrd::ValidationError& e) {
        return fail(MSRD_VALIDATION, violations_message(e));
    } catch (const msrd::NonConvergentError& e) {
        return fail(MSRD_NONCONVERGENT, e.what());
    } catch (const msrd::PositivityViolation& e) {
        return fail(MSRD_POSITIVITY, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(MSRD_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MSRD_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return fail(MSRD_RUNTIME, e.what());
    } catch (...) {
        return fail(MSRD_RUNTIME, "unknown error");
    }
}

msrd_status status_of(const msrd::CommandResult& r) {
    switch (r.exit_code) {
        case 0: return MSRD_OK;
        case 2: return MSRD_VALIDATION;
        case 3: return MSRD_CHECK_FAILED;
        default: break;
    }
    if (r.failure == "event_cap") return MSRD_EVENT_CAP;
    if (r.failure == "positivity") return MSRD_POSITIVITY;
    if (r.failure == "nonconvergent") return MSRD_NONCONVERGENT;
    return MSRD_RUNTIME;
}

}  // namespace

extern "C" {

const char* msrd_version(void) { return msrd::kVersion; }

const char* msrd_last_error(void) { return g_last_error.c_str(); }

void msrd_string_free(char* s) { std::free(s); }

msrd_status msrd_network_parse(const char* json_text, msrd_network** out) {
    g_last_error.clear();
    if (!json_text || !out) return fail(MSRD_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    try {
        auto* n = new msrd_network{msrd::parse_network(json_text)};
        *out = n;
        return MSRD_OK;
    } catch (...) {
        return translate();
    }
}

msrd_status msrd_network_reference(msrd_network** out) {
    g_last_error.clear();
    if (!out) return fail(MSRD_INVALID_ARGUMENT, "null argument");
    try {
        *out = new msrd_network{msrd::reference_network()};
        return MSRD_OK;
    } catch (...) {
        *out = nullptr;
        return translate();
    }
}

msrd_status msrd_network_validate(const msrd_network* net, size_t* n_violations, char** violations_json) {
    g_last_error.clear();
    if (!net || !violations_json) return fail(MSRD_INVALID_ARGUMENT, "null argument");
    *violations_json = nullptr;
    try {
        const auto v = msrd::validate_network(net->spec);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& x : v)
            j.push_back({{"reaction", x.reaction_index >= 0 ? nlohmann::json(x.reaction_index + 1) : nlohmann::json()},
                         {"reason", x.reason}});
        if (n_violations) *n_violations = v.size();
        *violations_json = dup_string(j.dump());
        return MSRD_OK;
    } catch (...) {
        return translate();
    }
}

msrd_status msrd_network_serialize(const msrd_network* net, char** json_text) {
    g_last_error.clear();
    if (!net || !json_text) return fail(MSRD_INVALID_ARGUMENT, "null argument");
    *json_text = nullptr;
    try {
        *json_text = dup_string(msrd::serialize_network(net->spec));
        return MSRD_OK;
    } catch (...) {
        return translate();
    }
}

void msrd_network_free(msrd_network* net) { delete net; }

msrd_status msrd_run(const char* command, const char* config_json, const char* overrides_json, const char* base_dir,
                     msrd_result** out) {
    g_last_error.clear();
    if (!command || !out) return fail(MSRD_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    try {
        msrd::RunConfig cfg = config_json ? msrd::parse_config(config_json, base_dir ? base_dir : ".")
                                          : msrd::RunConfig{};
        if (overrides_json) {
            const nlohmann::json o = msrd::parse_json_document(overrides_json);
            msrd::apply_overrides(cfg, command, o);
        }
        auto* r = new msrd_result{msrd::run_command(command, cfg), cfg.output_dir};
        *out = r;
        const msrd_status s = status_of(r->result);
        if (s != MSRD_OK) g_last_error = r->result.summary;
        return s;
    } catch (...) {
        return translate();
    }
}

int msrd_result_exit_code(const msrd_result* r) { return r ? r->result.exit_code : 1; }

const char* msrd_result_summary(const msrd_result* r) { return r ? r->result.summary.c_str() : ""; }

const char* msrd_result_diagnostics(const msrd_result* r) { return r ? r->result.diagnostics.c_str() : ""; }

const char* msrd_result_output_dir(const msrd_result* r) { return r ? r->output_dir.c_str() : ""; }

size_t msrd_result_artifact_count(const msrd_result* r) { return r ? r->result.artifacts.size() : 0; }

const char* msrd_result_artifact_name(const msrd_result* r, size_t i) {
    if (!r || i >= r->result.artifacts.size()) return nullptr;
    return r->result.artifacts[i].name.c_str();
}

const char* msrd_result_artifact_data(const msrd_result* r, size_t i, size_t* size) {
    if (!r || i >= r->result.artifacts.size()) {
        if (size) *size = 0;
        return nullptr;
    }
    const std::string& d = r->result.artifacts[i].data;
    if (size) *size = d.size();
    return d.data();
}

void msrd_result_free(msrd_result* r) { delete r; }

}  // extern "C"
