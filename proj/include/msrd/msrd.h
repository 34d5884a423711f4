#ifndef MSRD_MSRD_H
#define MSRD_MSRD_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MSRD_API __declspec(dllexport)
#else
#define MSRD_API __attribute__((visibility("default")))
#endif

typedef enum msrd_status {
    MSRD_OK = 0,
    MSRD_INVALID_ARGUMENT = 1,
    MSRD_PARSE = 2,
    MSRD_VALIDATION = 3,
    MSRD_RUNTIME = 4,
    MSRD_EVENT_CAP = 5,
    MSRD_POSITIVITY = 6,
    MSRD_IO = 7,
    MSRD_CHECK_FAILED = 8,
    MSRD_NONCONVERGENT = 9
} msrd_status;

typedef struct msrd_network msrd_network;
typedef struct msrd_result msrd_result;

/* "msrd 0.1.0"; static storage. */
MSRD_API const char* msrd_version(void);

/* Message of the last failing call on this thread; empty if none. Valid until the next call. */
MSRD_API const char* msrd_last_error(void);

/* Frees strings returned through char** out-parameters. */
MSRD_API void msrd_string_free(char* s);

/* Networks. */
MSRD_API msrd_status msrd_network_parse(const char* json_text, msrd_network** out);
MSRD_API msrd_status msrd_network_reference(msrd_network** out);
/* Writes the violation list as a JSON array; *n_violations may be NULL. */
MSRD_API msrd_status msrd_network_validate(const msrd_network* net, size_t* n_violations, char** violations_json);
MSRD_API msrd_status msrd_network_serialize(const msrd_network* net, char** json_text);
MSRD_API void msrd_network_free(msrd_network* net);

/* Runs a subcommand (validate, simulate, solve-limit, spectral-check, martingale-check, lln-sweep).
 * config_json may be NULL for defaults; overrides_json is a flat object or NULL; base_dir resolves
 * relative network_file entries (NULL means "."). A result is produced whenever the command ran,
 * including check failures; the returned status mirrors its exit code. */
MSRD_API msrd_status msrd_run(const char* command, const char* config_json, const char* overrides_json,
                              const char* base_dir, msrd_result** out);

/* 0 ok, 1 runtime failure, 2 validation failure, 3 check failure. */
MSRD_API int msrd_result_exit_code(const msrd_result* r);
MSRD_API const char* msrd_result_summary(const msrd_result* r);
MSRD_API const char* msrd_result_diagnostics(const msrd_result* r);
/* Resolved output directory from the config. */
MSRD_API const char* msrd_result_output_dir(const msrd_result* r);
MSRD_API size_t msrd_result_artifact_count(const msrd_result* r);
MSRD_API const char* msrd_result_artifact_name(const msrd_result* r, size_t i);
/* Artifact bytes may contain NUL (events.bin); use the size. */
MSRD_API const char* msrd_result_artifact_data(const msrd_result* r, size_t i, size_t* size);
MSRD_API void msrd_result_free(msrd_result* r);

#ifdef __cplusplus
}
#endif

#endif
