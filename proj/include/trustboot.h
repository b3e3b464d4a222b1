/* C interface to the trustboot commissioning simulator.
 *
 * Every entry point returns TB_OK (0) on success or a nonzero tb_status.
 * On failure tb_last_error() describes what went wrong; the string stays
 * valid until the next call on the same thread. Reports are opaque and
 * must be released with tb_report_free().
 */
#ifndef TRUSTBOOT_H
#define TRUSTBOOT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
    TB_OK = 0,
    TB_E_AUTH_FAIL,
    TB_E_DEGENERATE_SHARE,
    TB_E_EMPTY_PASSWORD,
    TB_E_MALFORMED_PACKET,
    TB_E_DUPLICATE_EMPLOYEE,
    TB_E_WRONG_PASSWORD,
    TB_E_INTEGRITY_ERROR,
    TB_E_BAD_CARD_SIGNATURE,
    TB_E_ALREADY_PROVISIONED,
    TB_E_WRONG_PHASE,
    TB_E_MASTER_NOT_TRUSTED,
    TB_E_UNKNOWN_EMPLOYEE,
    TB_E_APARAM_MISMATCH,
    TB_E_REPLAY_DETECTED,
    TB_E_UNKNOWN_MASTER,
    TB_E_BAD_MASTER_SIGNATURE,
    TB_E_BAD_EMS_SIGNATURE,
    TB_E_BAD_SM_SIGNATURE,
    TB_E_WRONG_NETWORK,
    TB_E_COUNTER_MISMATCH,
    TB_E_NOT_VERIFIED,
    TB_E_WRONG_CAPABILITY,
    TB_E_UNKNOWN_PRINCIPAL,
    TB_E_INDEX_OUT_OF_RANGE,
    TB_E_CONFIG_ERROR,
    TB_E_IO_ERROR,
    TB_E_INTERNAL
} tb_status;

typedef struct tb_report tb_report;

typedef struct tb_run_options {
    int has_seed;        /* nonzero: seed below overrides the config file */
    uint64_t seed;
    const char* out_dir; /* NULL or empty: no artifact files written */
    int structured;      /* nonzero: render reports as JSON */
} tb_run_options;

/* Run one scenario from a JSON config file. */
int tb_run_scenario(const char* config_path, const tb_run_options* opts, tb_report** out);

/* Same, but the config is passed as JSON text instead of a path. */
int tb_run_scenario_text(const char* config_json, const tb_run_options* opts,
                         tb_report** out);

/* Run the adversary battery derived from a base scenario config. */
int tb_attack_suite(const char* config_path, const tb_run_options* opts, tb_report** out);

/* Re-run the secrecy analysis over a recorded transcript.sym file. */
int tb_check_transcript(const char* sym_path, const tb_run_options* opts, tb_report** out);

/* Process exit code encoded in the report: 0 ok, 1 failure, 2 expected rejection. */
int tb_report_exit_code(const tb_report* report);

/* Rendered report text; owned by the report. */
const char* tb_report_render(const tb_report* report);

/* Hex transcript digest for single-scenario runs; empty otherwise. */
const char* tb_report_digest(const tb_report* report);

void tb_report_free(tb_report* report);

const char* tb_status_name(int status);

/* Detail for the most recent failure on this thread ("" when none). */
const char* tb_last_error(void);

const char* tb_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TRUSTBOOT_H */
