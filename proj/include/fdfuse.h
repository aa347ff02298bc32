#ifndef FDFUSE_H
#define FDFUSE_H

/* C interface to the finite-difference kernel-fusion engine: parse a problem
 * spec, configure an execution mode, run it, and read back fields, dumps and
 * metrics. Every call returns a status code; the message for the last failure
 * in the calling thread is available via fdf_last_error(). All out-pointers
 * are written only on FDF_OK. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fdf_status {
  FDF_OK = 0,
  FDF_ERR_PARSE = 1,    /* spec text rejected (message has line:col) */
  FDF_ERR_VALIDATE = 2, /* spec parsed but semantically invalid */
  FDF_ERR_CONFIG = 3,   /* bad run configuration / flag combination */
  FDF_ERR_IO = 4,       /* file or transport failure */
  FDF_ERR_NUMERIC = 5,  /* non-finite value detected during the run */
  FDF_ERR_INTERNAL = 6,
} fdf_status;

typedef struct fdf_problem fdf_problem;
typedef struct fdf_config fdf_config;
typedef struct fdf_result fdf_result;

/* Message from this thread's most recent failing call ("" if none). The
 * buffer stays valid until the next failing call in the same thread. */
const char* fdf_last_error(void);

/* -------- problem -------- */

fdf_status fdf_problem_parse(const char* text, fdf_problem** out);
fdf_status fdf_problem_parse_file(const char* path, fdf_problem** out);
/* Semantic validation. *ok = 1 when there are no errors (warnings allowed);
 * *report (may be empty) lists diagnostics, one per line. */
fdf_status fdf_problem_validate(const fdf_problem* p, char** report, int* ok);
/* Canonical spec text (parses back to the same problem). */
fdf_status fdf_problem_print(const fdf_problem* p, char** text);
/* Fused kernel listing plus per-point cost model. */
fdf_status fdf_problem_listing(const fdf_problem* p, char** text);
void fdf_problem_free(fdf_problem* p);

/* -------- config -------- */

/* Defaults: mode seq, 1 thread, 1 rank, alignment 64, vector size 8,
 * L3 33*2^20 bytes, comm blocks 4, inproc transport. */
fdf_config* fdf_config_new(void);
/* mode: seq | forkjoin | task | dist-pure | dist-forkjoin | dist-task */
fdf_status fdf_config_set_mode(fdf_config* c, const char* mode);
/* keys: threads, ranks, alignment, vector-size, l3-size, comm-blocks,
 * steps-override, dump-every, window-steps, check-finite, trace, baseline,
 * proc-rank (run only this rank of an externally launched socket run) */
fdf_status fdf_config_set_int(fdf_config* c, const char* key, int64_t value);
/* keys: transport (inproc|socket), socket-dir, rank-grid ("AxBxC"),
 * spec-name */
fdf_status fdf_config_set_str(fdf_config* c, const char* key,
                              const char* value);
void fdf_config_free(fdf_config* c);

/* -------- run -------- */

fdf_status fdf_run(const fdf_problem* p, const fdf_config* c,
                   fdf_result** out);

fdf_status fdf_result_metrics_kv(const fdf_result* r, char** text);
fdf_status fdf_result_metrics_table(const fdf_result* r, char** text);
/* Task-mode execution trace (one task per line; empty unless the trace
 * config flag was set and a task mode ran). */
fdf_status fdf_result_trace_text(const fdf_result* r, char** text);
/* Final state to `path`; cadence dumps (if dump-every was set) go to
 * path.step<N>. */
fdf_status fdf_result_write_dump(const fdf_result* r, const char* path);

/* Field access. Data is interior-only, X fastest, components interleaved
 * per point; pointers stay valid until fdf_result_free. */
fdf_status fdf_result_field_count(const fdf_result* r, int* count);
fdf_status fdf_result_field_info(const fdf_result* r, int index,
                                 const char** name, int* comps, int64_t n[3]);
fdf_status fdf_result_field_data(const fdf_result* r, int index,
                                 const double** data, int64_t* count);
void fdf_result_free(fdf_result* r);

/* -------- dump files -------- */

/* tol = 0 compares bit patterns; tol > 0 bounds |a-b|. *pass = 1 on match;
 * *report summarizes max abs/rel error and the first mismatch. Extent or
 * name mismatches return FDF_ERR_CONFIG. */
fdf_status fdf_compare_dumps(const char* path_a, const char* path_b,
                             double tol, char** report, int* pass);

/* Frees any char* returned through an out-parameter above. */
void fdf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* FDFUSE_H */
