#ifndef CDT_C_H
#define CDT_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Stable C surface over the tree library. Every function returns a status
 * code; on failure the thread-local message from cdt_last_error() explains
 * what went wrong. All char* outputs are heap strings owned by the caller
 * and must be released with cdt_string_free(). Output parameters are only
 * written on CDT_OK. */

typedef enum cdt_status {
  CDT_OK = 0,
  CDT_ERR_INVALID_ARGUMENT = 1,
  CDT_ERR_DATA = 2,
  CDT_ERR_CONFIG = 3,
  CDT_ERR_IO = 4,
  CDT_ERR_UNSUPPORTED_SCHEMA = 5,
  CDT_ERR_ORACLE_TRANSPORT = 6,
  CDT_ERR_ORACLE_PROTOCOL = 7,
  CDT_ERR_MISSING_TRANSCRIPT = 8,
  CDT_ERR_INTERNAL = 9
} cdt_status;

typedef struct cdt_corpus cdt_corpus;
typedef struct cdt_tree cdt_tree;
typedef struct cdt_oracle cdt_oracle;

/* Message for the most recent failure on this thread; never NULL. */
const char* cdt_last_error(void);

void cdt_string_free(char* s);
void cdt_corpus_free(cdt_corpus* c);
void cdt_tree_free(cdt_tree* t);
void cdt_oracle_free(cdt_oracle* o);

/* ---- corpus ----------------------------------------------------------- */

/* Loads a JSONL observation file. Malformed lines are tolerated and listed
 * by cdt_corpus_errors_json; duplicate ids are fatal. */
cdt_status cdt_corpus_load(const char* jsonl_path, cdt_corpus** out);

cdt_status cdt_corpus_group_count(const cdt_corpus* c, size_t* out);
/* Group names come back sorted; index is 0-based. */
cdt_status cdt_corpus_group_name(const cdt_corpus* c, size_t index, char** out);
cdt_status cdt_corpus_group_size(const cdt_corpus* c, const char* group, size_t* out);
/* JSON array of {"line": N, "message": "..."} for skipped malformed lines. */
cdt_status cdt_corpus_errors_json(const cdt_corpus* c, char** out);
/* JSON array of the group's observations in chronological order. */
cdt_status cdt_corpus_observations_json(const cdt_corpus* c, const char* group, char** out);

/* ---- oracle ----------------------------------------------------------- */

/* config_json example:
 *   {"provider": {"kind": "hash" | "planted" | "http", ...},
 *    "transcript": {"mode": "record" | "replay" | "passthrough", "dir": "..."}}
 * A replay transcript needs no provider. HTTP credentials come from the
 * environment variable named in the provider block, never from this JSON. */
cdt_status cdt_oracle_create(const char* config_json, cdt_oracle** out);

/* Cumulative call counts as {"generate": N, "judge_gate": N, ...}. */
cdt_status cdt_oracle_counts_json(const cdt_oracle* o, char** out);

/* ---- trees ------------------------------------------------------------ */

cdt_status cdt_tree_load(const char* path, cdt_tree** out);
cdt_status cdt_tree_save(const cdt_tree* t, const char* path);
cdt_status cdt_tree_to_json(const cdt_tree* t, char** out);
cdt_status cdt_tree_from_json(const char* json_text, cdt_tree** out);
/* DOT graph with gate questions on edges and statements in node labels. */
cdt_status cdt_tree_to_dot(const cdt_tree* t, char** out);
/* Human-oriented indented outline of gates and statements. */
cdt_status cdt_tree_outline(const cdt_tree* t, char** out);
/* JSON array of structural problems; [] means the tree is well formed. */
cdt_status cdt_tree_validate(const cdt_tree* t, char** out);
cdt_status cdt_tree_group(const cdt_tree* t, char** out);
cdt_status cdt_tree_statement_count(const cdt_tree* t, size_t* out);

/* ---- pipelines -------------------------------------------------------- */

/* options_json (may be NULL or "{}"):
 *   {"hyperparams": {...}, "seed": 0, "timestamp": "", "n_target": 4,
 *    "n_upper": 8} */
cdt_status cdt_build(const cdt_corpus* corpus, const char* group, const char* options_json,
                     cdt_oracle* oracle, cdt_tree** out);

/* Splits the group's observations by membership in the tree: ids already
 * routed at the root act as history (text lookup for existing evidence
 * rows), the rest are folded in as new arrivals. Fails with CDT_ERR_DATA
 * when nothing new is present. options_json: {"hyperparams": {...},
 * "timestamp": ""}. */
cdt_status cdt_adapt(const cdt_tree* tree, const cdt_corpus* corpus, const char* group,
                     const char* options_json, cdt_oracle* oracle, cdt_tree** out_tree,
                     char** out_report_json);

/* Re-grounds a source tree on a data-scarce target group's corpus. */
cdt_status cdt_transfer(const cdt_tree* tree, const cdt_corpus* corpus,
                        const char* target_group, const char* options_json,
                        cdt_oracle* oracle, cdt_tree** out_tree, char** out_report_json);

/* question may be NULL or empty for the default next-action question;
 * out_trace_json may be NULL when the caller does not need the traversal. */
cdt_status cdt_predict(const cdt_tree* tree, const char* context, const char* question,
                       cdt_oracle* oracle, char** out_prediction, char** out_trace_json);

/* kind: "vanilla" | "human_profile" | "summarization" | "rag".
 * options_json: {"profile_text": "...", "rag_k": 8, "summary_block": 40}.
 * corpus/group may be NULL for the vanilla baseline. */
cdt_status cdt_baseline_predict(const cdt_corpus* corpus, const char* group, const char* kind,
                                const char* context, const char* question,
                                const char* options_json, cdt_oracle* oracle, char** out);

/* Grades one prediction against the observation's recorded action.
 * observation_json is a single observation object; method is a free-form
 * label copied into the record. */
cdt_status cdt_evaluate_prediction(const char* observation_json, const char* prediction,
                                   const char* method, cdt_oracle* oracle,
                                   char** out_record_json);

/* ---- analysis --------------------------------------------------------- */

/* options_json: {"tau": 0.7, "top_n": 20}. Result JSON carries the pooled
 * similarity samples, the U statistic, p-value, and the verdict. */
cdt_status cdt_analyze_drift(const cdt_corpus* corpus, const char* group,
                             const char* options_json, cdt_oracle* oracle, char** out_json);

/* mode: "bss" (corpus groups) | "emd_gate" | "emd_stmt" (tree files).
 * spec_json: {"groups": ["a", ...]}            for bss (needs corpus)
 *            {"trees": [{"name": "...", "path": "..."}, ...]} for emd modes
 * plus optional {"tau": ..., "top_n": ...}. out_json (optional) reports the
 * matrix with per-cell errors and matched-pair evidence. */
cdt_status cdt_analyze_similarity(const cdt_corpus* corpus, const char* mode,
                                  const char* spec_json, cdt_oracle* oracle,
                                  char** out_csv, char** out_json);

/* ---- experiment harness ----------------------------------------------- */

/* Runs a full benchmark plan and writes every artifact under out_dir.
 * config_json follows the run-config schema (data, plan, groups, methods,
 * hyperparams, ...). When oracle is NULL one is built from the config's
 * "oracle" block. out_report_json lists the per-cell outcomes. */
cdt_status cdt_run_experiment(const char* config_json, const char* out_dir,
                              cdt_oracle* oracle, char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* CDT_C_H */
