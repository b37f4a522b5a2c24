#ifndef ASP_DISTILL_H
#define ASP_DISTILL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible functions.
typedef enum AspStatus {
  ASP_STATUS_OK = 0,
  ASP_STATUS_NULL_ARGUMENT = 1,
  ASP_STATUS_INVALID_UTF8 = 2,
  ASP_STATUS_SYNTAX_ERROR = 3,
  ASP_STATUS_NOT_GROUND = 4,
  ASP_STATUS_CAPACITY_EXCEEDED = 5,
  ASP_STATUS_UNSUPPORTED = 6,
  ASP_STATUS_IO_ERROR = 7,
  ASP_STATUS_FORMAT_ERROR = 8,
} AspStatus;

// Opaque handle around a parsed program.
typedef struct AspProgram AspProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *asp_version(void);

// Message of the last failing call on this thread, or null. The pointer is
// valid until the next failing call on the same thread; do not free.
const char *asp_last_error_message(void);

// Parse program text into a new handle.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid pointer.
enum AspStatus asp_program_parse(const char *text, struct AspProgram **out);

// Parse a `.lp` file into a new handle.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum AspStatus asp_program_parse_file(const char *path, struct AspProgram **out);

// Release a program handle. Null is a no-op.
//
// # Safety
// `program` must come from this library and not have been freed already.
void asp_program_free(struct AspProgram *program);

// Number of statements in the program; 0 for null.
//
// # Safety
// `program` must be a live handle or null.
uintptr_t asp_program_rule_count(const struct AspProgram *program);

// Serialize the program, one statement per line.
//
// # Safety
// `program` must be a live handle or null (which yields null).
char *asp_program_to_text(const struct AspProgram *program);

// Predicates of the program, one `name/arity` per line.
//
// # Safety
// `program` must be a live handle or null (which yields null).
char *asp_program_predicates(const struct AspProgram *program);

// New program without any rule mentioning `predicate`.
//
// # Safety
// `program` must be a live handle; `predicate` a valid string; `out` valid.
enum AspStatus asp_program_remove_mentioning(const struct AspProgram *program,
                                             const char *predicate,
                                             struct AspProgram **out);

// New program with `percent`% of rules removed by a seeded generator.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum AspStatus asp_program_remove_random(const struct AspProgram *program,
                                         uint32_t percent,
                                         uint64_t seed,
                                         struct AspProgram **out);

// Enumerate the answer sets of a ground normal program with the built-in
// brute-force checker. The result is a JSON array of arrays of atom strings.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum AspStatus asp_program_answer_sets(const struct AspProgram *program,
                                       uintptr_t atom_budget,
                                       char **out);

// Salvage ASP statements from a free-form model response, one per line.
// `no_facts_guard != 0` drops facts.
//
// # Safety
// `response` must be a valid NUL-terminated string and `out` a valid pointer.
enum AspStatus asp_extract_rules(const char *response, int no_facts_guard, char **out);

// Translate a functional question tree, given as JSON
// (`{"op": "count", "inputs": [...]}` with `scene` leaves), into indexed
// ASP facts.
//
// # Safety
// `tree_json` must be a valid NUL-terminated string and `out` a valid pointer.
enum AspStatus asp_functional_to_facts(const char *tree_json, char **out);

// Release a string returned by this library. Null is a no-op.
//
// # Safety
// `text` must come from this library and not have been freed already.
void asp_string_free(char *text);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ASP_DISTILL_H */
