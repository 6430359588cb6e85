#ifndef BAERKIT_H
#define BAERKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; the numeric values match the command-line exit codes where
 they overlap.
 */
typedef enum BkStatus {
  BK_OK = 0,
  BK_VERDICT_FAIL = 1,
  BK_PARSE_ERROR = 2,
  BK_CLASS_UNDETERMINED = 3,
  BK_CAP_GUARD = 4,
  BK_ACTION_INVALID = 5,
  BK_NULL_POINTER = 6,
  BK_INVALID_ARGUMENT = 7,
  BK_INTERNAL_ERROR = 8,
} BkStatus;

/*
 Parsed input file.
 */
typedef struct BkInput BkInput;

/*
 Abelian group invariants.
 */
typedef struct BkInvariants BkInvariants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses an input file given as NUL-terminated UTF-8 text.

 # Safety
 `text` must be a valid C string and `out` a valid pointer.
 */
enum BkStatus bk_input_parse(const char *text, struct BkInput **out);

/*
 # Safety
 `input` must come from `bk_input_parse` or be null.
 */
void bk_input_free(struct BkInput *input);

/*
 Number of group blocks in the input, 0 for a null handle.

 # Safety
 `input` must be a live handle or null.
 */
uintptr_t bk_input_group_count(const struct BkInput *input);

/*
 Baer-invariant of group `group_index` for the variety parameter `c`.
 A `class_bound` of 0 asks for detection; a `cap_guard` of 0 uses the
 default budget.

 # Safety
 `input` must be a live handle and `out` a valid pointer.
 */
enum BkStatus bk_multiplier(const struct BkInput *input,
                            uintptr_t group_index,
                            uint32_t c,
                            uint32_t class_bound,
                            uint64_t cap_guard,
                            struct BkInvariants **out);

/*
 Builds the semidirect product described by the input's action block and
 verifies its decomposition. Returns `BkOk` when every check passes and
 `BkVerdictFail` otherwise; in both cases the three invariants are
 written. Any of the output pointers may be null.

 # Safety
 `input` must be a live handle; non-null outputs must be valid pointers.
 */
enum BkStatus bk_semidirect_verify(const struct BkInput *input,
                                   uint32_t c,
                                   uint32_t class_bound,
                                   uint64_t cap_guard,
                                   struct BkInvariants **out_g,
                                   struct BkInvariants **out_b,
                                   struct BkInvariants **out_complement);

/*
 # Safety
 `inv` must be a live handle or null.
 */
uintptr_t bk_invariants_free_rank(const struct BkInvariants *inv);

/*
 Torsion invariants as a comma-separated list (`"2,4"`, empty when
 trivial). Null for a null handle.

 # Safety
 `inv` must be a live handle or null.
 */
char *bk_invariants_torsion_string(const struct BkInvariants *inv);

/*
 # Safety
 `inv` must come from this library or be null.
 */
void bk_invariants_free(struct BkInvariants *inv);

/*
 Copy of the last error message on this thread, or null.
 */
char *bk_last_error(void);

/*
 # Safety
 `s` must come from this library or be null.
 */
void bk_string_free(char *s);

/*
 Rank of `γ_m/γ_{m+1}` of the free group on `n` generators.
 */
uintptr_t bk_witt_dimension(uintptr_t n, uintptr_t m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAERKIT_H */
