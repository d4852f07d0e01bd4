#ifndef MDS53_H
#define MDS53_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes.
enum Mds53Status
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  MDS53_STATUS_OK = 0,
  MDS53_STATUS_NULL_POINTER = 1,
  MDS53_STATUS_INVALID_ARGUMENT = 2,
  MDS53_STATUS_INVALID_PARAMS = 3,
  MDS53_STATUS_SINGULAR = 4,
  MDS53_STATUS_IO = 5,
  MDS53_STATUS_STORE = 6,
  MDS53_STATUS_BUFFER_TOO_SMALL = 7,
  MDS53_STATUS_PANIC = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum Mds53Status Mds53Status;
#else
typedef int32_t Mds53Status;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// A built code instance.
typedef struct Mds53Code Mds53Code;

// A repair plan for one node of a code.
typedef struct Mds53Plan Mds53Plan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or an empty string.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *mds53_last_error_message(void);

// Builds the canonical GF(4) code.
//
// # Safety
// `out` must be valid for writes.
Mds53Status mds53_code_new_canonical(struct Mds53Code **out);

// Builds a code from a parameter string such as
// `"q=4;lambda=2;mu=3;theta=3;eta=2"`. Tuples violating any validity
// condition are rejected with `MDS53_STATUS_INVALID_PARAMS`.
//
// # Safety
// `params` must be NUL-terminated; `out` must be valid for writes.
Mds53Status mds53_code_from_params(const char *params, struct Mds53Code **out);

// # Safety
// `code` must come from a constructor above and not be used afterwards.
void mds53_code_free(struct Mds53Code *code);

// Writes the NUL-terminated parameter string into `buf`. `needed`, when
// non-null, receives the required size including the terminator, also on
// `MDS53_STATUS_BUFFER_TOO_SMALL`.
//
// # Safety
// `code` must be a live handle; `buf` must hold `cap` bytes.
Mds53Status mds53_code_params(const struct Mds53Code *code, char *buf, size_t cap, size_t *needed);

// Encodes six field elements into ten (two per node).
//
// # Safety
// `message` must hold 6 bytes and `codeword` 10.
Mds53Status mds53_encode_scalars(const struct Mds53Code *code,
                                 const uint8_t *message,
                                 uint8_t *codeword);

// Decodes six elements from the segments of three distinct nodes, given
// in the order of `nodes`.
//
// # Safety
// `nodes` must hold 3 bytes, `segments` 6 and `message` 6.
Mds53Status mds53_decode_scalars(const struct Mds53Code *code,
                                 const uint8_t *nodes,
                                 const uint8_t *segments,
                                 uint8_t *message);

// Encodes six blocks of `symbol_size` bytes into ten. GF(4) codes only.
//
// # Safety
// `message` must hold `6 * symbol_size` bytes and `codeword`
// `10 * symbol_size`.
Mds53Status mds53_encode_blocks(const struct Mds53Code *code,
                                const uint8_t *message,
                                size_t symbol_size,
                                uint8_t *codeword);

// Block version of [`mds53_decode_scalars`].
//
// # Safety
// `nodes` must hold 3 bytes, `segments` `6 * symbol_size` and `message`
// `6 * symbol_size`.
Mds53Status mds53_decode_blocks(const struct Mds53Code *code,
                                const uint8_t *nodes,
                                const uint8_t *segments,
                                size_t symbol_size,
                                uint8_t *message);

// Derives the repair plan for `failed` (1..=5).
//
// # Safety
// `code` must be a live handle; `out` must be valid for writes.
Mds53Status mds53_plan_new(const struct Mds53Code *code, uint8_t failed, struct Mds53Plan **out);

// # Safety
// `plan` must come from [`mds53_plan_new`] and not be used afterwards.
void mds53_plan_free(struct Mds53Plan *plan);

// The four helper node ids in ascending order; downloads passed to the
// execute functions follow this order.
//
// # Safety
// `nodes` must hold 4 bytes.
Mds53Status mds53_plan_helpers(const struct Mds53Plan *plan, uint8_t *nodes);

// The two coefficients helper `node` applies to its segment.
//
// # Safety
// `vector` must hold 2 bytes.
Mds53Status mds53_plan_download_vector(const struct Mds53Plan *plan, uint8_t node, uint8_t *vector);

// Computes the block helper `node` sends, from its two stored blocks.
//
// # Safety
// `segment` must hold `2 * symbol_size` bytes and `out` `symbol_size`.
Mds53Status mds53_plan_helper_symbol_blocks(const struct Mds53Plan *plan,
                                            uint8_t node,
                                            const uint8_t *segment,
                                            size_t symbol_size,
                                            uint8_t *out);

// Rebuilds the failed node's two elements from four downloaded elements
// in helper order.
//
// # Safety
// `downloads` must hold 4 bytes and `segment` 2.
Mds53Status mds53_plan_execute_scalars(const struct Mds53Plan *plan,
                                       const uint8_t *downloads,
                                       uint8_t *segment);

// Block version of [`mds53_plan_execute_scalars`].
//
// # Safety
// `downloads` must hold `4 * symbol_size` bytes and `segment`
// `2 * symbol_size`.
Mds53Status mds53_plan_execute_blocks(const struct Mds53Plan *plan,
                                      const uint8_t *downloads,
                                      size_t symbol_size,
                                      uint8_t *segment);

// Stores the file at `input` as a five-node cluster in `dir`.
//
// # Safety
// Path arguments must be NUL-terminated.
Mds53Status mds53_cluster_encode_file(const struct Mds53Code *code,
                                      const char *input,
                                      const char *dir,
                                      size_t symbol_size);

// Truncates one node's file and marks it failed.
//
// # Safety
// `dir` must be NUL-terminated.
Mds53Status mds53_cluster_fail(const char *dir, uint8_t node);

// Repairs one node. `downloaded_bytes`, when non-null, receives the repair
// traffic.
//
// # Safety
// `dir` must be NUL-terminated; `downloaded_bytes` null or writable.
Mds53Status mds53_cluster_repair(const char *dir, uint8_t node, uint64_t *downloaded_bytes);

// Decodes the stored file from any three available nodes into `output`.
//
// # Safety
// Path arguments must be NUL-terminated.
Mds53Status mds53_cluster_reconstruct(const char *dir, const char *output);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDS53_H */
