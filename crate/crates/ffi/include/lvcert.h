#ifndef LVCERT_H
#define LVCERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; zero is success.
 */
typedef enum LvcertStatus {
  LVCERT_STATUS_OK = 0,
  LVCERT_STATUS_NULL_POINTER = 1,
  LVCERT_STATUS_INVALID_UTF8 = 2,
  LVCERT_STATUS_GRAPH = 3,
  LVCERT_STATUS_FORMULA = 4,
  LVCERT_STATUS_PIPELINE = 5,
  LVCERT_STATUS_LABELS = 6,
  LVCERT_STATUS_EVALUATION = 7,
  LVCERT_STATUS_BUFFER_TOO_SMALL = 8,
  LVCERT_STATUS_PANIC = 9,
} LvcertStatus;

typedef enum LvcertLogic {
  LVCERT_LOGIC_MSO1 = 0,
  LVCERT_LOGIC_MSO2 = 1,
} LvcertLogic;

/**
 * A parsed sentence and the logic it was written in.
 */
typedef struct LvcertFormula LvcertFormula;

/**
 * A parsed graph.
 */
typedef struct LvcertGraph LvcertGraph;

/**
 * One label per vertex of the structure the verifier runs on.
 */
typedef struct LvcertLabeling LvcertLabeling;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *lvcert_last_error(void);

/**
 * Parses an edge list or DIMACS text.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out_graph` writable.
 */
enum LvcertStatus lvcert_graph_parse(const char *text, struct LvcertGraph **out_graph);

/**
 * Number of vertices, or zero for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t lvcert_graph_vertex_count(const struct LvcertGraph *g);

/**
 * # Safety
 * `g` must be null or a handle not freed before.
 */
void lvcert_graph_free(struct LvcertGraph *g);

/**
 * Parses a sentence, or looks up a suite sentence by name; a suite name
 * overrides `logic`.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out_formula` writable.
 */
enum LvcertStatus lvcert_formula_parse(const char *text,
                                       enum LvcertLogic logic,
                                       struct LvcertFormula **out_formula);

/**
 * # Safety
 * `f` must be null or a handle not freed before.
 */
void lvcert_formula_free(struct LvcertFormula *f);

/**
 * Brute-force truth of the formula on the graph.
 *
 * # Safety
 * Handles must be live; `out_holds` must be writable.
 */
enum LvcertStatus lvcert_oracle(const struct LvcertGraph *g,
                                const struct LvcertFormula *f,
                                bool *out_holds);

/**
 * Runs the honest prover. A null formula certifies the width bound alone.
 * MSO2 formulas are certified on the incidence graph, so the labeling then
 * has one label per vertex and per edge.
 *
 * # Safety
 * `g` must be live, `f` null or live, `out_labeling` writable.
 */
enum LvcertStatus lvcert_prove(const struct LvcertGraph *g,
                               const struct LvcertFormula *f,
                               size_t omega,
                               struct LvcertLabeling **out_labeling);

/**
 * Runs one verification round. `verdicts` receives 1 (YES) or 0 (NO) per
 * vertex and must hold [`lvcert_labeling_len`] entries; it may be null.
 *
 * # Safety
 * Handles must be live; `verdicts` must hold `capacity` bytes when non-null;
 * `out_accepted` must be writable.
 */
enum LvcertStatus lvcert_verify(const struct LvcertGraph *g,
                                const struct LvcertFormula *f,
                                size_t omega,
                                const struct LvcertLabeling *labeling,
                                uint8_t *verdicts,
                                size_t capacity,
                                bool *out_accepted);

/**
 * Number of labels, or zero for a null handle.
 *
 * # Safety
 * `l` must be null or live.
 */
size_t lvcert_labeling_len(const struct LvcertLabeling *l);

/**
 * Bit length of the label of vertex `v` (1-based), or zero if out of range.
 *
 * # Safety
 * `l` must be null or live.
 */
size_t lvcert_label_bits(const struct LvcertLabeling *l, size_t v);

/**
 * Flips bit `bit` of the label of vertex `v` (1-based); a no-op when out of
 * range. Meant for fault-injection experiments.
 *
 * # Safety
 * `l` must be null or live.
 */
void lvcert_label_flip(struct LvcertLabeling *l, size_t v, size_t bit);

/**
 * Serializes the labeling as `id[u32] len[u32] bits` records into a new
 * buffer released with [`lvcert_bytes_free`].
 *
 * # Safety
 * `l` must be live; the out pointers must be writable.
 */
enum LvcertStatus lvcert_labeling_write(const struct LvcertLabeling *l,
                                        uint8_t **out_data,
                                        size_t *out_len);

/**
 * # Safety
 * `data` and `len` must come from one [`lvcert_labeling_write`] call.
 */
void lvcert_bytes_free(uint8_t *data, size_t len);

/**
 * Reads `n` labels from the record format.
 *
 * # Safety
 * `data` must hold `len` bytes; `out_labeling` must be writable.
 */
enum LvcertStatus lvcert_labeling_read(const uint8_t *data,
                                       size_t len,
                                       size_t n,
                                       struct LvcertLabeling **out_labeling);

/**
 * # Safety
 * `l` must be null or a handle not freed before.
 */
void lvcert_labeling_free(struct LvcertLabeling *l);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LVCERT_H */
