#ifndef CODESIEVE_H
#define CODESIEVE_H

/* Generated from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call in this interface.
 */
typedef enum cs_status {
  CS_OK = 0,
  /**
   * An input string was not valid UTF-8.
   */
  CS_ERR_UTF8 = 1,
  /**
   * The source text failed to tokenize.
   */
  CS_ERR_LEX = 2,
  /**
   * The token stream failed structural validation (brackets, dedents).
   */
  CS_ERR_PARSE = 3,
  /**
   * A file could not be read, written, or decoded.
   */
  CS_ERR_IO = 4,
  /**
   * A null pointer or out-of-range argument.
   */
  CS_ERR_BAD_ARG = 5,
  /**
   * The corpus contained no usable training samples.
   */
  CS_ERR_EMPTY = 6,
  /**
   * An unexpected internal failure.
   */
  CS_ERR_INTERNAL = 7,
} cs_status;

/**
 * Opaque handle to a trained n-gram model.
 */
typedef struct CsModel CsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Interface version as a static string. Never freed by the caller.
 */
const char *cs_version(void);

/**
 * Remove comments and docstrings from `source`, writing the stripped text
 * to `*out`.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 * On `CS_OK` the caller owns `*out` and must release it with
 * `cs_string_free`.
 */
enum cs_status cs_strip(const char *source, char **out);

/**
 * Run the full rule catalog over `source` and write the findings to `*out`
 * as a JSON array (empty array when the code is clean).
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 * On `CS_OK` the caller owns `*out` and must release it with
 * `cs_string_free`.
 */
enum cs_status cs_analyze_json(const char *source, char **out);

/**
 * Write the duplicate-line fraction of `source` to `*out` (0.0 through
 * 1.0). Works on any text, parseable or not.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum cs_status cs_repetition_score(const char *source, double *out);

/**
 * Train an order-`order` model named `label` on the JSONL corpus at
 * `path`, writing the handle to `*out`.
 *
 * # Safety
 * `path` and `label` must be valid NUL-terminated strings and `out` a
 * valid pointer. On `CS_OK` the caller owns `*out` and must release it
 * with `cs_model_free`.
 */
enum cs_status cs_model_train_jsonl(const char *path,
                                    size_t order,
                                    const char *label,
                                    struct CsModel **out);

/**
 * Load a model previously written by `cs_model_save` (or the CLI),
 * writing the handle to `*out`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 * On `CS_OK` the caller owns `*out` and must release it with
 * `cs_model_free`.
 */
enum cs_status cs_model_load(const char *path, struct CsModel **out);

/**
 * Serialize `model` to `path`.
 *
 * # Safety
 * `model` must be a live handle from this interface and `path` a valid
 * NUL-terminated string.
 */
enum cs_status cs_model_save(const struct CsModel *model, const char *path);

/**
 * Sample from `model`, writing the generated source text to `*out`.
 * `temperature` at or below zero decodes greedily; `max_tokens` bounds the
 * output length.
 *
 * # Safety
 * `model` must be a live handle, `prompt` a valid NUL-terminated string,
 * and `out` a valid pointer. On `CS_OK` the caller owns `*out` and must
 * release it with `cs_string_free`.
 */
enum cs_status cs_generate(const struct CsModel *model,
                           const char *prompt,
                           uint64_t seed,
                           double temperature,
                           size_t max_tokens,
                           char **out);

/**
 * Write the fraction of the curation-banned identifiers (`eval`, `exec`,
 * `pickle`, `marshal`, `md5`, `system`) present in the model's vocabulary
 * to `*out`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum cs_status cs_banned_token_rate(const struct CsModel *model, double *out);

/**
 * Release a string returned by this interface. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a pointer previously returned through an
 * out-parameter here, released at most once.
 */
void cs_string_free(char *s);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a pointer previously returned through an
 * out-parameter here, released at most once.
 */
void cs_model_free(struct CsModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODESIEVE_H */
