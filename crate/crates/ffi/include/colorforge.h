#ifndef COLORFORGE_H
#define COLORFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_ARGUMENT = 2,
  CF_STATUS_VALIDATION = 3,
  CF_STATUS_PARSE = 4,
  CF_STATUS_IO = 5,
  CF_STATUS_CANCELLED = 6,
  CF_STATUS_INTERNAL = 7,
} CfStatus;

/**
 * Opaque colormap document.
 */
typedef struct CfColormap CfColormap;

typedef struct {
  double l;
  double a;
  double b;
} CfLab;

/**
 * Companded sRGB, channels in [0, 1].
 */
typedef struct {
  double r;
  double g;
  double b;
} CfRgb;

typedef struct {
  size_t n;
  double uniformity;
  double smoothness;
  double discriminability;
  double cvd_discriminability;
  double retention;
} CfEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cf_last_error(void);

/**
 * Library version as a static string.
 */
const char *cf_version(void);

double cf_delta_e_2000(CfLab a, CfLab b);

bool cf_in_gamut(CfLab c);

CfLab cf_srgb_to_lab(CfRgb c);

/**
 * Converts to sRGB, clamping out-of-gamut channels.
 */
CfRgb cf_lab_to_srgb(CfLab c);

/**
 * Optimizes a colormap.
 *
 * `profile` is a name such as `"linear"` or `"diverging-inv"`. `n` of 0 and
 * NaN bounds select the profile defaults. `config_json` (optimizer settings
 * overriding the defaults) and `shelf_json` (an array of preference blocks)
 * may be NULL.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
CfStatus cf_generate(const char *profile,
                     size_t n,
                     double l_min,
                     double l_max,
                     const char *config_json,
                     const char *shelf_json,
                     CfColormap **out);

/**
 * Parses a document in `format` (`"json"`, `"csv"` or `"hex"`).
 *
 * # Safety
 * `data` must point to `len` readable bytes; `format` must be
 * NUL-terminated; `out` must be writable.
 */
CfStatus cf_colormap_import(const uint8_t *data, size_t len, const char *format, CfColormap **out);

/**
 * Serializes `map` in `format`; the result is freed with `cf_string_free`.
 *
 * # Safety
 * `map` must be a live handle; `format` NUL-terminated; `out` writable.
 */
CfStatus cf_colormap_export(const CfColormap *map, const char *format, char **out);

/**
 * Number of control points, or 0 for NULL.
 *
 * # Safety
 * `map` must be NULL or a live handle.
 */
size_t cf_colormap_len(const CfColormap *map);

/**
 * # Safety
 * `map` must be a live handle and `out` writable.
 */
CfStatus cf_colormap_point(const CfColormap *map, size_t index, CfLab *out);

/**
 * Color at scale position `t` in [0, 1], interpolated in Lab.
 *
 * # Safety
 * `map` must be a live handle and `out` writable.
 */
CfStatus cf_colormap_sample(const CfColormap *map, double t, CfLab *out);

/**
 * Writes `#rrggbb` and a terminating NUL for control point `index`; `buf`
 * needs at least 8 bytes.
 *
 * # Safety
 * `map` must be a live handle and `buf` writable for `buf_len` bytes.
 */
CfStatus cf_colormap_hex(const CfColormap *map, size_t index, char *buf, size_t buf_len);

/**
 * Evaluates `map` under `cvd` (`condition[:severity]` or `"off"`; NULL for
 * the default deuteranomaly model).
 *
 * # Safety
 * `map` must be a live handle, `cvd` NULL or NUL-terminated, `out`
 * writable.
 */
CfStatus cf_evaluate(const CfColormap *map, const char *cvd, CfEvalReport *out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `map` must be NULL or a handle not yet freed.
 */
void cf_colormap_free(CfColormap *map);

/**
 * Releases a string returned by the library; NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void cf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLORFORGE_H */
