#ifndef LAGMESH_H
#define LAGMESH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LagmeshMethod {
  LAGMESH_METHOD_DENSE = 0,
  LAGMESH_METHOD_PARTIAL = 1,
} LagmeshMethod;

typedef enum LagmeshStatus {
  LAGMESH_STATUS_OK = 0,
  // A required pointer argument was null.
  LAGMESH_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  LAGMESH_STATUS_INVALID_UTF8 = 2,
  // Malformed input: parse or validation failure.
  LAGMESH_STATUS_INVALID_INPUT = 3,
  // The numerics failed (non-convergence, evaluation failure, ...).
  LAGMESH_STATUS_NUMERICAL_FAILURE = 4,
  // Reading or writing the mesh cache failed.
  LAGMESH_STATUS_IO = 5,
  // An index argument was out of range.
  LAGMESH_STATUS_OUT_OF_RANGE = 6,
  // The requested quantity was not computed for this result.
  LAGMESH_STATUS_UNAVAILABLE = 7,
  // Internal error; the library caught a panic.
  LAGMESH_STATUS_INTERNAL = 8,
} LagmeshStatus;

typedef enum LagmeshMode {
  LAGMESH_MODE_EIGENVALUES = 0,
  LAGMESH_MODE_EIGENFUNCTIONS = 1,
  LAGMESH_MODE_EIGENSYSTEM = 2,
} LagmeshMode;

typedef enum LagmeshFamily {
  LAGMESH_FAMILY_LEGENDRE = 0,
  LAGMESH_FAMILY_LAGUERRE = 1,
  LAGMESH_FAMILY_HERMITE = 2,
} LagmeshFamily;

// Opaque mesh record.
typedef struct LagmeshMesh LagmeshMesh;

// Opaque solve result.
typedef struct LagmeshSpectrum LagmeshSpectrum;

// Solve parameters. String fields may be null to take the default
// (`scaling` 1, `mass` 1, `shift` 0, no expectation, in-memory meshes).
typedef struct LagmeshSolveConfig {
  size_t levels;
  size_t dimension;
  uint32_t precision;
  const char *scaling;
  const char *mass;
  const char *shift;
  enum LagmeshMethod method;
  // Observable whose expectation value is computed per state.
  const char *expectation;
  bool coefficients;
  bool discrete;
  const char *cache_dir;
} LagmeshSolveConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next library call on this thread.
const char *lagmesh_last_error_message(void);

// Library version as a static string.
const char *lagmesh_version(void);

// A config with every optional field at its default.
struct LagmeshSolveConfig lagmesh_solve_config_default(size_t levels,
                                                       size_t dimension,
                                                       uint32_t precision);

// Solves for the lowest levels of `potential` on `domain` ("a,b", with
// "inf"/"-inf" allowed) and stores the result in `*out`.
//
// # Safety
// `potential`, `domain` and `config` must be valid; string fields of
// `config` must be null or nul-terminated; `out` must be writable.
enum LagmeshStatus lagmesh_solve(const char *potential,
                                 const char *domain,
                                 const struct LagmeshSolveConfig *config,
                                 enum LagmeshMode mode,
                                 struct LagmeshSpectrum **out);

// Releases a spectrum; null is ignored.
//
// # Safety
// `s` must come from [`lagmesh_solve`] and not have been freed.
void lagmesh_spectrum_free(struct LagmeshSpectrum *s);

// Number of returned levels (0 for a null handle).
//
// # Safety
// `s` must be null or a live spectrum handle.
size_t lagmesh_spectrum_len(const struct LagmeshSpectrum *s);

// Energy `index` rounded to double precision.
//
// # Safety
// `s` must be a live handle; `re` and `im` must be writable.
enum LagmeshStatus lagmesh_spectrum_energy(const struct LagmeshSpectrum *s,
                                           size_t index,
                                           double *re,
                                           double *im);

// Real and imaginary parts of energy `index` as decimal strings with
// `digits` significant digits. Free both with [`lagmesh_string_free`].
//
// # Safety
// `s` must be a live handle; `re` and `im` must be writable.
enum LagmeshStatus lagmesh_spectrum_energy_string(const struct LagmeshSpectrum *s,
                                                  size_t index,
                                                  size_t digits,
                                                  char **re,
                                                  char **im);

// Expansion coefficient `k` of state `state` (double precision).
//
// # Safety
// `s` must be a live handle; `re` and `im` must be writable.
enum LagmeshStatus lagmesh_spectrum_coefficient(const struct LagmeshSpectrum *s,
                                                size_t state,
                                                size_t k,
                                                double *re,
                                                double *im);

// Mesh point `k` and the wavefunction of state `state` there.
//
// # Safety
// `s` must be a live handle; `x`, `re` and `im` must be writable.
enum LagmeshStatus lagmesh_spectrum_discrete(const struct LagmeshSpectrum *s,
                                             size_t state,
                                             size_t k,
                                             double *x,
                                             double *re,
                                             double *im);

// Expectation value of the configured observable in state `state`.
//
// # Safety
// `s` must be a live handle; `re` and `im` must be writable.
enum LagmeshStatus lagmesh_spectrum_expectation(const struct LagmeshSpectrum *s,
                                                size_t state,
                                                double *re,
                                                double *im);

// Upper bound on the eigenpair residuals of the solve.
//
// # Safety
// `s` must be a live handle; `bound` must be writable.
enum LagmeshStatus lagmesh_spectrum_residual_bound(const struct LagmeshSpectrum *s, double *bound);

// Builds or loads a mesh. A null `cache_dir` uses `$LAGMESH_CACHE`
// (default `./meshes`). With `weights` false only the points file is
// written; the handle always carries weights.
//
// # Safety
// `cache_dir` must be null or nul-terminated; `out` must be writable.
enum LagmeshStatus lagmesh_build_mesh(enum LagmeshFamily family,
                                      size_t dimension,
                                      uint32_t precision,
                                      bool weights,
                                      const char *cache_dir,
                                      struct LagmeshMesh **out);

// Releases a mesh; null is ignored.
//
// # Safety
// `m` must come from [`lagmesh_build_mesh`] and not have been freed.
void lagmesh_mesh_free(struct LagmeshMesh *m);

// Number of mesh points (0 for a null handle).
//
// # Safety
// `m` must be null or a live mesh handle.
size_t lagmesh_mesh_len(const struct LagmeshMesh *m);

// Point `index` and its Lagrange weight `lambda` in double precision.
//
// # Safety
// `m` must be a live handle; `x` and `lambda` must be writable.
enum LagmeshStatus lagmesh_mesh_point(const struct LagmeshMesh *m,
                                      size_t index,
                                      double *x,
                                      double *lambda);

// Point `index` as a decimal string with `digits` significant digits.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum LagmeshStatus lagmesh_mesh_point_string(const struct LagmeshMesh *m,
                                             size_t index,
                                             size_t digits,
                                             char **out);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from a `*_string` function and not have been freed.
void lagmesh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAGMESH_H */
