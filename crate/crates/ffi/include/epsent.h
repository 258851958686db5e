#ifndef EPSENT_H
#define EPSENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Values accepted by the `algorithm` argument of [`epsent_compress`]; they
// match the algorithm byte of the stream header.
typedef enum EpsentAlgorithm {
  EPSENT_ALGORITHM_LZ78 = 1,
  EPSENT_ALGORITHM_CASTORE = 2,
  EPSENT_ALGORITHM_CTW = 3,
} EpsentAlgorithm;

// Values accepted by the `boundary` argument of [`epsent_simulate`].
typedef enum EpsentBoundary {
  EPSENT_BOUNDARY_CLAMP = 0,
  EPSENT_BOUNDARY_REFLECT = 1,
  EPSENT_BOUNDARY_WRAP = 2,
} EpsentBoundary;

typedef enum EpsentDetectionStatus {
  EPSENT_DETECTION_STATUS_DETECTED = 0,
  EPSENT_DETECTION_STATUS_PLATEAU_ONLY = 1,
  EPSENT_DETECTION_STATUS_NOISE_ONLY = 2,
  EPSENT_DETECTION_STATUS_UNDETERMINED = 3,
} EpsentDetectionStatus;

// Values accepted by the `map` argument of [`epsent_simulate`].
typedef enum EpsentMap {
  EPSENT_MAP_LOGISTIC = 0,
  EPSENT_MAP_DOUBLING = 1,
  EPSENT_MAP_TENT = 2,
} EpsentMap;

// Values accepted by the `noise_mode` argument of [`epsent_simulate`].
typedef enum EpsentNoiseMode {
  EPSENT_NOISE_MODE_NONE = 0,
  EPSENT_NOISE_MODE_OUTPUT = 1,
  EPSENT_NOISE_MODE_DYNAMICAL = 2,
} EpsentNoiseMode;

typedef enum EpsentStatus {
  EPSENT_STATUS_OK = 0,
  EPSENT_STATUS_NULL_POINTER = 1,
  EPSENT_STATUS_DOMAIN = 2,
  EPSENT_STATUS_RESOURCE = 3,
  EPSENT_STATUS_DECODE = 4,
  EPSENT_STATUS_CONSISTENCY = 5,
  EPSENT_STATUS_CONFIG = 6,
  EPSENT_STATUS_IO = 7,
  EPSENT_STATUS_PANIC = 8,
} EpsentStatus;

// Opaque byte buffer holding a compressed stream.
typedef struct EpsentBuffer EpsentBuffer;

// Opaque symbolic sequence.
typedef struct EpsentSequence EpsentSequence;

// Result of [`epsent_detect_sigma`]. Missing edges are NaN.
typedef struct EpsentDetection {
  enum EpsentDetectionStatus status;
  double eps1;
  double eps2;
  double estimate;
} EpsentDetection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *epsent_last_error(void);

// Library version as a static NUL-terminated string.
const char *epsent_version(void);

// Copies `len` symbols, each below `alphabet`, into a new sequence.
//
// # Safety
// `symbols` must point to `len` readable values (it may be null when `len`
// is 0) and `out` must be writable.
enum EpsentStatus epsent_sequence_new(const uint16_t *symbols,
                                      size_t len,
                                      uint32_t alphabet,
                                      struct EpsentSequence **out);

// Simulates `len` points of a map after `burn_in` steps and codes them on
// `cells` equal cells. `map`, `noise_mode` and `boundary` take the values of
// [`EpsentMap`], [`EpsentNoiseMode`] and [`EpsentBoundary`]; `lambda` is
// ignored except for the logistic map.
//
// # Safety
// `out` must be writable.
enum EpsentStatus epsent_simulate(uint32_t map,
                                  double lambda,
                                  uint32_t noise_mode,
                                  uint32_t boundary,
                                  double sigma,
                                  uint64_t seed,
                                  size_t burn_in,
                                  size_t len,
                                  uint32_t cells,
                                  struct EpsentSequence **out);

// Number of symbols, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t epsent_sequence_len(const struct EpsentSequence *seq);

// Alphabet size, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
uint32_t epsent_sequence_alphabet(const struct EpsentSequence *seq);

// Copies the symbols into `dst`, which must hold at least
// `epsent_sequence_len(seq)` values.
//
// # Safety
// `seq` must be a live handle and `dst` must point to `capacity` writable
// values.
enum EpsentStatus epsent_sequence_copy(const struct EpsentSequence *seq,
                                       uint16_t *dst,
                                       size_t capacity);

// # Safety
// `seq` must be null or a handle not yet freed.
void epsent_sequence_free(struct EpsentSequence *seq);

// Compresses a sequence with the [`EpsentAlgorithm`] value `algorithm`.
// Writes the stream to `out` and, if `rate` is not null, the compressed
// length in bits per symbol.
//
// # Safety
// `seq` must be a live handle, `out` writable and `rate` null or writable.
enum EpsentStatus epsent_compress(const struct EpsentSequence *seq,
                                  uint32_t algorithm,
                                  struct EpsentBuffer **out,
                                  double *rate);

// Decodes a stream produced by [`epsent_compress`].
//
// # Safety
// `data` must point to `len` readable bytes and `out` must be writable.
enum EpsentStatus epsent_decompress(const uint8_t *data, size_t len, struct EpsentSequence **out);

// Start of the buffer's bytes, or null for a null handle.
//
// # Safety
// `buf` must be null or a live handle.
const uint8_t *epsent_buffer_data(const struct EpsentBuffer *buf);

// # Safety
// `buf` must be null or a live handle.
size_t epsent_buffer_len(const struct EpsentBuffer *buf);

// # Safety
// `buf` must be null or a handle not yet freed.
void epsent_buffer_free(struct EpsentBuffer *buf);

// Plug-in block entropy per symbol at block length `n`, in bits.
//
// # Safety
// `seq` must be a live handle and `out` writable.
enum EpsentStatus epsent_block_entropy_rate(const struct EpsentSequence *seq,
                                            size_t n,
                                            bool miller_madow,
                                            double *out);

// Entropy of the next symbol given the preceding `n`, in bits.
//
// # Safety
// `seq` must be a live handle and `out` writable.
enum EpsentStatus epsent_conditional_entropy(const struct EpsentSequence *seq,
                                             size_t n,
                                             bool miller_madow,
                                             double *out);

// # Safety
// `out` must be writable.
enum EpsentStatus epsent_bernoulli_entropy(double p, double *out);

// # Safety
// `out` must be writable.
enum EpsentStatus epsent_output_noise_upper(double h_eps,
                                            double p,
                                            double sigma,
                                            double eps,
                                            double *out);

// # Safety
// `out` must be writable.
enum EpsentStatus epsent_dynamical_noise_upper(double h_eps,
                                               double delta,
                                               double p,
                                               double sigma,
                                               double eps_n0,
                                               double *out);

// # Safety
// `out` must be writable.
enum EpsentStatus epsent_kifer_lower(double eps, double density_bound, double *out);

// Locates the knee of a rate curve given as `len` pairs `(eps[i], rate[i])`
// sorted by decreasing eps.
//
// # Safety
// `eps` and `rate` must each point to `len` readable values and `out` must
// be writable.
enum EpsentStatus epsent_detect_sigma(const double *eps,
                                      const double *rate,
                                      size_t len,
                                      double flat_slope,
                                      double noise_slope,
                                      struct EpsentDetection *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPSENT_H */
