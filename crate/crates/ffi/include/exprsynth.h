#ifndef EXPRSYNTH_H
#define EXPRSYNTH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum ExsStatus {
  EXS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EXS_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EXS_STATUS_INVALID_UTF8 = 2,
  /**
   * Input could not be parsed (syntax, schema or file format).
   */
  EXS_STATUS_PARSE_ERROR = 3,
  /**
   * Input parsed but violates a semantic rule (overlapping notes, lengths).
   */
  EXS_STATUS_VALIDATION_ERROR = 4,
  /**
   * An argument value is out of its allowed range.
   */
  EXS_STATUS_INVALID_ARGUMENT = 5,
  /**
   * Reading or writing a file failed.
   */
  EXS_STATUS_IO_ERROR = 6,
  /**
   * An internal error; the library caught a panic.
   */
  EXS_STATUS_INTERNAL = 7,
} ExsStatus;

/**
 * Mono audio at 16 kHz.
 */
typedef struct ExsAudio ExsAudio;

/**
 * Frame-wise synthesis parameters.
 */
typedef struct ExsParams ExsParams;

/**
 * A parsed, validated score.
 */
typedef struct ExsScore ExsScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next `exs_*` call on the same thread.
 */
const char *exs_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *exs_version(void);

/**
 * Parses a JSON score document.
 */
enum ExsStatus exs_score_parse(const char *json, struct ExsScore **out);

size_t exs_score_note_count(const struct ExsScore *score);

size_t exs_score_total_frames(const struct ExsScore *score);

void exs_score_free(struct ExsScore *score);

/**
 * Generates synthesis parameters for `score`. `config_json` may be null or a
 * JSON object of performance-model overrides. `out_clamps` (nullable)
 * receives the number of controls the model could not realise exactly.
 */
enum ExsStatus exs_generate(const struct ExsScore *score,
                            const char *config_json,
                            struct ExsParams **out,
                            size_t *out_clamps);

/**
 * Reads a parameter dump (binary or JSON text).
 */
enum ExsStatus exs_params_read(const uint8_t *data, size_t len, struct ExsParams **out);

/**
 * Serializes parameters; `text` non-zero selects JSON, otherwise binary.
 */
enum ExsStatus exs_params_write(const struct ExsParams *params,
                                int text,
                                uint8_t **out,
                                size_t *out_len);

size_t exs_params_frame_count(const struct ExsParams *params);

void exs_params_free(struct ExsParams *params);

/**
 * Renders parameters to audio without reverb.
 */
enum ExsStatus exs_synthesize(const struct ExsParams *params,
                              uint64_t noise_seed,
                              struct ExsAudio **out);

/**
 * Renders a full JSON render request (or bare score), the same operation the
 * command line and HTTP service perform. A reverb path in the request is read
 * from the local filesystem.
 */
enum ExsStatus exs_render_request(const char *request_json, struct ExsAudio **out);

/**
 * Renders a parsed score with default settings.
 */
enum ExsStatus exs_render_score(const struct ExsScore *score,
                                uint64_t noise_seed,
                                struct ExsAudio **out);

size_t exs_audio_len(const struct ExsAudio *audio);

uint32_t exs_audio_sample_rate(const struct ExsAudio *audio);

/**
 * Borrowed pointer to the samples as f32, valid while `audio` lives.
 */
const float *exs_audio_samples(const struct ExsAudio *audio);

/**
 * Encodes audio as WAV; `float32` non-zero selects 32-bit float samples.
 */
enum ExsStatus exs_audio_to_wav(const struct ExsAudio *audio,
                                int float32,
                                uint8_t **out,
                                size_t *out_len);

/**
 * Writes 16-bit PCM WAV to `path`.
 */
enum ExsStatus exs_audio_write_wav(const struct ExsAudio *audio, const char *path);

void exs_audio_free(struct ExsAudio *audio);

/**
 * Extracts per-note expression; `out_json` receives a score document whose
 * notes carry the measured controls.
 */
enum ExsStatus exs_extract_json(const struct ExsParams *params,
                                const struct ExsScore *score,
                                char **out_json);

/**
 * Multi-scale spectral loss with the default FFT sizes.
 */
enum ExsStatus exs_spectral_loss(const struct ExsAudio *a, const struct ExsAudio *b, double *out);

void exs_string_free(char *s);

void exs_bytes_free(uint8_t *data, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPRSYNTH_H */
