/*
 * anmt — Arabic-English neural machine translation toolkit, C interface.
 *
 * Every function returns an anmt_status: ANMT_OK on success, otherwise
 * an error class that doubles as the suggested process exit code. The
 * message for the most recent failure on the calling thread is available
 * from anmt_last_error(). Objects are opaque handles freed with their
 * *_free function; strings returned through char** are freed with
 * anmt_string_free().
 */
#ifndef ANMT_H
#define ANMT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t anmt_status;
#define ANMT_OK 0
#define ANMT_ERR_CONFIG 1 /* bad flags, config keys, unresolved names */
#define ANMT_ERR_DATA 2   /* format, alignment, encoding, compatibility */
#define ANMT_ERR_NUMERIC 3 /* non-finite loss or gradient */

const char* anmt_version(void);
const char* anmt_last_error(void);
void anmt_string_free(char* s);

/* ---- text preprocessing ------------------------------------------------ */

typedef struct anmt_textprep anmt_textprep;

/* rules_path / affixes_path may be NULL for the built-in Arabic tables. */
anmt_status anmt_textprep_create(const char* rules_path, const char* affixes_path,
                                 anmt_textprep** out);
void anmt_textprep_free(anmt_textprep* tp);

anmt_status anmt_normalize(const anmt_textprep* tp, const char* text, char** out);
anmt_status anmt_segment(const anmt_textprep* tp, const char* text, char** out);
anmt_status anmt_desegment(const char* text, char** out);
anmt_status anmt_tokenize_english(const char* text, int lowercase, char** out);

/* One file in, one file out; lines longer than max_len tokens after
 * segmentation are dropped (pass 0 to keep everything). english != 0
 * switches to English tokenization. Reports the number of kept lines. */
anmt_status anmt_preprocess_file(const anmt_textprep* tp, const char* in_path,
                                 const char* out_path, size_t max_len, int english,
                                 int lowercase, size_t* kept_lines);

/* ---- byte pair encoding ------------------------------------------------ */

typedef struct anmt_bpe anmt_bpe;

anmt_status anmt_bpe_learn_files(const char* const* paths, size_t n_paths,
                                 size_t num_merges, size_t vocab_cap,
                                 anmt_bpe** out);
anmt_status anmt_bpe_load(const char* codes_path, anmt_bpe** out);
anmt_status anmt_bpe_save(const anmt_bpe* bpe, const char* path);
void anmt_bpe_free(anmt_bpe* bpe);

anmt_status anmt_bpe_apply_line(const anmt_bpe* bpe, const char* line, char** out);
anmt_status anmt_bpe_decode_line(const char* line, char** out);
anmt_status anmt_bpe_apply_file(const anmt_bpe* bpe, const char* in_path,
                                const char* out_path);

/* Frequency-ranked vocabulary over already-BPE'd files, written as
 * TOKEN<TAB>ID lines with the four reserved ids first. */
anmt_status anmt_build_vocab_files(const char* const* paths, size_t n_paths,
                                   size_t cap, const char* vocab_out);

/* ---- corpus statistics ------------------------------------------------- */

anmt_status anmt_corpus_stats(const char* spec_path, const char* set_name,
                              int dedup, int json, char** report);

/* ---- training ----------------------------------------------------------- */

typedef struct anmt_train_options {
  size_t batch_size;
  size_t max_epochs;
  double learning_rate;
  const char* optimizer; /* "adam" | "sgd" */
  double clip_norm;
  uint64_t seed;
  size_t val_interval;
  size_t patience;
  size_t embed_dim;
  size_t hidden_dim;
  size_t attn_dim;
} anmt_train_options;

void anmt_train_options_default(anmt_train_options* opts);
/* Line-based "key = value" file with the TrainConfig keys; unknown keys
 * are rejected. Dimensions are untouched. */
anmt_status anmt_train_options_load(const char* path, anmt_train_options* opts);

typedef void (*anmt_log_fn)(const char* line, void* user);

/* Trains on BPE'd, line-aligned files; writes ckpt-NNNNNNNN.anmt files
 * under out_dir and reports the path of the best (lowest validation
 * loss) checkpoint. dev paths may be NULL to hold out a training slice. */
anmt_status anmt_train(const char* src_path, const char* tgt_path,
                       const char* vocab_path, const char* dev_src,
                       const char* dev_tgt, const anmt_train_options* opts,
                       const char* out_dir, anmt_log_fn log, void* log_user,
                       char** best_ckpt_path);

/* Continued training from base_ckpt on a small in-domain corpus; the
 * optimizer starts fresh. max_updates = 0 re-emits the base checkpoint. */
anmt_status anmt_finetune(const char* base_ckpt, const char* src_path,
                          const char* tgt_path, const char* vocab_path,
                          const char* dev_src, const char* dev_tgt,
                          const anmt_train_options* opts, size_t max_updates,
                          const char* out_ckpt, anmt_log_fn log, void* log_user);

/* ---- translation -------------------------------------------------------- */

typedef struct anmt_translator anmt_translator;

typedef struct anmt_decode_options {
  size_t beam_size;
  double length_norm_alpha;
  size_t max_len_factor;
  size_t max_len_extra;
  int arithmetic_mean; /* ensemble combination; 0 = geometric (log-average) */
} anmt_decode_options;

void anmt_decode_options_default(anmt_decode_options* opts);

/* ckpt_paths lists 1..k checkpoints sharing the vocabulary (hash-checked);
 * k > 1 decodes as an ensemble. */
anmt_status anmt_translator_create(const char* const* ckpt_paths, size_t n_ckpts,
                                   const char* codes_path, const char* vocab_path,
                                   const anmt_decode_options* opts,
                                   anmt_translator** out);
void anmt_translator_free(anmt_translator* tr);

/* line is preprocessed source text; BPE happens inside. score may be NULL. */
anmt_status anmt_translate_line(const anmt_translator* tr, const char* line,
                                char** out, double* score);
/* scores_path may be NULL. */
anmt_status anmt_translate_file(const anmt_translator* tr, const char* in_path,
                                const char* out_path, const char* scores_path,
                                anmt_log_fn log, void* log_user);

/* ---- evaluation ---------------------------------------------------------- */

/* Corpus BLEU of hyp against 1..R line-aligned references; the report is
 * the textual or JSON rendering; bleu_out (x100) may be NULL. */
anmt_status anmt_score_files(const char* hyp_path, const char* const* ref_paths,
                             size_t n_refs, int json, char** report,
                             double* bleu_out);

/* ---- pipeline ------------------------------------------------------------ */

/* Runs the full recipe described by the config file under run_dir and
 * returns the report text (or JSON). */
anmt_status anmt_run_pipeline(const char* config_path, const char* run_dir,
                              int json, anmt_log_fn log, void* log_user,
                              char** report);

/* Re-hashes the inputs recorded in run_dir's manifest; *mismatched gets
 * a newline-separated list of changed files (empty string if clean). */
anmt_status anmt_verify_manifest(const char* run_dir, char** mismatched);

#ifdef __cplusplus
}
#endif

#endif /* ANMT_H */
