#include "anmt.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "anmt/bleu.hpp"
#include "anmt/corpus.hpp"
#include "anmt/decoding.hpp"
#include "anmt/error.hpp"
#include "anmt/pipeline.hpp"
#include "anmt/subword.hpp"
#include "anmt/textprep.hpp"
#include "anmt/training.hpp"
#include "anmt/util.hpp"
#include "anmt/version.hpp"

namespace {

thread_local std::string g_last_error;

anmt_status from_exception() {
  try {
    throw;
  } catch (const anmt::Error& e) {
    g_last_error = e.what();
    return static_cast<anmt_status>(e.exit_code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ANMT_ERR_DATA;
  } catch (...) {
    g_last_error = "unknown error";
    return ANMT_ERR_DATA;
  }
}

template <typename F>
anmt_status guarded(F&& body) {
  try {
    body();
    return ANMT_OK;
  } catch (...) {
    return from_exception();
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

anmt::LogFn wrap_log(anmt_log_fn log, void* user) {
  if (!log) return nullptr;
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

anmt::TrainConfig to_train_config(const anmt_train_options& opts) {
  anmt::TrainConfig config;
  config.batch_size = opts.batch_size;
  config.max_epochs = opts.max_epochs;
  config.learning_rate = opts.learning_rate;
  config.optimizer = opts.optimizer ? opts.optimizer : "adam";
  config.clip_norm = opts.clip_norm;
  config.seed = opts.seed;
  config.val_interval = opts.val_interval;
  config.patience = opts.patience;
  return config;
}

}  // namespace

struct anmt_textprep {
  anmt::Textprep prep;
};

struct anmt_bpe {
  anmt::MergeTable codes;
};

struct anmt_translator {
  anmt::Translator* impl;
};

extern "C" {

const char* anmt_version(void) { return anmt::kVersion; }

const char* anmt_last_error(void) { return g_last_error.c_str(); }

void anmt_string_free(char* s) { delete[] s; }

anmt_status anmt_textprep_create(const char* rules_path, const char* affixes_path,
                                 anmt_textprep** out) {
  return guarded([&] {
    auto tp = std::make_unique<anmt_textprep>();
    if (rules_path) tp->prep.rules = anmt::NormalizationRuleSet::load(rules_path);
    if (affixes_path) tp->prep.affixes = anmt::AffixLexicon::load(affixes_path);
    *out = tp.release();
  });
}

void anmt_textprep_free(anmt_textprep* tp) { delete tp; }

anmt_status anmt_normalize(const anmt_textprep* tp, const char* text, char** out) {
  return guarded([&] { *out = dup_string(tp->prep.rules.normalize(text)); });
}

anmt_status anmt_segment(const anmt_textprep* tp, const char* text, char** out) {
  return guarded([&] {
    *out = dup_string(anmt::join_ws(tp->prep.affixes.segment(text).tokens));
  });
}

anmt_status anmt_desegment(const char* text, char** out) {
  return guarded([&] {
    anmt::SegmentedSentence seg;
    seg.tokens = anmt::split_ws(text);
    *out = dup_string(anmt::desegment(seg));
  });
}

anmt_status anmt_tokenize_english(const char* text, int lowercase, char** out) {
  return guarded([&] {
    *out = dup_string(anmt::join_ws(anmt::tokenize_english(text, lowercase != 0)));
  });
}

anmt_status anmt_preprocess_file(const anmt_textprep* tp, const char* in_path,
                                 const char* out_path, size_t max_len, int english,
                                 int lowercase, size_t* kept_lines) {
  return guarded([&] {
    std::vector<std::string> out_lines;
    size_t kept = 0;
    for (const auto& line : anmt::read_lines(in_path)) {
      std::string processed =
          english ? tp->prep.preprocess_english_line(line, lowercase != 0)
                  : tp->prep.preprocess_arabic_line(line);
      if (max_len > 0) {
        const size_t len = anmt::split_ws(processed).size();
        if (len == 0 || len > max_len) continue;
      }
      out_lines.push_back(std::move(processed));
      ++kept;
    }
    anmt::write_lines(out_path, out_lines);
    if (kept_lines) *kept_lines = kept;
  });
}

anmt_status anmt_bpe_learn_files(const char* const* paths, size_t n_paths,
                                 size_t num_merges, size_t vocab_cap,
                                 anmt_bpe** out) {
  return guarded([&] {
    std::vector<std::vector<std::string>> corpus;
    for (size_t i = 0; i < n_paths; ++i) {
      for (const auto& line : anmt::read_lines(paths[i])) {
        corpus.push_back(anmt::split_ws(line));
      }
    }
    auto bpe = std::make_unique<anmt_bpe>();
    bpe->codes = anmt::learn_bpe(corpus, num_merges, vocab_cap);
    *out = bpe.release();
  });
}

anmt_status anmt_bpe_load(const char* codes_path, anmt_bpe** out) {
  return guarded([&] {
    auto bpe = std::make_unique<anmt_bpe>();
    bpe->codes = anmt::MergeTable::load(codes_path);
    *out = bpe.release();
  });
}

anmt_status anmt_bpe_save(const anmt_bpe* bpe, const char* path) {
  return guarded([&] { bpe->codes.save(path); });
}

void anmt_bpe_free(anmt_bpe* bpe) { delete bpe; }

anmt_status anmt_bpe_apply_line(const anmt_bpe* bpe, const char* line, char** out) {
  return guarded([&] {
    *out = dup_string(
        anmt::join_ws(anmt::apply_bpe(anmt::split_ws(line), bpe->codes)));
  });
}

anmt_status anmt_bpe_decode_line(const char* line, char** out) {
  return guarded([&] {
    *out = dup_string(anmt::join_ws(anmt::decode_bpe(anmt::split_ws(line))));
  });
}

anmt_status anmt_bpe_apply_file(const anmt_bpe* bpe, const char* in_path,
                                const char* out_path) {
  return guarded([&] {
    std::vector<std::string> out_lines;
    for (const auto& line : anmt::read_lines(in_path)) {
      out_lines.push_back(
          anmt::join_ws(anmt::apply_bpe(anmt::split_ws(line), bpe->codes)));
    }
    anmt::write_lines(out_path, out_lines);
  });
}

anmt_status anmt_build_vocab_files(const char* const* paths, size_t n_paths,
                                   size_t cap, const char* vocab_out) {
  return guarded([&] {
    std::vector<std::vector<std::string>> corpus;
    for (size_t i = 0; i < n_paths; ++i) {
      for (const auto& line : anmt::read_lines(paths[i])) {
        corpus.push_back(anmt::split_ws(line));
      }
    }
    anmt::Vocabulary::build(corpus, cap).save(vocab_out);
  });
}

anmt_status anmt_corpus_stats(const char* spec_path, const char* set_name,
                              int dedup, int json, char** report) {
  return guarded([&] {
    const anmt::DatasetSpec spec = anmt::DatasetSpec::load(spec_path);
    const anmt::ParallelCorpus corpus = spec.compose(set_name, dedup != 0);
    *report = dup_string(anmt::render_stats(anmt::stats(corpus), json != 0));
  });
}

void anmt_train_options_default(anmt_train_options* opts) {
  const anmt::TrainConfig config;
  opts->batch_size = config.batch_size;
  opts->max_epochs = config.max_epochs;
  opts->learning_rate = config.learning_rate;
  opts->optimizer = "adam";
  opts->clip_norm = config.clip_norm;
  opts->seed = config.seed;
  opts->val_interval = config.val_interval;
  opts->patience = config.patience;
  opts->embed_dim = 64;
  opts->hidden_dim = 128;
  opts->attn_dim = 128;
}

anmt_status anmt_train_options_load(const char* path, anmt_train_options* opts) {
  return guarded([&] {
    const anmt::TrainConfig config = anmt::TrainConfig::load(path);
    opts->batch_size = config.batch_size;
    opts->max_epochs = config.max_epochs;
    opts->learning_rate = config.learning_rate;
    opts->optimizer = config.optimizer == "sgd" ? "sgd" : "adam";
    opts->clip_norm = config.clip_norm;
    opts->seed = config.seed;
    opts->val_interval = config.val_interval;
    opts->patience = config.patience;
  });
}

anmt_status anmt_train(const char* src_path, const char* tgt_path,
                       const char* vocab_path, const char* dev_src,
                       const char* dev_tgt, const anmt_train_options* opts,
                       const char* out_dir, anmt_log_fn log, void* log_user,
                       char** best_ckpt_path) {
  return guarded([&] {
    const anmt::Vocabulary vocab = anmt::Vocabulary::load(vocab_path);
    const anmt::EncodedCorpus corpus = anmt::encode_corpus(
        anmt::read_lines(src_path), anmt::read_lines(tgt_path), vocab);
    anmt::EncodedCorpus dev;
    if (dev_src && dev_tgt) {
      dev = anmt::encode_corpus(anmt::read_lines(dev_src),
                                anmt::read_lines(dev_tgt), vocab);
    }
    const anmt::TrainConfig config = to_train_config(*opts);
    std::filesystem::create_directories(out_dir);
    const anmt::ModelParams init =
        anmt::ModelParams::init(vocab.size(), opts->embed_dim, opts->hidden_dim,
                                opts->attn_dim, config.seed);
    anmt::TrainOutput result =
        anmt::train(corpus, dev.empty() ? nullptr : &dev, config, init,
                    vocab.content_hash(), out_dir, wrap_log(log, log_user));
    const auto best = anmt::select_best(result.checkpoints, 1);
    const std::string best_path = std::string(out_dir) + "/best.anmt";
    anmt::save_checkpoint(best[0], best_path);
    if (best_ckpt_path) *best_ckpt_path = dup_string(best_path);
  });
}

anmt_status anmt_finetune(const char* base_ckpt, const char* src_path,
                          const char* tgt_path, const char* vocab_path,
                          const char* dev_src, const char* dev_tgt,
                          const anmt_train_options* opts, size_t max_updates,
                          const char* out_ckpt, anmt_log_fn log, void* log_user) {
  return guarded([&] {
    const anmt::Vocabulary vocab = anmt::Vocabulary::load(vocab_path);
    const anmt::Checkpoint base = anmt::load_checkpoint(base_ckpt, vocab);
    const anmt::EncodedCorpus corpus = anmt::encode_corpus(
        anmt::read_lines(src_path), anmt::read_lines(tgt_path), vocab);
    anmt::EncodedCorpus dev;
    if (dev_src && dev_tgt) {
      dev = anmt::encode_corpus(anmt::read_lines(dev_src),
                                anmt::read_lines(dev_tgt), vocab);
    }
    const anmt::TrainConfig config = to_train_config(*opts);
    const anmt::Checkpoint tuned =
        anmt::finetune(base, corpus, dev.empty() ? nullptr : &dev, config,
                       vocab.content_hash(), max_updates, wrap_log(log, log_user));
    anmt::save_checkpoint(tuned, out_ckpt);
  });
}

void anmt_decode_options_default(anmt_decode_options* opts) {
  const anmt::DecodeConfig config;
  opts->beam_size = config.beam_size;
  opts->length_norm_alpha = config.length_norm_alpha;
  opts->max_len_factor = config.max_len_factor;
  opts->max_len_extra = config.max_len_extra;
  opts->arithmetic_mean = config.arithmetic_mean ? 1 : 0;
}

anmt_status anmt_translator_create(const char* const* ckpt_paths, size_t n_ckpts,
                                   const char* codes_path, const char* vocab_path,
                                   const anmt_decode_options* opts,
                                   anmt_translator** out) {
  return guarded([&] {
    anmt::Vocabulary vocab = anmt::Vocabulary::load(vocab_path);
    std::vector<anmt::Checkpoint> models;
    models.reserve(n_ckpts);
    for (size_t i = 0; i < n_ckpts; ++i) {
      models.push_back(anmt::load_checkpoint(ckpt_paths[i], vocab));
    }
    anmt::DecodeConfig config;
    if (opts) {
      config.beam_size = opts->beam_size;
      config.length_norm_alpha = opts->length_norm_alpha;
      config.max_len_factor = opts->max_len_factor;
      config.max_len_extra = opts->max_len_extra;
      config.arithmetic_mean = opts->arithmetic_mean != 0;
    }
    auto tr = std::make_unique<anmt_translator>();
    tr->impl = new anmt::Translator(std::move(models), std::move(vocab),
                                    anmt::MergeTable::load(codes_path), config);
    *out = tr.release();
  });
}

void anmt_translator_free(anmt_translator* tr) {
  if (tr) delete tr->impl;
  delete tr;
}

anmt_status anmt_translate_line(const anmt_translator* tr, const char* line,
                                char** out, double* score) {
  return guarded([&] {
    const anmt::Translator::LineResult result = tr->impl->translate_line(line);
    *out = dup_string(result.text);
    if (score) *score = result.score;
  });
}

anmt_status anmt_translate_file(const anmt_translator* tr, const char* in_path,
                                const char* out_path, const char* scores_path,
                                anmt_log_fn log, void* log_user) {
  return guarded([&] {
    tr->impl->translate_file(in_path, out_path, scores_path ? scores_path : "",
                             wrap_log(log, log_user));
  });
}

anmt_status anmt_score_files(const char* hyp_path, const char* const* ref_paths,
                             size_t n_refs, int json, char** report,
                             double* bleu_out) {
  return guarded([&] {
    std::vector<std::string> refs(ref_paths, ref_paths + n_refs);
    const anmt::BleuReport result = anmt::score_files(hyp_path, refs);
    if (report) *report = dup_string(result.render(json != 0));
    if (bleu_out) *bleu_out = result.bleu;
  });
}

anmt_status anmt_run_pipeline(const char* config_path, const char* run_dir,
                              int json, anmt_log_fn log, void* log_user,
                              char** report) {
  return guarded([&] {
    const anmt::PipelineConfig config = anmt::PipelineConfig::load(config_path);
    const anmt::PipelineReport result =
        anmt::run_pipeline(config, run_dir, wrap_log(log, log_user));
    if (report) {
      *report = dup_string(json ? result.render_json() : result.render_text());
    }
  });
}

anmt_status anmt_verify_manifest(const char* run_dir, char** mismatched) {
  return guarded([&] {
    const std::vector<std::string> bad = anmt::verify_manifest(run_dir);
    std::string joined;
    for (const auto& path : bad) {
      joined += path;
      joined += '\n';
    }
    if (mismatched) *mismatched = dup_string(joined);
  });
}

}  // extern "C"
