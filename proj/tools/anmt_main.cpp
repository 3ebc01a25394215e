// anmt command line: the full Arabic-English translation recipe as
// subcommands, driving the toolkit exclusively through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anmt.h"

namespace {

void stderr_log(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int report_error(anmt_status status) {
  std::fprintf(stderr, "error: %s\n", anmt_last_error());
  return static_cast<int>(status);
}

// Prints and releases a C-API string.
void emit(char* text) {
  if (!text) return;
  std::fputs(text, stdout);
  anmt_string_free(text);
}

std::vector<const char*> c_ptrs(const std::vector<std::string>& strings) {
  std::vector<const char*> out;
  out.reserve(strings.size());
  for (const auto& s : strings) out.push_back(s.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anmt — attention-based Arabic-English translation toolkit"};
  app.require_subcommand(1);

  // ---- preprocess ----
  auto* preprocess = app.add_subcommand(
      "preprocess", "Normalize and segment Arabic (or tokenize English) text");
  std::string pp_src, pp_out, pp_rules, pp_affixes;
  std::size_t pp_max_len = 100;
  bool pp_english = false, pp_lowercase = false;
  preprocess->add_option("--src", pp_src, "input file")->required();
  preprocess->add_option("--out", pp_out, "output file")->required();
  preprocess->add_option("--rules", pp_rules, "normalization rule table (TSV)");
  preprocess->add_option("--affixes", pp_affixes, "affix lexicon (TSV)");
  preprocess->add_option("--max-len", pp_max_len,
                         "drop lines longer than this many tokens (0 keeps all)");
  preprocess->add_flag("--english", pp_english,
                       "English side: whitespace + punctuation tokenization");
  preprocess->add_flag("--lowercase", pp_lowercase, "lowercase English output");

  // ---- bpe-learn ----
  auto* bpe_learn =
      app.add_subcommand("bpe-learn", "Learn joint byte-pair-encoding merges");
  std::vector<std::string> bl_inputs;
  std::string bl_out;
  std::size_t bl_merges = 10000, bl_cap = 90000;
  bpe_learn->add_option("--in", bl_inputs, "training text files (both languages)")
      ->required()
      ->expected(-1);
  bpe_learn->add_option("--merges", bl_merges, "number of merge operations");
  bpe_learn->add_option("--vocab-cap", bl_cap, "joint vocabulary size cap");
  bpe_learn->add_option("--out", bl_out, "merge table output")->required();

  // ---- bpe-apply ----
  auto* bpe_apply = app.add_subcommand("bpe-apply", "Apply learned merges to text");
  std::string ba_codes, ba_vocab_out;
  std::vector<std::string> ba_in, ba_out;
  std::size_t ba_cap = 90000;
  bpe_apply->add_option("--codes", ba_codes, "merge table")->required();
  bpe_apply->add_option("--in", ba_in, "input files")->required()->expected(-1);
  bpe_apply->add_option("--out", ba_out, "output files (one per input)")
      ->required()
      ->expected(-1);
  bpe_apply->add_option("--vocab-out", ba_vocab_out,
                        "also build the joint vocabulary from the outputs");
  bpe_apply->add_option("--vocab-cap", ba_cap, "vocabulary size cap");

  // ---- stats ----
  auto* stats = app.add_subcommand("stats", "Parallel corpus statistics");
  std::string st_spec, st_set;
  bool st_json = false, st_dedup = false;
  stats->add_option("--spec", st_spec, "dataset spec file")->required();
  stats->add_option("--set", st_set, "set name to compose")->required();
  stats->add_flag("--json", st_json, "structured output");
  stats->add_flag("--dedup", st_dedup, "drop duplicate pairs");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Train a translation model");
  std::string tr_src, tr_tgt, tr_vocab, tr_config, tr_out;
  std::string tr_dev_src, tr_dev_tgt;
  anmt_train_options tr_opts;
  anmt_train_options_default(&tr_opts);
  std::size_t tr_embed = tr_opts.embed_dim, tr_hidden = tr_opts.hidden_dim;
  std::size_t tr_attn = 0;
  train->add_option("--src", tr_src, "source training file (BPE applied)")->required();
  train->add_option("--tgt", tr_tgt, "target training file (BPE applied)")->required();
  train->add_option("--vocab", tr_vocab, "joint vocabulary file")->required();
  train->add_option("--config", tr_config, "train config (key = value)");
  train->add_option("--out", tr_out, "checkpoint directory")->required();
  train->add_option("--dev-src", tr_dev_src, "validation source file");
  train->add_option("--dev-tgt", tr_dev_tgt, "validation target file");
  train->add_option("--embed", tr_embed, "embedding dimension");
  train->add_option("--hidden", tr_hidden, "hidden dimension");
  train->add_option("--attn", tr_attn, "attention dimension (default: hidden)");
  std::size_t tr_seed = 0;
  bool tr_seed_set = false;
  train->add_option("--seed", tr_seed, "override config seed")
      ->each([&](const std::string&) { tr_seed_set = true; });

  // ---- finetune ----
  auto* finetune =
      app.add_subcommand("finetune", "Continue training on an in-domain corpus");
  std::string ft_base, ft_src, ft_tgt, ft_vocab, ft_config, ft_out;
  std::string ft_dev_src, ft_dev_tgt;
  double ft_lr = 1e-4;
  std::size_t ft_max_updates = 0;
  bool ft_max_updates_set = false;
  finetune->add_option("--base", ft_base, "base checkpoint")->required();
  finetune->add_option("--src", ft_src, "in-domain source (BPE applied)")->required();
  finetune->add_option("--tgt", ft_tgt, "in-domain target (BPE applied)")->required();
  finetune->add_option("--vocab", ft_vocab, "joint vocabulary file")->required();
  finetune->add_option("--config", ft_config, "train config (key = value)");
  finetune->add_option("--lr", ft_lr, "fine-tuning learning rate");
  finetune->add_option("--out", ft_out, "output checkpoint path")->required();
  finetune->add_option("--dev-src", ft_dev_src, "validation source file");
  finetune->add_option("--dev-tgt", ft_dev_tgt, "validation target file");
  finetune->add_option("--max-updates", ft_max_updates, "stop after this many updates")
      ->each([&](const std::string&) { ft_max_updates_set = true; });

  // ---- translate ----
  auto* translate = app.add_subcommand("translate", "Translate a file");
  std::vector<std::string> tl_ckpts;
  std::string tl_codes, tl_vocab, tl_in, tl_out, tl_scores;
  anmt_decode_options tl_opts;
  anmt_decode_options_default(&tl_opts);
  bool tl_arith = false;
  translate->add_option("--ckpt", tl_ckpts, "checkpoint(s); several form an ensemble")
      ->required()
      ->expected(-1);
  translate->add_option("--codes", tl_codes, "merge table")->required();
  translate->add_option("--vocab", tl_vocab, "joint vocabulary file")->required();
  translate->add_option("--in", tl_in, "preprocessed source file")->required();
  translate->add_option("--out", tl_out, "translation output")->required();
  translate->add_option("--scores", tl_scores, "per-line log-probability output");
  translate->add_option("--beam", tl_opts.beam_size, "beam size");
  translate->add_option("--alpha", tl_opts.length_norm_alpha,
                        "length normalization exponent");
  translate->add_option("--max-len-factor", tl_opts.max_len_factor,
                        "max output length factor");
  translate->add_option("--max-len-extra", tl_opts.max_len_extra,
                        "max output length constant");
  translate->add_flag("--arith-mean", tl_arith,
                      "combine ensemble members by arithmetic mean");

  // ---- score ----
  auto* score = app.add_subcommand("score", "Multi-reference corpus BLEU");
  std::string sc_hyp;
  std::vector<std::string> sc_refs;
  bool sc_json = false;
  score->add_option("--hyp", sc_hyp, "hypothesis file")->required();
  score->add_option("--ref", sc_refs, "reference file(s)")->required()->expected(-1);
  score->add_flag("--json", sc_json, "structured report");

  // ---- pipeline ----
  auto* pipeline =
      app.add_subcommand("pipeline", "Run the full recipe from one config");
  std::string pl_config, pl_run_dir;
  bool pl_json = false, pl_verify = false;
  pipeline->add_option("--config", pl_config, "pipeline config file");
  pipeline->add_option("--run-dir", pl_run_dir, "run directory")->required();
  pipeline->add_flag("--json", pl_json, "structured report");
  pipeline->add_flag("--verify", pl_verify,
                     "re-hash the manifest inputs of an existing run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems exit 1; --help exits 0
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  anmt_status status = ANMT_OK;

  if (*preprocess) {
    anmt_textprep* tp = nullptr;
    status = anmt_textprep_create(pp_rules.empty() ? nullptr : pp_rules.c_str(),
                                  pp_affixes.empty() ? nullptr : pp_affixes.c_str(),
                                  &tp);
    if (status != ANMT_OK) return report_error(status);
    std::size_t kept = 0;
    status = anmt_preprocess_file(tp, pp_src.c_str(), pp_out.c_str(), pp_max_len,
                                  pp_english ? 1 : 0, pp_lowercase ? 1 : 0, &kept);
    anmt_textprep_free(tp);
    if (status != ANMT_OK) return report_error(status);
    std::fprintf(stderr, "preprocess: kept %zu lines\n", kept);
  } else if (*bpe_learn) {
    anmt_bpe* bpe = nullptr;
    const auto inputs = c_ptrs(bl_inputs);
    status = anmt_bpe_learn_files(inputs.data(), inputs.size(), bl_merges, bl_cap,
                                  &bpe);
    if (status != ANMT_OK) return report_error(status);
    status = anmt_bpe_save(bpe, bl_out.c_str());
    anmt_bpe_free(bpe);
    if (status != ANMT_OK) return report_error(status);
  } else if (*bpe_apply) {
    if (ba_in.size() != ba_out.size()) {
      std::fprintf(stderr, "error: --in and --out must pair up\n");
      return 1;
    }
    anmt_bpe* bpe = nullptr;
    status = anmt_bpe_load(ba_codes.c_str(), &bpe);
    if (status != ANMT_OK) return report_error(status);
    for (std::size_t i = 0; i < ba_in.size() && status == ANMT_OK; ++i) {
      status = anmt_bpe_apply_file(bpe, ba_in[i].c_str(), ba_out[i].c_str());
    }
    anmt_bpe_free(bpe);
    if (status != ANMT_OK) return report_error(status);
    if (!ba_vocab_out.empty()) {
      const auto outputs = c_ptrs(ba_out);
      status = anmt_build_vocab_files(outputs.data(), outputs.size(), ba_cap,
                                      ba_vocab_out.c_str());
      if (status != ANMT_OK) return report_error(status);
    }
  } else if (*stats) {
    char* report = nullptr;
    status = anmt_corpus_stats(st_spec.c_str(), st_set.c_str(), st_dedup ? 1 : 0,
                               st_json ? 1 : 0, &report);
    if (status != ANMT_OK) return report_error(status);
    emit(report);
  } else if (*train) {
    if (!tr_config.empty()) {
      status = anmt_train_options_load(tr_config.c_str(), &tr_opts);
      if (status != ANMT_OK) return report_error(status);
    }
    tr_opts.embed_dim = tr_embed;
    tr_opts.hidden_dim = tr_hidden;
    tr_opts.attn_dim = tr_attn ? tr_attn : tr_hidden;
    if (tr_seed_set) tr_opts.seed = tr_seed;
    char* best = nullptr;
    status = anmt_train(tr_src.c_str(), tr_tgt.c_str(), tr_vocab.c_str(),
                        tr_dev_src.empty() ? nullptr : tr_dev_src.c_str(),
                        tr_dev_tgt.empty() ? nullptr : tr_dev_tgt.c_str(), &tr_opts,
                        tr_out.c_str(), stderr_log, nullptr, &best);
    if (status != ANMT_OK) return report_error(status);
    std::fprintf(stderr, "best checkpoint: %s\n", best);
    anmt_string_free(best);
  } else if (*finetune) {
    anmt_train_options opts;
    anmt_train_options_default(&opts);
    if (!ft_config.empty()) {
      status = anmt_train_options_load(ft_config.c_str(), &opts);
      if (status != ANMT_OK) return report_error(status);
    }
    opts.learning_rate = ft_lr;
    status = anmt_finetune(
        ft_base.c_str(), ft_src.c_str(), ft_tgt.c_str(), ft_vocab.c_str(),
        ft_dev_src.empty() ? nullptr : ft_dev_src.c_str(),
        ft_dev_tgt.empty() ? nullptr : ft_dev_tgt.c_str(), &opts,
        ft_max_updates_set ? ft_max_updates : static_cast<std::size_t>(-1),
        ft_out.c_str(), stderr_log, nullptr);
    if (status != ANMT_OK) return report_error(status);
  } else if (*translate) {
    tl_opts.arithmetic_mean = tl_arith ? 1 : 0;
    anmt_translator* tr = nullptr;
    const auto ckpts = c_ptrs(tl_ckpts);
    status = anmt_translator_create(ckpts.data(), ckpts.size(), tl_codes.c_str(),
                                    tl_vocab.c_str(), &tl_opts, &tr);
    if (status != ANMT_OK) return report_error(status);
    status = anmt_translate_file(tr, tl_in.c_str(), tl_out.c_str(),
                                 tl_scores.empty() ? nullptr : tl_scores.c_str(),
                                 stderr_log, nullptr);
    anmt_translator_free(tr);
    if (status != ANMT_OK) return report_error(status);
  } else if (*score) {
    char* report = nullptr;
    const auto refs = c_ptrs(sc_refs);
    status = anmt_score_files(sc_hyp.c_str(), refs.data(), refs.size(),
                              sc_json ? 1 : 0, &report, nullptr);
    if (status != ANMT_OK) return report_error(status);
    emit(report);
  } else if (*pipeline) {
    if (pl_verify) {
      char* mismatched = nullptr;
      status = anmt_verify_manifest(pl_run_dir.c_str(), &mismatched);
      if (status != ANMT_OK) return report_error(status);
      if (mismatched && mismatched[0] != '\0') {
        std::fprintf(stderr, "changed inputs:\n%s", mismatched);
        anmt_string_free(mismatched);
        return 2;
      }
      anmt_string_free(mismatched);
      std::fprintf(stderr, "manifest inputs verified\n");
    } else {
      if (pl_config.empty()) {
        std::fprintf(stderr, "error: --config is required to run a pipeline\n");
        return 1;
      }
      char* report = nullptr;
      status = anmt_run_pipeline(pl_config.c_str(), pl_run_dir.c_str(),
                                 pl_json ? 1 : 0, stderr_log, nullptr, &report);
      if (status != ANMT_OK) return report_error(status);
      emit(report);
    }
  }
  return 0;
}
