#ifndef ANMT_PIPELINE_HPP
#define ANMT_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anmt/decoding.hpp"
#include "anmt/training.hpp"

namespace anmt {

// One-shot experiment runner: preprocess -> bpe -> train -> [tune] ->
// translate (single and ensemble) -> score, with one report row per
// enabled ablation stage (baseline / + ar preprocessing / + tuning /
// + ensemble of k). Every random stream derives from the single seed.
struct PipelineConfig {
  std::uint64_t seed = 1;

  std::string train_src, train_tgt;
  std::string dev_src, dev_tgt;    // optional; held-out slice otherwise
  std::string test_src;
  std::vector<std::string> test_refs;

  bool preprocess_enabled = true;
  size_t max_len = 100;
  bool lowercase_english = false;
  std::string rules_path;    // empty -> built-in Arabic table
  std::string affixes_path;  // empty -> built-in lexicon

  size_t bpe_merges = 200;
  size_t vocab_cap = 90000;

  size_t embed_dim = 64;
  size_t hidden_dim = 128;
  size_t attn_dim = 128;
  TrainConfig train;  // train.seed is derived from the pipeline seed

  bool tune_enabled = false;
  std::string tune_src, tune_tgt;
  double tune_learning_rate = 1e-4;
  size_t tune_max_epochs = 4;

  size_t ensemble_size = 1;  // > 1 adds the ensemble row
  DecodeConfig decode;

  static PipelineConfig load(const std::string& path);
  static PipelineConfig parse(const std::vector<std::string>& lines);
  std::string serialize() const;  // canonical form, feeds digest()
  std::uint64_t digest() const;
  void validate() const;  // file existence, stage dependencies
};

struct PipelineReport {
  struct Row {
    std::string system;  // "baseline", "+ ar preprocessing", ...
    double bleu = 0.0;   // x100
  };
  std::vector<Row> rows;

  std::string render_text() const;
  std::string render_json() const;
};

// Runs every stage under run_dir, persisting intermediate artifacts,
// report.txt / report.json and manifest.json. A stage failure aborts
// with the stage name attached; partial artifacts are kept.
PipelineReport run_pipeline(const PipelineConfig& config, const std::string& run_dir,
                            const LogFn& log = nullptr);

// Manifest of a finished run: config digest, seed, code version, input
// file hashes and per-stage timings.
struct Manifest {
  std::string code_version;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path, fnv64 hex
  std::vector<std::pair<std::string, double>> stage_seconds;

  std::string render_json() const;
};

Manifest read_manifest(const std::string& run_dir);

// Re-hashes the manifest's input files; returns the paths whose
// contents changed (or vanished) since the run.
std::vector<std::string> verify_manifest(const std::string& run_dir);

}  // namespace anmt

#endif
