#ifndef ANMT_TRAINING_HPP
#define ANMT_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "anmt/model.hpp"
#include "anmt/subword.hpp"

namespace anmt {

struct TrainConfig {
  size_t batch_size = 32;
  size_t max_epochs = 10;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";  // "adam" | "sgd"
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  size_t val_interval = 100;  // updates between validations
  size_t patience = 5;        // non-improving validations before stopping

  void validate() const;
  // Line-based "key = value"; '#' comments; unknown keys rejected.
  static TrainConfig load(const std::string& path);
  static TrainConfig parse(const std::vector<std::string>& lines);
  std::string serialize() const;  // canonical form, feeds digest()
  std::uint64_t digest() const;
};

// Id-encoded parallel pairs, EOS appended on both sides.
struct EncodedPair {
  std::vector<int32_t> source;
  std::vector<int32_t> target;
};
using EncodedCorpus = std::vector<EncodedPair>;

EncodedCorpus encode_corpus(const std::vector<std::string>& src_lines,
                            const std::vector<std::string>& tgt_lines,
                            const Vocabulary& vocab);

struct CheckpointMeta {
  std::uint64_t epoch = 0;
  std::uint64_t update_count = 0;
  double val_loss = 0.0;
  std::uint64_t vocab_hash = 0;
  std::uint64_t config_digest = 0;
};

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// Self-describing binary container: little-endian, 64-bit floats, shape
// table before the blobs, trailing content hash. Round trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
// Additionally requires the checkpoint to match this vocabulary.
Checkpoint load_checkpoint(const std::string& path, const Vocabulary& vocab);

struct TrainOutput {
  std::vector<Checkpoint> checkpoints;       // one per validation
  std::vector<std::string> checkpoint_paths; // parallel; empty if out_dir empty
  double final_train_loss = 0.0;
};

using LogFn = std::function<void(const std::string&)>;

// Minibatch maximum-likelihood training of the mean per-token negative
// log-likelihood, with global-norm gradient clipping. Deterministic for
// a fixed config: fixed shuffle (own Fisher-Yates over a splitmix64
// stream), fixed accumulation order. When dev is null a trailing slice
// of the corpus is held out for validation.
TrainOutput train(const EncodedCorpus& corpus, const EncodedCorpus* dev,
                  const TrainConfig& config, ModelParams init_params,
                  std::uint64_t vocab_hash, const std::string& out_dir = "",
                  const LogFn& log = nullptr);

// Continued training from a checkpoint on a small in-domain corpus with
// a fresh optimizer. Returns the best validation checkpoint of the run,
// or the base checkpoint unchanged when max_updates is 0.
Checkpoint finetune(const Checkpoint& base, const EncodedCorpus& in_domain,
                    const EncodedCorpus* dev, const TrainConfig& config,
                    std::uint64_t vocab_hash,
                    size_t max_updates = std::numeric_limits<size_t>::max(),
                    const LogFn& log = nullptr);

// k lowest validation-loss checkpoints; ties prefer the later update.
std::vector<Checkpoint> select_best(const std::vector<Checkpoint>& checkpoints,
                                    size_t k);

// Mean per-token NLL of a corpus under fixed parameters.
double corpus_loss(const EncodedCorpus& corpus, const ModelParams& params);

}  // namespace anmt

#endif
