#include "anmt/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

namespace {

// Deterministic cross-platform RNG (splitmix64) for shuffling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  size_t below(size_t n) {
    return static_cast<size_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

void shuffle_indices(std::vector<size_t>& indices, Rng& rng) {
  for (size_t i = indices.size(); i > 1; --i) {
    std::swap(indices[i - 1], indices[rng.below(i)]);
  }
}

class Optimizer {
 public:
  Optimizer(const std::string& kind, double lr, const ModelParams& shape)
      : kind_(kind), lr_(lr) {
    if (kind_ == "adam") {
      m_ = zeros_like(shape);
      v_ = zeros_like(shape);
    }
  }

  void apply(ModelParams& params, Gradients& grads, double clip_norm) {
    auto ps = params.named_tensors();
    auto gs = grads.named_tensors();

    double sq_norm = 0.0;
    for (auto& [name, g] : gs) {
      for (double x : g->v) {
        if (!std::isfinite(x)) {
          fail(ErrorKind::Numeric, "non-finite gradient in " + name);
        }
        sq_norm += x * x;
      }
    }
    const double norm = std::sqrt(sq_norm);
    const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

    if (kind_ == "sgd") {
      for (size_t t = 0; t < ps.size(); ++t) {
        Tensor2& p = *ps[t].second;
        const Tensor2& g = *gs[t].second;
        for (size_t i = 0; i < p.size(); ++i) {
          p.v[i] -= lr_ * scale * g.v[i];
        }
      }
      return;
    }

    ++step_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    auto ms = m_.named_tensors();
    auto vs = v_.named_tensors();
    for (size_t t = 0; t < ps.size(); ++t) {
      Tensor2& p = *ps[t].second;
      const Tensor2& g = *gs[t].second;
      Tensor2& m = *ms[t].second;
      Tensor2& v = *vs[t].second;
      for (size_t i = 0; i < p.size(); ++i) {
        const double gi = scale * g.v[i];
        m.v[i] = b1 * m.v[i] + (1.0 - b1) * gi;
        v.v[i] = b2 * v.v[i] + (1.0 - b2) * gi * gi;
        p.v[i] -= lr_ * (m.v[i] / c1) / (std::sqrt(v.v[i] / c2) + eps);
      }
    }
  }

 private:
  std::string kind_;
  double lr_;
  size_t step_ = 0;
  ModelParams m_, v_;
};

void zero(Gradients& grads) {
  for (auto& [name, tensor] : grads.named_tensors()) {
    std::fill(tensor->v.begin(), tensor->v.end(), 0.0);
  }
}

// Little-endian byte writers for the checkpoint container.
void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return x;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  void need(size_t n) {
    if (pos_ + n > bytes_.size()) {
      fail(ErrorKind::Corrupt, "truncated checkpoint: " + path_);
    }
  }
  const std::string& bytes_;
  std::string path_;
  size_t pos_ = 0;
};

constexpr char kMagic[9] = "ANMTCKP1";

double pair_nll(const EncodedPair& pair, const ModelParams& params,
                Gradients* grads, size_t* tokens) {
  Graph g;
  const PairLoss loss = build_pair_loss(g, pair.source, pair.target, params, grads);
  if (grads) g.backward(loss.loss);
  if (tokens) *tokens += loss.tokens;
  return g.scalar(loss.loss);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0 || max_epochs == 0 || val_interval == 0 || patience == 0) {
    fail(ErrorKind::Config, "train config: counts must be positive");
  }
  if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
    fail(ErrorKind::Config, "train config: bad learning rate");
  }
  if (clip_norm < 0.0 || !std::isfinite(clip_norm)) {
    fail(ErrorKind::Config, "train config: bad clip norm");
  }
  if (optimizer != "adam" && optimizer != "sgd") {
    fail(ErrorKind::Config, "train config: optimizer must be adam or sgd");
  }
}

TrainConfig TrainConfig::load(const std::string& path) {
  return parse(read_lines(path));
}

TrainConfig TrainConfig::parse(const std::vector<std::string>& lines) {
  TrainConfig config;
  size_t lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config,
           "train config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "batch_size") {
        config.batch_size = std::stoull(value);
      } else if (key == "max_epochs") {
        config.max_epochs = std::stoull(value);
      } else if (key == "learning_rate") {
        config.learning_rate = std::stod(value);
      } else if (key == "optimizer") {
        config.optimizer = value;
      } else if (key == "clip_norm") {
        config.clip_norm = std::stod(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "val_interval") {
        config.val_interval = std::stoull(value);
      } else if (key == "patience") {
        config.patience = std::stoull(value);
      } else {
        fail(ErrorKind::Config, "train config: unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::Config, "train config: bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      fail(ErrorKind::Config, "train config: bad value for '" + key + "'");
    }
  }
  config.validate();
  return config;
}

std::string TrainConfig::serialize() const {
  std::ostringstream out;
  out << "batch_size = " << batch_size << "\n"
      << "clip_norm = " << format_double(clip_norm, 9) << "\n"
      << "learning_rate = " << format_double(learning_rate, 9) << "\n"
      << "max_epochs = " << max_epochs << "\n"
      << "optimizer = " << optimizer << "\n"
      << "patience = " << patience << "\n"
      << "seed = " << seed << "\n"
      << "val_interval = " << val_interval << "\n";
  return out.str();
}

std::uint64_t TrainConfig::digest() const { return fnv1a64(serialize()); }

EncodedCorpus encode_corpus(const std::vector<std::string>& src_lines,
                            const std::vector<std::string>& tgt_lines,
                            const Vocabulary& vocab) {
  if (src_lines.size() != tgt_lines.size()) {
    fail(ErrorKind::Alignment, "encode_corpus: side line counts differ");
  }
  EncodedCorpus corpus;
  corpus.reserve(src_lines.size());
  for (size_t i = 0; i < src_lines.size(); ++i) {
    EncodedPair pair;
    pair.source = vocab.encode_line(src_lines[i], /*append_eos=*/true);
    pair.target = vocab.encode_line(tgt_lines[i], /*append_eos=*/true);
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 8);
  put_u64(buf, ckpt.meta.epoch);
  put_u64(buf, ckpt.meta.update_count);
  put_f64(buf, ckpt.meta.val_loss);
  put_u64(buf, ckpt.meta.vocab_hash);
  put_u64(buf, ckpt.meta.config_digest);
  put_u32(buf, static_cast<std::uint32_t>(ckpt.params.embed_dim));
  put_u32(buf, static_cast<std::uint32_t>(ckpt.params.hidden_dim));
  put_u32(buf, static_cast<std::uint32_t>(ckpt.params.attn_dim));
  put_u32(buf, static_cast<std::uint32_t>(ckpt.params.vocab_size));

  const auto tensors = ckpt.params.named_tensors();
  put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    put_u64(buf, tensor->rows);
    put_u64(buf, tensor->cols);
  }
  for (const auto& [name, tensor] : tensors) {
    for (double x : tensor->v) put_f64(buf, x);
  }
  put_u64(buf, fnv1a64(buf));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Input, "cannot write checkpoint: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorKind::Input, "short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || bytes.compare(0, 8, kMagic, 8) != 0) {
    fail(ErrorKind::Corrupt, "not a checkpoint file: " + path);
  }
  // Trailing hash covers everything before it.
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[bytes.size() - 8 + i]))
              << (8 * i);
  }
  if (fnv1a64(std::string_view(bytes).substr(0, bytes.size() - 8)) != stored) {
    fail(ErrorKind::Corrupt, "checkpoint content hash mismatch: " + path);
  }

  Reader r(bytes, path);
  r.str(8);  // magic
  Checkpoint ckpt;
  ckpt.meta.epoch = r.u64();
  ckpt.meta.update_count = r.u64();
  ckpt.meta.val_loss = r.f64();
  ckpt.meta.vocab_hash = r.u64();
  ckpt.meta.config_digest = r.u64();
  const size_t embed = r.u32();
  const size_t hidden = r.u32();
  const size_t attn = r.u32();
  const size_t vocab = r.u32();
  ckpt.params = ModelParams::zeros(vocab, embed, hidden, attn);

  const auto tensors = ckpt.params.named_tensors();
  const size_t count = r.u32();
  if (count != tensors.size()) {
    fail(ErrorKind::Shape, "checkpoint tensor count mismatch: " + path);
  }
  for (const auto& [name, tensor] : tensors) {
    const std::string stored_name = r.str(r.u32());
    if (stored_name != name) {
      fail(ErrorKind::Shape, "checkpoint tensor order mismatch: expected " + name +
                                 ", found " + stored_name);
    }
    const size_t rows = r.u64();
    const size_t cols = r.u64();
    if (rows != tensor->rows || cols != tensor->cols) {
      fail(ErrorKind::Shape, "checkpoint shape mismatch for " + name + ": " +
                                 std::to_string(rows) + "x" + std::to_string(cols) +
                                 " vs " + tensor->shape_str());
    }
  }
  for (const auto& [name, tensor] : tensors) {
    for (double& x : tensor->v) x = r.f64();
  }
  ckpt.params.validate();
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, const Vocabulary& vocab) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.meta.vocab_hash != vocab.content_hash()) {
    fail(ErrorKind::Compat, "checkpoint was trained with a different vocabulary: " + path);
  }
  if (ckpt.params.vocab_size != vocab.size()) {
    fail(ErrorKind::Compat, "checkpoint vocabulary size mismatch: " + path);
  }
  return ckpt;
}

double corpus_loss(const EncodedCorpus& corpus, const ModelParams& params) {
  if (corpus.empty()) fail(ErrorKind::Input, "corpus_loss: empty corpus");
  double nll = 0.0;
  size_t tokens = 0;
  for (const auto& pair : corpus) {
    nll += pair_nll(pair, params, nullptr, &tokens);
  }
  return nll / static_cast<double>(tokens);
}

namespace {

struct TrainLoop {
  const TrainConfig& config;
  std::uint64_t vocab_hash;
  std::string out_dir;
  const LogFn& log;
  size_t max_updates;

  TrainOutput run(const EncodedCorpus& corpus, const EncodedCorpus* dev,
                  ModelParams params) {
    if (corpus.empty()) fail(ErrorKind::Input, "train: empty corpus");
    config.validate();
    params.validate();

    // Held-out validation slice when no dev set is supplied: the
    // trailing tenth, at most 500 pairs, at least 1 (unless that would
    // empty the training set).
    EncodedCorpus holdout;
    const EncodedCorpus* train_set = &corpus;
    const EncodedCorpus* dev_set = dev;
    EncodedCorpus train_slice;
    if (!dev_set) {
      size_t n_dev = std::min<size_t>(std::max<size_t>(corpus.size() / 10, 1), 500);
      if (n_dev >= corpus.size()) n_dev = 0;
      if (n_dev == 0) {
        dev_set = &corpus;
      } else {
        train_slice.assign(corpus.begin(), corpus.end() - static_cast<long>(n_dev));
        holdout.assign(corpus.end() - static_cast<long>(n_dev), corpus.end());
        train_set = &train_slice;
        dev_set = &holdout;
      }
    }

    Optimizer opt(config.optimizer, config.learning_rate, params);
    Gradients grads = zeros_like(params);

    TrainOutput out;
    double best_val = std::numeric_limits<double>::infinity();
    size_t bad_validations = 0;
    std::uint64_t update_count = 0;
    std::uint64_t last_validated_update = 0;
    double running_loss = 0.0;
    size_t running_tokens = 0;
    bool stop = false;

    const auto validate_now = [&](std::uint64_t epoch) {
      const double val_loss = corpus_loss(*dev_set, params);
      const double train_loss =
          running_tokens ? running_loss / static_cast<double>(running_tokens) : 0.0;
      if (log) {
        log("update " + std::to_string(update_count) + " train_loss " +
            format_double(train_loss, 6) + " val_loss " + format_double(val_loss, 6));
      }
      running_loss = 0.0;
      running_tokens = 0;
      Checkpoint ckpt;
      ckpt.params = params;
      ckpt.meta.epoch = epoch;
      ckpt.meta.update_count = update_count;
      ckpt.meta.val_loss = val_loss;
      ckpt.meta.vocab_hash = vocab_hash;
      ckpt.meta.config_digest = config.digest();
      if (!out_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof(name), "ckpt-%08llu.anmt",
                      static_cast<unsigned long long>(update_count));
        const std::string path = out_dir + "/" + name;
        save_checkpoint(ckpt, path);
        out.checkpoint_paths.push_back(path);
      }
      out.checkpoints.push_back(std::move(ckpt));
      out.final_train_loss = train_loss;
      last_validated_update = update_count;

      if (val_loss < best_val) {
        best_val = val_loss;
        bad_validations = 0;
      } else {
        ++bad_validations;
        if (bad_validations >= config.patience) stop = true;
      }
    };

    for (std::uint64_t epoch = 1; epoch <= config.max_epochs && !stop; ++epoch) {
      std::vector<size_t> order(train_set->size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(derive_seed(config.seed, epoch));
      shuffle_indices(order, rng);

      for (size_t begin = 0; begin < order.size() && !stop; begin += config.batch_size) {
        const size_t end = std::min(begin + config.batch_size, order.size());
        const auto batch_ids = [&] {
          std::string ids;
          for (size_t k = begin; k < end; ++k) {
            ids += (k == begin ? "" : ",") + std::to_string(order[k]);
          }
          return ids;
        };
        zero(grads);
        double batch_nll = 0.0;
        size_t batch_tokens = 0;
        try {
          for (size_t k = begin; k < end; ++k) {
            batch_nll +=
                pair_nll((*train_set)[order[k]], params, &grads, &batch_tokens);
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Numeric) throw;
          fail(ErrorKind::Numeric,
               std::string(e.what()) + " at update " +
                   std::to_string(update_count + 1) + " (batch pairs " +
                   batch_ids() + ")");
        }
        if (!std::isfinite(batch_nll)) {
          fail(ErrorKind::Numeric, "non-finite loss at update " +
                                       std::to_string(update_count + 1) +
                                       " (batch pairs " + batch_ids() + ")");
        }
        // Gradients of the mean per-token loss.
        const double inv_tokens = 1.0 / static_cast<double>(batch_tokens);
        for (auto& [name, tensor] : grads.named_tensors()) {
          for (double& x : tensor->v) x *= inv_tokens;
        }
        opt.apply(params, grads, config.clip_norm);
        ++update_count;
        running_loss += batch_nll;
        running_tokens += batch_tokens;

        if (update_count % config.val_interval == 0) validate_now(epoch);
        if (update_count >= max_updates) stop = true;
      }
      if (!stop && update_count > last_validated_update) validate_now(epoch);
    }
    if (update_count > last_validated_update || out.checkpoints.empty()) {
      validate_now(config.max_epochs);
    }
    return out;
  }
};

}  // namespace

TrainOutput train(const EncodedCorpus& corpus, const EncodedCorpus* dev,
                  const TrainConfig& config, ModelParams init_params,
                  std::uint64_t vocab_hash, const std::string& out_dir,
                  const LogFn& log) {
  TrainLoop loop{config, vocab_hash, out_dir, log,
                 std::numeric_limits<size_t>::max()};
  return loop.run(corpus, dev, std::move(init_params));
}

Checkpoint finetune(const Checkpoint& base, const EncodedCorpus& in_domain,
                    const EncodedCorpus* dev, const TrainConfig& config,
                    std::uint64_t vocab_hash, size_t max_updates, const LogFn& log) {
  if (base.meta.vocab_hash != vocab_hash) {
    fail(ErrorKind::Compat,
         "finetune: base checkpoint vocabulary does not match the corpus encoding");
  }
  if (max_updates == 0) return base;
  TrainLoop loop{config, vocab_hash, "", log, max_updates};
  TrainOutput out = loop.run(in_domain, dev, base.params);
  std::vector<Checkpoint> best = select_best(out.checkpoints, 1);
  return best[0];
}

std::vector<Checkpoint> select_best(const std::vector<Checkpoint>& checkpoints,
                                    size_t k) {
  if (checkpoints.size() < k) {
    fail(ErrorKind::Input, "select_best: only " + std::to_string(checkpoints.size()) +
                               " checkpoints for k=" + std::to_string(k));
  }
  std::vector<size_t> order(checkpoints.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (checkpoints[a].meta.val_loss != checkpoints[b].meta.val_loss) {
      return checkpoints[a].meta.val_loss < checkpoints[b].meta.val_loss;
    }
    return checkpoints[a].meta.update_count > checkpoints[b].meta.update_count;
  });
  std::vector<Checkpoint> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(checkpoints[order[i]]);
  return out;
}

}  // namespace anmt
