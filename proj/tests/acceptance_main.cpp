// Acceptance suite: runs every contract-level criterion at its stated
// tolerance and prints one [PASS]/[FAIL] line per criterion. Exit code
// is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "anmt/bleu.hpp"
#include "anmt/decoding.hpp"
#include "anmt/error.hpp"
#include "anmt/model.hpp"
#include "anmt/pipeline.hpp"
#include "anmt/subword.hpp"
#include "anmt/textprep.hpp"
#include "anmt/training.hpp"
#include "anmt/util.hpp"

using namespace anmt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- helpers

Vocabulary token_vocab(size_t tokens) {
  std::vector<std::vector<std::string>> corpus;
  for (size_t i = 0; i < tokens; ++i) corpus.push_back({"t" + std::to_string(i)});
  return Vocabulary::build(corpus, 90000);
}

EncodedCorpus copy_corpus(size_t pairs, int32_t lo, int32_t hi, size_t min_len,
                          size_t max_len, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> len(min_len, max_len);
  std::uniform_int_distribution<int32_t> tok(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  EncodedCorpus corpus;
  for (size_t i = 0; i < pairs; ++i) {
    EncodedPair pair;
    const size_t n = len(rng);
    for (size_t k = 0; k < n; ++k) pair.source.push_back(tok(rng));
    pair.target = pair.source;
    for (auto& y : pair.target) {
      if (noise > 0.0 && coin(rng) < noise) y = tok(rng);
    }
    pair.source.push_back(Vocabulary::kEos);
    pair.target.push_back(Vocabulary::kEos);
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

std::vector<int32_t> random_ids(std::mt19937_64& rng, size_t vocab, size_t max_len) {
  std::vector<int32_t> ids(1 + rng() % max_len);
  for (auto& id : ids) id = static_cast<int32_t>(4 + rng() % (vocab - 4));
  return ids;
}

double teacher_forced_accuracy(const EncodedCorpus& corpus, const ModelParams& p,
                               size_t limit) {
  size_t hits = 0, total = 0;
  for (size_t i = 0; i < std::min(limit, corpus.size()); ++i) {
    const EncodedPair& pair = corpus[i];
    const EncodedSource src = encode_source(pair.source, p);
    DecoderState state = src.initial;
    for (int32_t y : pair.target) {
      const StepResult step = decoder_step_cached(state, src, p);
      size_t best = 0;
      for (size_t k = 1; k < step.dist.size(); ++k) {
        if (step.dist[k] > step.dist[best]) best = k;
      }
      if (static_cast<int32_t>(best) == y) ++hits;
      ++total;
      state.s = step.state.s;
      state.last_token = y;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double greedy_copy_bleu(const EncodedCorpus& corpus, const ModelParams& p,
                        size_t limit) {
  BleuStats total;
  for (size_t i = 0; i < std::min(limit, corpus.size()); ++i) {
    const EncodedPair& pair = corpus[i];
    auto hyp = greedy_decode(pair.source, p, 3 * pair.source.size() + 5);
    if (!hyp.empty() && hyp.back() == Vocabulary::kEos) hyp.pop_back();
    std::vector<int32_t> ref = pair.target;
    if (!ref.empty() && ref.back() == Vocabulary::kEos) ref.pop_back();
    const auto words = [](const std::vector<int32_t>& ids) {
      std::vector<std::string> out;
      for (int32_t id : ids) out.push_back("t" + std::to_string(id));
      return out;
    };
    total += sentence_stats(words(hyp), {words(ref)});
  }
  return total.candidate_length == 0 ? 0.0 : corpus_bleu(total);
}

double ensemble_corpus_loss(const EncodedCorpus& corpus,
                            const std::vector<const ModelParams*>& models) {
  double nll = 0.0;
  size_t tokens = 0;
  for (const auto& pair : corpus) {
    std::vector<EncoderStates> hs;
    std::vector<DecoderState> states;
    for (const ModelParams* m : models) {
      hs.push_back(encode(pair.source, *m));
      states.push_back(init_decoder(hs.back(), *m));
    }
    for (int32_t y : pair.target) {
      EnsembleStepResult step = ensemble_step(states, hs, models);
      nll -= std::log(std::max(step.dist[static_cast<size_t>(y)], 1e-300));
      ++tokens;
      states = std::move(step.states);
      for (auto& s : states) s.last_token = y;
    }
  }
  return nll / static_cast<double>(tokens);
}

// Naive reference BLEU, independent of bleu.cpp: string-keyed n-grams,
// straight from the metric definition.
using Sent = std::vector<std::string>;
double naive_bleu(const std::vector<Sent>& hyps,
                  const std::vector<std::vector<Sent>>& refs) {
  long long matches[4] = {0, 0, 0, 0}, totals[4] = {0, 0, 0, 0};
  long long cand_len = 0, ref_len = 0;
  const auto grams = [](const Sent& s, size_t n) {
    std::map<std::string, long long> out;
    for (size_t i = 0; i + n <= s.size(); ++i) {
      std::string key;
      for (size_t k = 0; k < n; ++k) key += s[i + k] + "\x01";
      ++out[key];
    }
    return out;
  };
  for (size_t line = 0; line < hyps.size(); ++line) {
    cand_len += static_cast<long long>(hyps[line].size());
    long long best = static_cast<long long>(refs[line][0].size());
    for (const auto& r : refs[line]) {
      const long long len = static_cast<long long>(r.size());
      const long long dn = std::llabs(len - (long long)hyps[line].size());
      const long long db = std::llabs(best - (long long)hyps[line].size());
      if (dn < db || (dn == db && len < best)) best = len;
    }
    ref_len += best;
    for (size_t n = 1; n <= 4; ++n) {
      const auto hg = grams(hyps[line], n);
      for (const auto& [gram, count] : hg) {
        long long clip = 0;
        for (const auto& r : refs[line]) {
          const auto rg = grams(r, n);
          auto it = rg.find(gram);
          if (it != rg.end()) clip = std::max(clip, it->second);
        }
        matches[n - 1] += std::min(count, clip);
        totals[n - 1] += count;
      }
    }
  }
  double log_sum = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log((double)matches[n] / (double)totals[n]);
  }
  const double bp = std::min(1.0, std::exp(1.0 - (double)ref_len / (double)cand_len));
  return bp * std::exp(0.25 * log_sum);
}

// Arabic sample material for the preprocessing criterion.
const std::vector<std::string> kArabicWords = {
    "والكتاب",
    "كتاب",
    "بالقلم",
    "قلم",
    "كتابها",
    "منها",
    "أكل",
    "إلى",
    "على",
    "هذه",
    "والد",
    "كِتَابٌ",
    "سيكتب",
    "المدرسة"};
const std::vector<std::string> kEnglishWords = {
    "book", "the", "pen", "with", "ate", "from", "her", "and", "school", "wrote"};

struct PipelineFiles {
  std::string config_path;
  fs::path dir;
};

PipelineFiles write_pipeline_fixture(const fs::path& dir) {
  fs::create_directories(dir);
  std::mt19937_64 rng(17);
  std::vector<std::string> src, tgt;
  for (int i = 0; i < 24; ++i) {
    const size_t len = 1 + rng() % 4;
    std::string s, t;
    for (size_t k = 0; k < len; ++k) {
      if (k) {
        s += ' ';
        t += ' ';
      }
      s += kArabicWords[rng() % kArabicWords.size()];
      t += kEnglishWords[rng() % kEnglishWords.size()];
    }
    src.push_back(s);
    tgt.push_back(t);
  }
  write_lines((dir / "train.ar").string(), src);
  write_lines((dir / "train.en").string(), tgt);
  write_lines((dir / "test.ar").string(), {src.begin(), src.begin() + 5});
  write_lines((dir / "test.en").string(), {tgt.begin(), tgt.begin() + 5});
  write_lines((dir / "tune.ar").string(), {src.begin(), src.begin() + 8});
  write_lines((dir / "tune.en").string(), {tgt.begin(), tgt.begin() + 8});

  const std::vector<std::string> cfg = {
      "seed = 11",
      "data.train_src = " + (dir / "train.ar").string(),
      "data.train_tgt = " + (dir / "train.en").string(),
      "data.test_src = " + (dir / "test.ar").string(),
      "data.test_ref = " + (dir / "test.en").string(),
      "preprocess.enabled = true",
      "preprocess.max_len = 50",
      "bpe.merges = 30",
      "bpe.vocab_cap = 500",
      "model.embed_dim = 8",
      "model.hidden_dim = 8",
      "model.attn_dim = 8",
      "train.batch_size = 8",
      "train.max_epochs = 2",
      "train.learning_rate = 0.005",
      "train.val_interval = 50",
      "train.patience = 10",
      "tune.enabled = true",
      "tune.src = " + (dir / "tune.ar").string(),
      "tune.tgt = " + (dir / "tune.en").string(),
      "tune.learning_rate = 0.001",
      "tune.max_epochs = 1",
      "ensemble.size = 2",
      "decode.beam = 2",
      "decode.alpha = 0.6"};
  PipelineFiles files;
  files.dir = dir;
  files.config_path = (dir / "pipe.cfg").string();
  write_lines(files.config_path, cfg);
  return files;
}

// ---------------------------------------------------------------- criteria

Outcome check_gradient_correctness() {
  const auto start = Clock::now();
  ModelParams p = ModelParams::init(8, 4, 4, 4, 20);
  // Conditioned test point: U[-0.64, 0.64] keeps gradient coordinates
  // clear of central-difference rounding noise.
  for (auto& [name, tensor] : p.named_tensors()) {
    for (double& x : tensor->v) x *= 8.0;
  }
  const std::vector<int32_t> src = {4, 6, 7};
  const std::vector<int32_t> tgt = {5, 4, 6, Vocabulary::kEos};
  Gradients grads = zeros_like(p);
  {
    Graph g;
    g.backward(build_pair_loss(g, src, tgt, p, &grads).loss);
  }
  const auto eval = [&]() {
    Graph g;
    return g.scalar(build_pair_loss(g, src, tgt, p, nullptr).loss);
  };
  std::vector<std::pair<Tensor2*, const Tensor2*>> pairs;
  auto ps = p.named_tensors();
  auto gs = grads.named_tensors();
  for (size_t i = 0; i < ps.size(); ++i) pairs.emplace_back(ps[i].second, gs[i].second);
  const double err = grad_check(eval, pairs, 1e-5);
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = err < 1e-4 && elapsed < 60.0;
  out.detail = "max rel error " + format_double(err, 8) + " (tol 1e-4), " +
               format_double(elapsed, 1) + "s (limit 60s)";
  return out;
}

Outcome check_distribution_normalization() {
  std::mt19937_64 rng(21);
  size_t alpha_checked = 0, dist_checked = 0;
  double worst_alpha = 0.0, worst_dist = 0.0;
  for (int model_idx = 0; model_idx < 25; ++model_idx) {
    ModelParams p = ModelParams::init(8 + rng() % 8, 3 + rng() % 4, 3 + rng() % 4,
                                      3 + rng() % 4, 600 + model_idx);
    for (auto& [name, tensor] : p.named_tensors()) {
      for (double& x : tensor->v) x *= 5.0;
    }
    for (int trial = 0; trial < 45; ++trial) {
      const auto src = random_ids(rng, p.vocab_size, 7);
      const EncoderStates h = encode(src, p);
      DecoderState state = init_decoder(h, p);
      const size_t steps = 1 + rng() % 2;
      for (size_t s = 0; s < steps; ++s) {
        const AttentionResult att = attend(state, h, p);
        double alpha_sum = 0.0;
        for (double a : att.alpha) alpha_sum += a;
        worst_alpha = std::max(worst_alpha, std::abs(alpha_sum - 1.0));
        ++alpha_checked;

        const StepResult step = decoder_step(state, h, p);
        double dist_sum = 0.0;
        for (double x : step.dist) dist_sum += x;
        worst_dist = std::max(worst_dist, std::abs(dist_sum - 1.0));
        ++dist_checked;

        state.s = step.state.s;
        state.last_token = static_cast<int32_t>(4 + rng() % (p.vocab_size - 4));
      }
    }
  }
  Outcome out;
  out.pass = alpha_checked >= 1000 && dist_checked >= 1000 && worst_alpha < 1e-9 &&
             worst_dist < 1e-9;
  out.detail = std::to_string(alpha_checked) + " attention vectors (worst |sum-1| " +
               format_double(worst_alpha, 12) + "), " + std::to_string(dist_checked) +
               " output distributions (worst " + format_double(worst_dist, 12) +
               "), tol 1e-9";
  return out;
}

Outcome check_chain_rule_identity() {
  std::mt19937_64 rng(22);
  double worst = 0.0;
  size_t cases = 0;
  for (int trial = 0; trial < 40; ++trial) {
    ModelParams p = ModelParams::init(8 + rng() % 6, 3 + rng() % 3, 3 + rng() % 3,
                                      3 + rng() % 3, 700 + trial);
    for (auto& [name, tensor] : p.named_tensors()) {
      for (double& x : tensor->v) x *= 4.0;
    }
    const auto src = random_ids(rng, p.vocab_size, 6);
    auto tgt = random_ids(rng, p.vocab_size, 6);
    tgt.push_back(Vocabulary::kEos);

    const double whole = sequence_logprob(src, tgt, p);
    const EncoderStates h = encode(src, p);
    DecoderState state = init_decoder(h, p);
    double acc = 0.0;
    for (int32_t y : tgt) {
      const StepResult step = decoder_step(state, h, p);
      acc += std::log(std::max(step.dist[static_cast<size_t>(y)], 1e-300));
      state.s = step.state.s;
      state.last_token = y;
    }
    worst = std::max(worst, std::abs(whole - acc));
    ++cases;
  }
  Outcome out;
  out.pass = worst < 1e-10;
  out.detail = std::to_string(cases) + " random model/pair cases, worst |diff| " +
               format_double(worst, 14) + " (tol 1e-10)";
  return out;
}

Outcome check_bleu_oracle(const fs::path& scratch) {
  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const size_t lines = 1 + rng() % 8;
    const size_t vocab = 2 + rng() % 8;
    const size_t n_refs = 1 + rng() % 3;
    std::vector<Sent> hyps;
    std::vector<std::vector<Sent>> refs;
    BleuStats stats;
    for (size_t i = 0; i < lines; ++i) {
      Sent hyp;
      const size_t len = 1 + rng() % 14;
      for (size_t k = 0; k < len; ++k) hyp.push_back("w" + std::to_string(rng() % vocab));
      std::vector<Sent> ref_set;
      for (size_t r = 0; r < n_refs; ++r) {
        Sent ref;
        const size_t rlen = 1 + rng() % 14;
        for (size_t k = 0; k < rlen; ++k) {
          ref.push_back("w" + std::to_string(rng() % vocab));
        }
        ref_set.push_back(std::move(ref));
      }
      stats += sentence_stats(hyp, ref_set);
      hyps.push_back(std::move(hyp));
      refs.push_back(std::move(ref_set));
    }
    const double got = corpus_bleu(stats);
    const double want = naive_bleu(hyps, refs);
    worst = std::max(worst, std::abs(got - want));
  }

  // Hand example: clipped unigram precision 2/7.
  const BleuStats hand = sentence_stats(
      {"the", "the", "the", "the", "the", "the", "the"},
      {{"the", "cat", "is", "on", "the", "mat"}});
  const bool hand_ok = hand.matches[0] == 2 && hand.totals[0] == 7;

  // Identical files score 100.00.
  const std::vector<std::string> lines = {"the cat sat on the mat",
                                          "a long enough sentence for four grams"};
  write_lines((scratch / "hyp.txt").string(), lines);
  write_lines((scratch / "ref.txt").string(), lines);
  const BleuReport report =
      score_files((scratch / "hyp.txt").string(), {(scratch / "ref.txt").string()});
  const bool identical_ok = format_double(report.bleu, 2) == "100.00";

  Outcome out;
  out.pass = worst < 1e-9 && hand_ok && identical_ok;
  out.detail = "200 corpora vs naive scorer, worst |diff| " +
               format_double(worst, 12) + " (tol 1e-9); hand 2/7 " +
               (hand_ok ? "ok" : "WRONG") + "; identical -> " +
               format_double(report.bleu, 2);
  return out;
}

Outcome check_bpe(const fs::path& pipeline_run, const PipelineFiles& fixture) {
  // Round trip over a generated toy corpus.
  std::mt19937_64 rng(24);
  std::vector<std::vector<std::string>> corpus;
  std::vector<std::string> pool = kEnglishWords;
  pool.insert(pool.end(), kArabicWords.begin(), kArabicWords.end());
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> sentence;
    const size_t len = 1 + rng() % 10;
    for (size_t k = 0; k < len; ++k) sentence.push_back(pool[rng() % pool.size()]);
    corpus.push_back(std::move(sentence));
  }
  const MergeTable codes = learn_bpe(corpus, 60, 90000);
  size_t round_trips = 0;
  bool round_trip_ok = true;
  for (const auto& sentence : corpus) {
    if (decode_bpe(apply_bpe(sentence, codes)) != sentence) round_trip_ok = false;
    ++round_trips;
  }

  // Cap respected at the paper cap and at a tight cap.
  std::vector<std::vector<std::string>> bpe_corpus;
  for (const auto& sentence : corpus) bpe_corpus.push_back(apply_bpe(sentence, codes));
  const Vocabulary big = Vocabulary::build(bpe_corpus, 90000);
  const bool big_ok = big.size() <= 90000;
  bool tight_ok = true;
  {
    const std::vector<std::vector<std::string>> small_corpus = {
        {"aba", "bab", "abab", "bbaa", "aabb"}};
    const MergeTable tight = learn_bpe(small_corpus, 50, 12);
    std::set<std::string> symbols;
    for (const auto& sentence : small_corpus) {
      for (const auto& word : sentence) {
        const std::u32string cps = utf8_decode(word);
        for (size_t i = 0; i < cps.size(); ++i) {
          std::string s = utf8_encode(std::u32string(1, cps[i]));
          if (i + 1 == cps.size()) s += "</w>";
          symbols.insert(s);
        }
      }
    }
    for (const auto& [l, r] : tight.merges) symbols.insert(l + r);
    // characters + merge outputs + 4 reserved ids must fit the cap
    tight_ok = symbols.size() + 4 <= 12;
  }

  // Decoded translations from the pipeline run are marker free, both
  // the beam outputs on disk and a greedy (beam 1) pass.
  bool marker_free = true;
  std::string marker_where;
  for (const auto& entry : fs::directory_iterator(pipeline_run / "trans")) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 4 || name.substr(name.size() - 4) != ".out") continue;
    for (const auto& line : read_lines(entry.path().string())) {
      for (const auto& token : split_ws(line)) {
        if (token.size() >= 2 && token.compare(token.size() - 2, 2, "@@") == 0) {
          marker_free = false;
          marker_where = name;
        }
      }
    }
  }
  {
    const fs::path variant = pipeline_run / "variants" / "arprep";
    const Vocabulary vocab = Vocabulary::load((variant / "vocab.tsv").string());
    const MergeTable var_codes = MergeTable::load((variant / "codes.bpe").string());
    std::vector<Checkpoint> best;
    // best.anmt is not written by the pipeline; take the last train ckpt.
    std::vector<std::string> ckpts;
    for (const auto& entry : fs::directory_iterator(variant / "ckpt-m0")) {
      ckpts.push_back(entry.path().string());
    }
    std::sort(ckpts.begin(), ckpts.end());
    best.push_back(load_checkpoint(ckpts.back(), vocab));
    DecodeConfig greedy;
    greedy.beam_size = 1;
    const Translator tr(best, vocab, var_codes, greedy);
    for (const auto& line : read_lines((fixture.dir / "test.ar").string())) {
      const auto result = tr.translate_line(line);
      if (result.text.find("@@") != std::string::npos) {
        marker_free = false;
        marker_where = "greedy";
      }
    }
  }

  Outcome out;
  out.pass = round_trip_ok && big_ok && tight_ok && marker_free;
  out.detail = std::to_string(round_trips) + " round trips " +
               (round_trip_ok ? "ok" : "FAILED") + "; vocab " +
               std::to_string(big.size()) + " <= cap 90000 " +
               (big_ok ? "ok" : "FAILED") + "; tight cap 12 " +
               (tight_ok ? "ok" : "FAILED") + "; outputs marker-free " +
               (marker_free ? "ok" : ("FAILED at " + marker_where));
  return out;
}

Outcome check_copy_task() {
  const auto start = Clock::now();
  const EncodedCorpus corpus = copy_corpus(2000, 4, 23, 2, 15, 0.0, 101);
  const Vocabulary vocab = token_vocab(20);

  TrainConfig config;
  config.batch_size = 32;
  config.max_epochs = 2;  // per round; rounds continue until converged
  config.learning_rate = 3e-3;
  config.optimizer = "adam";
  config.clip_norm = 1.0;
  config.val_interval = 1000000;  // validate at epoch ends
  config.patience = 1000;
  config.seed = 404;

  ModelParams params = ModelParams::init(vocab.size(), 24, 32, 32, 404);
  double accuracy = 0.0, bleu = 0.0;
  int rounds = 0;
  const double budget_seconds = 13.5 * 60.0;
  while (rounds < 12) {
    ++rounds;
    config.seed = 404 + static_cast<std::uint64_t>(rounds);
    TrainOutput out = train(corpus, nullptr, config, params, 0xc0);
    params = out.checkpoints.back().params;
    accuracy = teacher_forced_accuracy(corpus, params, 300);
    if (accuracy > 0.99) {
      bleu = greedy_copy_bleu(corpus, params, 150);
      if (bleu > 0.95) break;
    }
    if (seconds_since(start) > budget_seconds) break;
  }
  if (bleu == 0.0 && accuracy > 0.99) bleu = greedy_copy_bleu(corpus, params, 150);
  const double elapsed = seconds_since(start);

  Outcome out;
  out.pass = accuracy > 0.99 && bleu > 0.95 && elapsed < 15.0 * 60.0;
  out.detail = "teacher-forced accuracy " + format_double(accuracy, 4) +
               " (> 0.99), greedy BLEU " + format_double(bleu, 4) + " (> 0.95), " +
               format_double(elapsed, 0) + "s over " + std::to_string(rounds) +
               " rounds (limit 900s)";
  return out;
}

Outcome check_finetune_direction() {
  // Two domains over one vocabulary: A = ids 4..11, B = ids 12..19.
  const EncodedCorpus base_b = copy_corpus(500, 12, 19, 2, 8, 0.0, 201);
  const EncodedCorpus base_a = copy_corpus(50, 4, 11, 2, 8, 0.0, 202);
  EncodedCorpus base_train = base_b;
  base_train.insert(base_train.end(), base_a.begin(), base_a.end());
  const EncodedCorpus in_domain = copy_corpus(200, 4, 11, 2, 8, 0.0, 203);
  const EncodedCorpus in_dev = copy_corpus(60, 4, 11, 2, 8, 0.0, 204);
  const EncodedCorpus in_test = copy_corpus(80, 4, 11, 2, 8, 0.0, 205);

  TrainConfig config;
  config.batch_size = 16;
  config.max_epochs = 4;
  config.learning_rate = 3e-3;
  config.val_interval = 1000000;
  config.patience = 1000;
  config.seed = 207;

  const ModelParams init = ModelParams::init(20, 16, 20, 20, 206);
  TrainOutput base_run = train(base_train, nullptr, config, init, 0xd0);
  Checkpoint base = select_best(base_run.checkpoints, 1)[0];
  const double before = corpus_loss(in_test, base.params);

  TrainConfig tune_config = config;
  tune_config.learning_rate = 1e-3;
  tune_config.max_epochs = 3;
  tune_config.seed = 208;
  const Checkpoint tuned =
      finetune(base, in_domain, &in_dev, tune_config, 0xd0);
  const double after = corpus_loss(in_test, tuned.params);

  Outcome out;
  out.pass = after < before;
  out.detail = "in-domain val loss " + format_double(before, 6) + " -> " +
               format_double(after, 6) +
               (out.pass ? " (strictly reduced)" : " (NOT reduced)");
  return out;
}

Outcome check_ensemble() {
  // Identity: k identical checkpoints translate exactly like one model.
  std::mt19937_64 rng(25);
  ModelParams solo = ModelParams::init(12, 4, 4, 4, 801);
  for (auto& [name, tensor] : solo.named_tensors()) {
    for (double& x : tensor->v) x *= 6.0;
  }
  bool identity_ok = true;
  double worst_dist_diff = 0.0;
  DecodeConfig config;
  config.beam_size = 3;
  for (int trial = 0; trial < 30; ++trial) {
    auto src = random_ids(rng, solo.vocab_size, 6);
    src.push_back(Vocabulary::kEos);
    const DecodeResult one = ensemble_beam_search({&solo}, src, config);
    const DecodeResult five =
        ensemble_beam_search({&solo, &solo, &solo, &solo, &solo}, src, config);
    if (one.tokens != five.tokens) identity_ok = false;

    const EncoderStates h = encode(src, solo);
    const DecoderState s0 = init_decoder(h, solo);
    const StepResult single = decoder_step(s0, h, solo);
    const EnsembleStepResult multi = ensemble_step(
        {s0, s0, s0, s0, s0}, {h, h, h, h, h}, {&solo, &solo, &solo, &solo, &solo});
    for (size_t i = 0; i < single.dist.size(); ++i) {
      worst_dist_diff =
          std::max(worst_dist_diff, std::abs(single.dist[i] - multi.dist[i]));
    }
  }

  // Direction: 5 seeds on a noisy copy task; ensemble held-out loss must
  // not exceed the best single member.
  const EncodedCorpus noisy_train = copy_corpus(500, 4, 15, 2, 8, 0.1, 301);
  const EncodedCorpus noisy_held = copy_corpus(100, 4, 15, 2, 8, 0.1, 302);
  TrainConfig tc;
  tc.batch_size = 16;
  tc.max_epochs = 12;
  tc.learning_rate = 3e-3;
  tc.val_interval = 1000000;
  tc.patience = 1000;

  std::vector<ModelParams> members;
  for (int seed = 1; seed <= 5; ++seed) {
    tc.seed = 300 + static_cast<std::uint64_t>(seed);
    const ModelParams init = ModelParams::init(16, 16, 20, 20, 310 + seed);
    TrainOutput run = train(noisy_train, nullptr, tc, init, 0xe0);
    members.push_back(select_best(run.checkpoints, 1)[0].params);
  }
  double best_single = std::numeric_limits<double>::infinity();
  for (const auto& m : members) {
    best_single = std::min(best_single, corpus_loss(noisy_held, m));
  }
  std::vector<const ModelParams*> member_ptrs;
  for (const auto& m : members) member_ptrs.push_back(&m);
  const double ensemble_loss = ensemble_corpus_loss(noisy_held, member_ptrs);

  Outcome out;
  out.pass = identity_ok && worst_dist_diff < 1e-12 && ensemble_loss <= best_single;
  out.detail = std::string("identical-members identity ") +
               (identity_ok ? "ok" : "FAILED") + " (worst dist diff " +
               format_double(worst_dist_diff, 14) + ", tol 1e-12); held-out loss " +
               format_double(ensemble_loss, 6) + " vs best member " +
               format_double(best_single, 6);
  return out;
}

Outcome check_pipeline_determinism(const PipelineFiles& fixture,
                                   const fs::path& run1, const fs::path& run2) {
  const PipelineConfig config = PipelineConfig::load(fixture.config_path);
  run_pipeline(config, run1.string());
  run_pipeline(config, run2.string());

  bool reports_equal =
      read_file((run1 / "report.txt").string()) ==
          read_file((run2 / "report.txt").string()) &&
      read_file((run1 / "report.json").string()) ==
          read_file((run2 / "report.json").string());

  // Every checkpoint byte-identical across the two runs.
  size_t compared = 0;
  bool ckpts_equal = true;
  for (const auto& entry : fs::recursive_directory_iterator(run1)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() < 5 || name.substr(name.size() - 5) != ".anmt") continue;
    const fs::path rel = fs::relative(entry.path(), run1);
    if (read_file(entry.path().string()) != read_file((run2 / rel).string())) {
      ckpts_equal = false;
    }
    ++compared;
  }

  Outcome out;
  out.pass = reports_equal && ckpts_equal && compared > 0;
  out.detail = std::string("reports byte-identical ") +
               (reports_equal ? "ok" : "FAILED") + "; " + std::to_string(compared) +
               " checkpoints byte-identical " + (ckpts_equal ? "ok" : "FAILED");
  return out;
}

Outcome check_preprocessing_invariants() {
  const NormalizationRuleSet rules = NormalizationRuleSet::arabic_default();
  const AffixLexicon affixes = AffixLexicon::arabic_default();
  std::mt19937_64 rng(26);
  size_t lines = 0;
  bool idempotent = true, round_trip = true;
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    const size_t len = 1 + rng() % 12;
    for (size_t k = 0; k < len; ++k) {
      if (k) line += ' ';
      line += kArabicWords[rng() % kArabicWords.size()];
    }
    const std::string normalized = rules.normalize(line);
    if (rules.normalize(normalized) != normalized) idempotent = false;
    if (desegment(affixes.segment(normalized)) != normalized) round_trip = false;
    ++lines;
  }
  Outcome out;
  out.pass = idempotent && round_trip;
  out.detail = std::to_string(lines) + " lines: idempotence " +
               (idempotent ? "ok" : "FAILED") + ", segment/desegment round trip " +
               (round_trip ? "ok" : "FAILED");
  return out;
}

}  // namespace

int main() {
  const fs::path scratch =
      fs::temp_directory_path() /
      ("anmt-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(scratch);

  std::vector<std::pair<std::string, Outcome>> results;
  const auto run = [&](const std::string& name, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %-28s %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL",
                name.c_str(), outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    results.emplace_back(name, outcome);
  };

  run("gradient-correctness", check_gradient_correctness);
  run("distribution-normalization", check_distribution_normalization);
  run("chain-rule-identity", check_chain_rule_identity);
  run("bleu-oracle-equivalence", [&] { return check_bleu_oracle(scratch); });

  // The pipeline fixture feeds both the determinism criterion and the
  // marker-free half of the BPE criterion.
  const PipelineFiles fixture = write_pipeline_fixture(scratch / "fixture");
  run("pipeline-determinism", [&] {
    return check_pipeline_determinism(fixture, scratch / "run1", scratch / "run2");
  });
  run("bpe-roundtrip-and-cap",
      [&] { return check_bpe(scratch / "run1", fixture); });

  run("copy-task-convergence", check_copy_task);
  run("finetune-direction", check_finetune_direction);
  run("ensemble-identity-and-gain", check_ensemble);
  run("preprocessing-invariants", check_preprocessing_invariants);

  size_t failures = 0;
  for (const auto& [name, outcome] : results) {
    if (!outcome.pass) ++failures;
  }
  std::printf("%zu/%zu criteria passed\n", results.size() - failures, results.size());

  std::error_code ec;
  fs::remove_all(scratch, ec);
  return static_cast<int>(failures);
}
