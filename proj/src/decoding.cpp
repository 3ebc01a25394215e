#include "anmt/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "anmt/error.hpp"
#include "anmt/util.hpp"

namespace anmt {

namespace {

double token_logprob(const std::vector<double>& dist, int32_t token) {
  return std::log(std::max(dist[static_cast<size_t>(token)], 1e-300));
}

// Lowest index among maxima, matching greedy tie-breaking.
int32_t argmax(const std::vector<double>& dist) {
  size_t best = 0;
  for (size_t i = 1; i < dist.size(); ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return static_cast<int32_t>(best);
}

std::vector<int32_t> top_tokens(const std::vector<double>& dist, size_t k) {
  std::vector<int32_t> ids(dist.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int32_t>(i);
  const size_t take = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<long>(take), ids.end(),
                    [&](int32_t a, int32_t b) {
                      if (dist[a] != dist[b]) return dist[a] > dist[b];
                      return a < b;
                    });
  ids.resize(take);
  return ids;
}

double normalized_score(const Hypothesis& hyp, double alpha) {
  const double len = static_cast<double>(std::max<size_t>(hyp.tokens.size(), 1));
  return hyp.logprob / std::pow(len, alpha);
}

std::vector<double> combine_dists(const std::vector<std::vector<double>>& dists,
                                  bool arithmetic_mean) {
  const size_t vocab = dists[0].size();
  std::vector<double> combined(vocab, 0.0);
  if (arithmetic_mean) {
    for (const auto& d : dists) {
      for (size_t i = 0; i < vocab; ++i) combined[i] += d[i];
    }
    double sum = 0.0;
    for (double& x : combined) sum += x;
    for (double& x : combined) x /= sum;
    return combined;
  }
  // Uniform log-average, renormalized: geometric-mean combination.
  const double inv = 1.0 / static_cast<double>(dists.size());
  for (size_t i = 0; i < vocab; ++i) {
    double acc = 0.0;
    for (const auto& d : dists) acc += std::log(std::max(d[i], 1e-300));
    combined[i] = acc * inv;
  }
  const double max_log = *std::max_element(combined.begin(), combined.end());
  double sum = 0.0;
  for (double& x : combined) {
    x = std::exp(x - max_log);
    sum += x;
  }
  for (double& x : combined) x /= sum;
  return combined;
}

}  // namespace

std::vector<int32_t> greedy_decode(const std::vector<int32_t>& src_ids,
                                   const ModelParams& params, size_t max_len) {
  if (src_ids.empty()) fail(ErrorKind::Input, "greedy_decode: empty source");
  const EncoderStates h = encode(src_ids, params);
  DecoderState state = init_decoder(h, params);
  std::vector<int32_t> out;
  for (size_t step = 0; step < max_len; ++step) {
    StepResult result = decoder_step(state, h, params);
    const int32_t token = argmax(result.dist);
    out.push_back(token);
    if (token == Vocabulary::kEos) break;
    state = std::move(result.state);
    state.last_token = token;
  }
  return out;
}

EnsembleStepResult ensemble_step(const std::vector<DecoderState>& states,
                                 const std::vector<EncoderStates>& encoder_states,
                                 const std::vector<const ModelParams*>& models,
                                 bool arithmetic_mean) {
  if (models.empty() || states.size() != models.size() ||
      encoder_states.size() != models.size()) {
    fail(ErrorKind::Input, "ensemble_step: member count mismatch");
  }
  const size_t vocab = models[0]->vocab_size;
  for (const ModelParams* m : models) {
    if (m->vocab_size != vocab) {
      fail(ErrorKind::Compat, "ensemble_step: members disagree on vocabulary size");
    }
  }
  for (const auto& s : states) {
    if (s.last_token != states[0].last_token) {
      fail(ErrorKind::Input, "ensemble_step: members disagree on the previous token");
    }
  }

  EnsembleStepResult out;
  out.states.reserve(models.size());
  std::vector<std::vector<double>> dists;
  dists.reserve(models.size());
  for (size_t m = 0; m < models.size(); ++m) {
    StepResult step = decoder_step(states[m], encoder_states[m], *models[m]);
    out.states.push_back(std::move(step.state));
    dists.push_back(std::move(step.dist));
  }
  out.dist = combine_dists(dists, arithmetic_mean);
  return out;
}

namespace {

// Shared beam engine over 1..k cached source encodings.
DecodeResult beam_engine(const std::vector<const ModelParams*>& models,
                         const std::vector<EncodedSource>& sources,
                         size_t beam_size, size_t max_len, double alpha,
                         bool arithmetic_mean) {
  Hypothesis start;
  start.logprob = 0.0;
  for (const auto& src : sources) start.states.push_back(src.initial);

  std::vector<Hypothesis> live{start};
  std::vector<Hypothesis> done;

  struct Candidate {
    double logprob;
    int32_t token;
    size_t parent;
  };

  for (size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<std::vector<DecoderState>> advanced(live.size());
    std::vector<Candidate> candidates;
    candidates.reserve(live.size() * beam_size);
    for (size_t p = 0; p < live.size(); ++p) {
      std::vector<std::vector<double>> dists;
      dists.reserve(models.size());
      advanced[p].reserve(models.size());
      for (size_t m = 0; m < models.size(); ++m) {
        StepResult result =
            decoder_step_cached(live[p].states[m], sources[m], *models[m]);
        advanced[p].push_back(std::move(result.state));
        dists.push_back(std::move(result.dist));
      }
      const std::vector<double> dist = combine_dists(dists, arithmetic_mean);
      for (int32_t token : top_tokens(dist, beam_size)) {
        candidates.push_back(
            {live[p].logprob + token_logprob(dist, token), token, p});
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.logprob != b.logprob) return a.logprob > b.logprob;
                if (a.token != b.token) return a.token < b.token;
                return a.parent < b.parent;
              });
    if (candidates.size() > beam_size) candidates.resize(beam_size);

    std::vector<Hypothesis> next_live;
    for (const Candidate& cand : candidates) {
      Hypothesis hyp;
      hyp.tokens = live[cand.parent].tokens;
      hyp.tokens.push_back(cand.token);
      hyp.logprob = cand.logprob;
      hyp.states = advanced[cand.parent];
      for (auto& s : hyp.states) s.last_token = cand.token;
      hyp.finished = (cand.token == Vocabulary::kEos);
      if (hyp.finished) {
        done.push_back(std::move(hyp));
      } else {
        next_live.push_back(std::move(hyp));
      }
    }
    live = std::move(next_live);
  }

  const std::vector<Hypothesis>& pool = done.empty() ? live : done;
  size_t best = 0;
  for (size_t i = 1; i < pool.size(); ++i) {
    if (normalized_score(pool[i], alpha) > normalized_score(pool[best], alpha)) {
      best = i;
    }
  }
  DecodeResult out;
  out.tokens = pool[best].tokens;
  out.logprob = pool[best].logprob;
  out.finished = pool[best].finished;
  return out;
}

}  // namespace

DecodeResult beam_search(const std::vector<int32_t>& src_ids,
                         const ModelParams& params, size_t beam_size,
                         size_t max_len, double length_norm_alpha) {
  if (beam_size == 0) fail(ErrorKind::Config, "beam_search: beam size must be >= 1");
  if (src_ids.empty()) fail(ErrorKind::Input, "beam_search: empty source");
  std::vector<EncodedSource> sources;
  sources.push_back(encode_source(src_ids, params));
  return beam_engine({&params}, sources, beam_size, max_len, length_norm_alpha,
                     false);
}

DecodeResult ensemble_beam_search(const std::vector<const ModelParams*>& models,
                                  const std::vector<int32_t>& src_ids,
                                  const DecodeConfig& config) {
  if (models.empty()) fail(ErrorKind::Input, "ensemble_beam_search: no models");
  if (config.beam_size == 0) {
    fail(ErrorKind::Config, "ensemble_beam_search: beam size must be >= 1");
  }
  if (src_ids.empty()) fail(ErrorKind::Input, "ensemble_beam_search: empty source");
  const size_t vocab = models[0]->vocab_size;
  std::vector<EncodedSource> sources;
  sources.reserve(models.size());
  for (const ModelParams* m : models) {
    if (m->vocab_size != vocab) {
      fail(ErrorKind::Compat, "ensemble members disagree on vocabulary size");
    }
    sources.push_back(encode_source(src_ids, *m));
  }
  return beam_engine(models, sources, config.beam_size,
                     config.max_len_for(src_ids.size()), config.length_norm_alpha,
                     config.arithmetic_mean);
}

Translator::Translator(std::vector<Checkpoint> models, Vocabulary vocab,
                       MergeTable codes, DecodeConfig config)
    : models_(std::move(models)),
      vocab_(std::move(vocab)),
      codes_(std::move(codes)),
      config_(config) {
  if (models_.empty()) fail(ErrorKind::Input, "translator: no checkpoints");
  const std::uint64_t want = vocab_.content_hash();
  for (const auto& ckpt : models_) {
    if (ckpt.meta.vocab_hash != want) {
      fail(ErrorKind::Compat,
           "translator: checkpoint was trained with a different vocabulary");
    }
    if (ckpt.params.vocab_size != vocab_.size()) {
      fail(ErrorKind::Compat, "translator: checkpoint vocabulary size mismatch");
    }
  }
}

Translator::LineResult Translator::translate_line(const std::string& line) const {
  LineResult result;
  const std::vector<std::string> subwords = apply_bpe(split_ws(line), codes_);
  std::vector<int32_t> src_ids;
  src_ids.reserve(subwords.size() + 1);
  for (const auto& token : subwords) src_ids.push_back(vocab_.encode(token));
  src_ids.push_back(Vocabulary::kEos);

  std::vector<const ModelParams*> models;
  models.reserve(models_.size());
  for (const auto& ckpt : models_) models.push_back(&ckpt.params);
  const DecodeResult decoded = ensemble_beam_search(models, src_ids, config_);
  result.score = decoded.logprob;

  std::vector<std::string> out_subwords;
  for (int32_t id : decoded.tokens) {
    if (id == Vocabulary::kEos) break;
    out_subwords.push_back(vocab_.decode(id));
  }
  // The model can emit a dangling continuation marker; recover by
  // stripping it so output stays line-aligned, and report the line.
  if (!out_subwords.empty()) {
    std::string& last = out_subwords.back();
    if (last.size() >= 2 && last.compare(last.size() - 2, 2, "@@") == 0) {
      last.resize(last.size() - 2);
      result.warning = "dangling continuation marker repaired";
    }
  }
  result.text = join_ws(decode_bpe(out_subwords));
  return result;
}

void Translator::translate_file(const std::string& in_path,
                                const std::string& out_path,
                                const std::string& scores_path,
                                const LogFn& log) const {
  const auto in_lines = read_lines(in_path);
  std::vector<std::string> out_lines;
  std::vector<std::string> score_lines;
  out_lines.reserve(in_lines.size());
  for (size_t i = 0; i < in_lines.size(); ++i) {
    LineResult result = translate_line(in_lines[i]);
    if (!result.warning.empty() && log) {
      log("line " + std::to_string(i + 1) + ": " + result.warning);
    }
    out_lines.push_back(std::move(result.text));
    score_lines.push_back(format_double(result.score, 6));
  }
  write_lines(out_path, out_lines);
  if (!scores_path.empty()) write_lines(scores_path, score_lines);
}

}  // namespace anmt
