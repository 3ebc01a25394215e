#ifndef ANMT_DECODING_HPP
#define ANMT_DECODING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "anmt/model.hpp"
#include "anmt/subword.hpp"
#include "anmt/training.hpp"

namespace anmt {

// Partial translation in beam search. logprob is non-increasing as
// tokens are appended; finished iff the last token is EOS.
struct Hypothesis {
  std::vector<int32_t> tokens;
  double logprob = 0.0;
  std::vector<DecoderState> states;  // one per ensemble member
  bool finished = false;
};

struct DecodeConfig {
  size_t beam_size = 5;
  double length_norm_alpha = 0.6;
  size_t max_len_factor = 3;  // max_len = factor * source_len + extra
  size_t max_len_extra = 5;
  bool arithmetic_mean = false;  // ensemble combination; default log-average

  size_t max_len_for(size_t source_len) const {
    return max_len_factor * source_len + max_len_extra;
  }
};

// Argmax decoding until EOS or max_len tokens; ties pick the lowest id.
std::vector<int32_t> greedy_decode(const std::vector<int32_t>& src_ids,
                                   const ModelParams& params, size_t max_len);

// Advances every member one step on the shared previous token and
// combines the distributions: renormalized geometric mean (uniform
// log-average) by default, arithmetic mean behind the flag.
struct EnsembleStepResult {
  std::vector<DecoderState> states;
  std::vector<double> dist;
};
EnsembleStepResult ensemble_step(const std::vector<DecoderState>& states,
                                 const std::vector<EncoderStates>& encoder_states,
                                 const std::vector<const ModelParams*>& models,
                                 bool arithmetic_mean = false);

struct DecodeResult {
  std::vector<int32_t> tokens;  // includes the terminal EOS when finished
  double logprob = 0.0;         // accumulated, unnormalized
  bool finished = false;
};

// Standard beam expansion over accumulated logprob; finished hypotheses
// are set aside and the final ranking divides by length^alpha.
DecodeResult beam_search(const std::vector<int32_t>& src_ids,
                         const ModelParams& params, size_t beam_size,
                         size_t max_len, double length_norm_alpha);

// Beam search over an ensemble of models sharing one vocabulary.
DecodeResult ensemble_beam_search(const std::vector<const ModelParams*>& models,
                                  const std::vector<int32_t>& src_ids,
                                  const DecodeConfig& config);

// File-level translation: holds the checkpoints, vocabulary and merge
// table together, hash-checked at construction.
class Translator {
 public:
  Translator(std::vector<Checkpoint> models, Vocabulary vocab, MergeTable codes,
             DecodeConfig config);

  // line is raw (preprocessed) text; BPE and id encoding happen here.
  struct LineResult {
    std::string text;
    double score = 0.0;
    std::string warning;  // per-line decode issue, empty if clean
  };
  LineResult translate_line(const std::string& line) const;

  // Line-aligned output; optional one-score-per-line file; warnings go
  // to the log callback with 1-based line numbers.
  void translate_file(const std::string& in_path, const std::string& out_path,
                      const std::string& scores_path = "",
                      const LogFn& log = nullptr) const;

  size_t ensemble_size() const { return models_.size(); }

 private:
  std::vector<Checkpoint> models_;
  Vocabulary vocab_;
  MergeTable codes_;
  DecodeConfig config_;
};

}  // namespace anmt

#endif
