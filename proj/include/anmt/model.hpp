#ifndef ANMT_MODEL_HPP
#define ANMT_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anmt/graph.hpp"
#include "anmt/tensor.hpp"

namespace anmt {

// One GRU cell: update gate z, reset gate r, candidate state, convex
// combination new_h = (1 - z) * h + z * candidate.
struct GruWeights {
  Tensor2 Wz, Uz, bz;  // H x I, H x H, H x 1
  Tensor2 Wr, Ur, br;
  Tensor2 Wc, Uc, bc;

  size_t hidden_dim() const { return Wz.rows; }
  size_t input_dim() const { return Wz.cols; }
};

// All trainable tensors of the attention encoder-decoder. The encoder
// is bidirectional, so its states have dimension 2 * hidden_dim; the
// decoder GRU consumes [target embedding ; context]; the output layer
// reads [state ; context ; previous target embedding].
struct ModelParams {
  size_t embed_dim = 0;
  size_t hidden_dim = 0;
  size_t attn_dim = 0;
  size_t vocab_size = 0;  // joint source/target vocabulary

  Tensor2 src_embed, tgt_embed;  // V x E
  GruWeights enc_fwd, enc_bwd;   // input E
  GruWeights dec;                // input E + 2H
  Tensor2 attn_w;                // A x H
  Tensor2 attn_u;                // A x 2H
  Tensor2 attn_v;                // A x 1
  Tensor2 init_w;                // H x H, decoder init from backward state
  Tensor2 out_w, out_b;          // V x (3H + E), V x 1

  // Uniform [-0.08, 0.08] from a seeded generator; bit-reproducible
  // across platforms.
  static ModelParams init(size_t vocab, size_t embed, size_t hidden, size_t attn,
                          std::uint64_t seed);
  static ModelParams zeros(size_t vocab, size_t embed, size_t hidden, size_t attn);

  // Fixed enumeration order; also the checkpoint blob order.
  std::vector<std::pair<std::string, Tensor2*>> named_tensors();
  std::vector<std::pair<std::string, const Tensor2*>> named_tensors() const;

  void validate() const;  // mutual shape consistency
};

// Shape-congruent per-parameter gradient accumulator.
using Gradients = ModelParams;
Gradients zeros_like(const ModelParams& params);

// Bidirectional encoder output: column j is [forward_j ; backward_j].
struct EncoderStates {
  Tensor2 h;               // 2H x J
  Tensor2 backward_first;  // H x 1, backward state at source position 1

  size_t length() const { return h.cols; }
};

struct DecoderState {
  Tensor2 s;                // H x 1
  int32_t last_token = -1;  // y_{i-1}
};

struct AttentionResult {
  std::vector<double> alpha;  // weights over the J source positions
  Tensor2 context;            // 2H x 1
};

struct StepResult {
  DecoderState state;        // advanced hidden state; last_token is the
                             // caller's to fill once y_i is chosen
  std::vector<double> dist;  // probability over the vocabulary, sums to 1
};

// Value-level forward operations (inference path; no gradients).
Tensor2 gru_step(const Tensor2& prev_state, const Tensor2& input, const GruWeights& w);
EncoderStates encode(const std::vector<int32_t>& src_ids, const ModelParams& params);
AttentionResult attend(const DecoderState& state, const EncoderStates& h,
                       const ModelParams& params);
DecoderState init_decoder(const EncoderStates& h, const ModelParams& params);
StepResult decoder_step(const DecoderState& state, const EncoderStates& h,
                        const ModelParams& params);

// Teacher-forced log p(tgt | src), the sum of stepwise log-probabilities.
// tgt must end with EOS; runs the same arithmetic as decoder_step.
double sequence_logprob(const std::vector<int32_t>& src_ids,
                        const std::vector<int32_t>& tgt_ids,
                        const ModelParams& params);

// Per-sentence decoding cache: encoder states plus the attention keys
// U_a * h, which do not depend on the decoder step. decoder_step_cached
// computes exactly the same values as decoder_step.
struct EncodedSource {
  EncoderStates states;
  Tensor2 ua_h;  // A x J
  DecoderState initial;
};
EncodedSource encode_source(const std::vector<int32_t>& src_ids,
                            const ModelParams& params);
StepResult decoder_step_cached(const DecoderState& state, const EncodedSource& src,
                               const ModelParams& params);

// Tape builder for the teacher-forced loss: sum over target steps of
// -log p(y_i | ...). grads may be null for a forward-only evaluation.
struct PairLoss {
  Graph::Var loss;  // scalar node, total (unnormalized) NLL
  size_t tokens;    // number of target steps
};
PairLoss build_pair_loss(Graph& g, const std::vector<int32_t>& src_ids,
                         const std::vector<int32_t>& tgt_ids,
                         const ModelParams& params, Gradients* grads);

}  // namespace anmt

#endif
