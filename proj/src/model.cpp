#include "anmt/model.hpp"

#include <cmath>

#include "anmt/error.hpp"
#include "anmt/subword.hpp"
#include "anmt/util.hpp"

namespace anmt {

namespace {

class UniformInit {
 public:
  explicit UniformInit(std::uint64_t seed) : state_(seed) {}

  // splitmix64 stream mapped to [-0.08, 0.08]; avoids the
  // implementation-defined std distributions.
  double next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
    return (unit * 2.0 - 1.0) * 0.08;
  }

  void fill(Tensor2& t) {
    for (double& x : t.v) x = next();
  }

 private:
  std::uint64_t state_;
};

void shape2(Tensor2& t, size_t rows, size_t cols) { t = Tensor2(rows, cols); }

void shape_gru(GruWeights& w, size_t hidden, size_t input) {
  shape2(w.Wz, hidden, input);
  shape2(w.Uz, hidden, hidden);
  shape2(w.bz, hidden, 1);
  shape2(w.Wr, hidden, input);
  shape2(w.Ur, hidden, hidden);
  shape2(w.br, hidden, 1);
  shape2(w.Wc, hidden, input);
  shape2(w.Uc, hidden, hidden);
  shape2(w.bc, hidden, 1);
}

// Graph-level parameter bindings shared by training and inference.
struct GruVars {
  Graph::Var Wz, Uz, bz, Wr, Ur, br, Wc, Uc, bc;
};

struct BoundParams {
  const ModelParams* p = nullptr;
  Gradients* g = nullptr;
  GruVars enc_fwd, enc_bwd, dec;
  Graph::Var attn_w, attn_u, attn_v, init_w, out_w, out_b;
};

GruVars bind_gru(Graph& g, const GruWeights& w, GruWeights* grad) {
  GruVars v;
  v.Wz = g.param(&w.Wz, grad ? &grad->Wz : nullptr);
  v.Uz = g.param(&w.Uz, grad ? &grad->Uz : nullptr);
  v.bz = g.param(&w.bz, grad ? &grad->bz : nullptr);
  v.Wr = g.param(&w.Wr, grad ? &grad->Wr : nullptr);
  v.Ur = g.param(&w.Ur, grad ? &grad->Ur : nullptr);
  v.br = g.param(&w.br, grad ? &grad->br : nullptr);
  v.Wc = g.param(&w.Wc, grad ? &grad->Wc : nullptr);
  v.Uc = g.param(&w.Uc, grad ? &grad->Uc : nullptr);
  v.bc = g.param(&w.bc, grad ? &grad->bc : nullptr);
  return v;
}

BoundParams bind(Graph& g, const ModelParams& p, Gradients* grads) {
  BoundParams b;
  b.p = &p;
  b.g = grads;
  b.enc_fwd = bind_gru(g, p.enc_fwd, grads ? &grads->enc_fwd : nullptr);
  b.enc_bwd = bind_gru(g, p.enc_bwd, grads ? &grads->enc_bwd : nullptr);
  b.dec = bind_gru(g, p.dec, grads ? &grads->dec : nullptr);
  b.attn_w = g.param(&p.attn_w, grads ? &grads->attn_w : nullptr);
  b.attn_u = g.param(&p.attn_u, grads ? &grads->attn_u : nullptr);
  b.attn_v = g.param(&p.attn_v, grads ? &grads->attn_v : nullptr);
  b.init_w = g.param(&p.init_w, grads ? &grads->init_w : nullptr);
  b.out_w = g.param(&p.out_w, grads ? &grads->out_w : nullptr);
  b.out_b = g.param(&p.out_b, grads ? &grads->out_b : nullptr);
  return b;
}

Graph::Var src_embedding(Graph& g, const BoundParams& b, int32_t id) {
  if (id < 0 || static_cast<size_t>(id) >= b.p->vocab_size) {
    fail(ErrorKind::Index, "source token id out of range: " + std::to_string(id));
  }
  return g.param_row(&b.p->src_embed, b.g ? &b.g->src_embed : nullptr,
                     static_cast<size_t>(id));
}

Graph::Var tgt_embedding(Graph& g, const BoundParams& b, int32_t id) {
  if (id < 0 || static_cast<size_t>(id) >= b.p->vocab_size) {
    fail(ErrorKind::Index, "target token id out of range: " + std::to_string(id));
  }
  return g.param_row(&b.p->tgt_embed, b.g ? &b.g->tgt_embed : nullptr,
                     static_cast<size_t>(id));
}

Graph::Var gru_step_t(Graph& g, const GruVars& w, Graph::Var h_prev, Graph::Var x) {
  const Graph::Var z =
      g.sigmoid(g.add(g.add(g.matmul(w.Wz, x), g.matmul(w.Uz, h_prev)), w.bz));
  const Graph::Var r =
      g.sigmoid(g.add(g.add(g.matmul(w.Wr, x), g.matmul(w.Ur, h_prev)), w.br));
  const Graph::Var cand = g.tanh_op(
      g.add(g.add(g.matmul(w.Wc, x), g.matmul(w.Uc, g.hadamard(r, h_prev))), w.bc));
  return g.add(g.hadamard(g.one_minus(z), h_prev), g.hadamard(z, cand));
}

struct EncodeVars {
  Graph::Var h_mat;     // 2H x J
  Graph::Var ua_h;      // A x J, attention keys, fixed per sentence
  Graph::Var bwd_first; // H x 1
};

EncodeVars encode_t(Graph& g, const BoundParams& b, const std::vector<int32_t>& ids) {
  if (ids.empty()) fail(ErrorKind::Input, "encode: empty source");
  const size_t J = ids.size();
  const size_t H = b.p->hidden_dim;

  std::vector<Graph::Var> embeds(J);
  for (size_t j = 0; j < J; ++j) embeds[j] = src_embedding(g, b, ids[j]);

  std::vector<Graph::Var> fwd(J), bwd(J);
  Graph::Var state = g.constant(Tensor2(H, 1));
  for (size_t j = 0; j < J; ++j) {
    state = gru_step_t(g, b.enc_fwd, state, embeds[j]);
    fwd[j] = state;
  }
  state = g.constant(Tensor2(H, 1));
  for (size_t j = J; j-- > 0;) {
    state = gru_step_t(g, b.enc_bwd, state, embeds[j]);
    bwd[j] = state;
  }

  std::vector<Graph::Var> columns(J);
  for (size_t j = 0; j < J; ++j) {
    columns[j] = g.concat_rows({fwd[j], bwd[j]});
  }
  EncodeVars out;
  out.h_mat = g.concat_cols(columns);
  out.ua_h = g.matmul(b.attn_u, out.h_mat);
  out.bwd_first = bwd[0];
  return out;
}

Graph::Var init_decoder_t(Graph& g, const BoundParams& b, Graph::Var bwd_first) {
  return g.tanh_op(g.matmul(b.init_w, bwd_first));
}

struct StepVars {
  Graph::Var s_new;
  Graph::Var alpha;
  Graph::Var context;
  Graph::Var logits;
};

StepVars decoder_step_t(Graph& g, const BoundParams& b, Graph::Var s_prev,
                        int32_t y_prev, Graph::Var h_mat, Graph::Var ua_h) {
  StepVars out;
  const Graph::Var scores = g.mat_t_vec(
      g.tanh_op(g.add_col(ua_h, g.matmul(b.attn_w, s_prev))), b.attn_v);
  out.alpha = g.softmax_vec(scores);
  out.context = g.matmul(h_mat, out.alpha);

  const Graph::Var emb = tgt_embedding(g, b, y_prev);
  const Graph::Var x = g.concat_rows({emb, out.context});
  out.s_new = gru_step_t(g, b.dec, s_prev, x);

  const Graph::Var readout = g.concat_rows({out.s_new, out.context, emb});
  out.logits = g.add(g.matmul(b.out_w, readout), b.out_b);
  return out;
}

}  // namespace

ModelParams ModelParams::zeros(size_t vocab, size_t embed, size_t hidden,
                               size_t attn) {
  if (vocab < 4 || embed == 0 || hidden == 0 || attn == 0) {
    fail(ErrorKind::Config, "model dimensions must be positive (vocab >= 4)");
  }
  ModelParams p;
  p.embed_dim = embed;
  p.hidden_dim = hidden;
  p.attn_dim = attn;
  p.vocab_size = vocab;
  shape2(p.src_embed, vocab, embed);
  shape2(p.tgt_embed, vocab, embed);
  shape_gru(p.enc_fwd, hidden, embed);
  shape_gru(p.enc_bwd, hidden, embed);
  shape_gru(p.dec, hidden, embed + 2 * hidden);
  shape2(p.attn_w, attn, hidden);
  shape2(p.attn_u, attn, 2 * hidden);
  shape2(p.attn_v, attn, 1);
  shape2(p.init_w, hidden, hidden);
  shape2(p.out_w, vocab, 3 * hidden + embed);
  shape2(p.out_b, vocab, 1);
  return p;
}

ModelParams ModelParams::init(size_t vocab, size_t embed, size_t hidden, size_t attn,
                              std::uint64_t seed) {
  ModelParams p = zeros(vocab, embed, hidden, attn);
  UniformInit rng(seed);
  for (auto& [name, tensor] : p.named_tensors()) {
    rng.fill(*tensor);
  }
  return p;
}

std::vector<std::pair<std::string, Tensor2*>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor2*>> out;
  const auto gru = [&](const std::string& prefix, GruWeights& w) {
    out.emplace_back(prefix + ".Wz", &w.Wz);
    out.emplace_back(prefix + ".Uz", &w.Uz);
    out.emplace_back(prefix + ".bz", &w.bz);
    out.emplace_back(prefix + ".Wr", &w.Wr);
    out.emplace_back(prefix + ".Ur", &w.Ur);
    out.emplace_back(prefix + ".br", &w.br);
    out.emplace_back(prefix + ".Wc", &w.Wc);
    out.emplace_back(prefix + ".Uc", &w.Uc);
    out.emplace_back(prefix + ".bc", &w.bc);
  };
  out.emplace_back("src_embed", &src_embed);
  out.emplace_back("tgt_embed", &tgt_embed);
  gru("enc_fwd", enc_fwd);
  gru("enc_bwd", enc_bwd);
  gru("dec", dec);
  out.emplace_back("attn_w", &attn_w);
  out.emplace_back("attn_u", &attn_u);
  out.emplace_back("attn_v", &attn_v);
  out.emplace_back("init_w", &init_w);
  out.emplace_back("out_w", &out_w);
  out.emplace_back("out_b", &out_b);
  return out;
}

std::vector<std::pair<std::string, const Tensor2*>> ModelParams::named_tensors() const {
  auto mutable_view = const_cast<ModelParams*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Tensor2*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, tensor] : mutable_view) out.emplace_back(name, tensor);
  return out;
}

void ModelParams::validate() const {
  const ModelParams ref = zeros(vocab_size, embed_dim, hidden_dim, attn_dim);
  const auto mine = named_tensors();
  const auto want = ref.named_tensors();
  for (size_t i = 0; i < mine.size(); ++i) {
    if (!mine[i].second->same_shape(*want[i].second)) {
      fail(ErrorKind::Shape, "parameter " + mine[i].first + " has shape " +
                                 mine[i].second->shape_str() + ", expected " +
                                 want[i].second->shape_str());
    }
    if (!mine[i].second->all_finite()) {
      fail(ErrorKind::Numeric, "parameter " + mine[i].first + " has non-finite entries");
    }
  }
}

Gradients zeros_like(const ModelParams& params) {
  return ModelParams::zeros(params.vocab_size, params.embed_dim, params.hidden_dim,
                            params.attn_dim);
}

Tensor2 gru_step(const Tensor2& prev_state, const Tensor2& input, const GruWeights& w) {
  Graph g;
  const GruVars v = bind_gru(g, w, nullptr);
  const Graph::Var h = g.constant(prev_state);
  const Graph::Var x = g.constant(input);
  return g.value(gru_step_t(g, v, h, x));
}

EncoderStates encode(const std::vector<int32_t>& src_ids, const ModelParams& params) {
  Graph g;
  const BoundParams b = bind(g, params, nullptr);
  const EncodeVars enc = encode_t(g, b, src_ids);
  EncoderStates out;
  out.h = g.value(enc.h_mat);
  out.backward_first = g.value(enc.bwd_first);
  return out;
}

AttentionResult attend(const DecoderState& state, const EncoderStates& h,
                       const ModelParams& params) {
  if (h.length() == 0) fail(ErrorKind::Input, "attend: empty encoder states");
  Graph g;
  const BoundParams b = bind(g, params, nullptr);
  const Graph::Var h_mat = g.constant(h.h);
  const Graph::Var ua_h = g.matmul(b.attn_u, h_mat);
  const Graph::Var s_prev = g.constant(state.s);
  const Graph::Var scores = g.mat_t_vec(
      g.tanh_op(g.add_col(ua_h, g.matmul(b.attn_w, s_prev))), b.attn_v);
  const Graph::Var alpha = g.softmax_vec(scores);
  const Graph::Var context = g.matmul(h_mat, alpha);
  AttentionResult out;
  out.alpha = g.value(alpha).v;
  out.context = g.value(context);
  return out;
}

DecoderState init_decoder(const EncoderStates& h, const ModelParams& params) {
  if (h.length() == 0) fail(ErrorKind::Input, "init_decoder: empty encoder states");
  Graph g;
  const BoundParams b = bind(g, params, nullptr);
  DecoderState state;
  state.s = g.value(init_decoder_t(g, b, g.constant(h.backward_first)));
  state.last_token = Vocabulary::kBos;
  return state;
}

StepResult decoder_step(const DecoderState& state, const EncoderStates& h,
                        const ModelParams& params) {
  if (h.length() == 0) fail(ErrorKind::Input, "decoder_step: empty encoder states");
  Graph g;
  const BoundParams b = bind(g, params, nullptr);
  const Graph::Var h_mat = g.constant(h.h);
  const Graph::Var ua_h = g.matmul(b.attn_u, h_mat);
  const Graph::Var s_prev = g.constant(state.s);
  const StepVars step =
      decoder_step_t(g, b, s_prev, state.last_token, h_mat, ua_h);
  const Graph::Var dist = g.softmax_vec(step.logits);
  StepResult out;
  out.state.s = g.value(step.s_new);
  out.state.last_token = -1;
  out.dist = g.value(dist).v;
  return out;
}

EncodedSource encode_source(const std::vector<int32_t>& src_ids,
                            const ModelParams& params) {
  EncodedSource out;
  out.states = encode(src_ids, params);
  out.ua_h = matmul(params.attn_u, out.states.h);
  out.initial = init_decoder(out.states, params);
  return out;
}

StepResult decoder_step_cached(const DecoderState& state, const EncodedSource& src,
                               const ModelParams& params) {
  Graph g;
  const BoundParams b = bind(g, params, nullptr);
  const Graph::Var h_mat = g.constant(src.states.h);
  const Graph::Var ua_h = g.constant(src.ua_h);
  const Graph::Var s_prev = g.constant(state.s);
  const StepVars step = decoder_step_t(g, b, s_prev, state.last_token, h_mat, ua_h);
  const Graph::Var dist = g.softmax_vec(step.logits);
  StepResult out;
  out.state.s = g.value(step.s_new);
  out.state.last_token = -1;
  out.dist = g.value(dist).v;
  return out;
}

double sequence_logprob(const std::vector<int32_t>& src_ids,
                        const std::vector<int32_t>& tgt_ids,
                        const ModelParams& params) {
  if (src_ids.empty() || tgt_ids.empty()) {
    fail(ErrorKind::Input, "sequence_logprob: empty sequence");
  }
  const EncoderStates h = encode(src_ids, params);
  DecoderState state = init_decoder(h, params);
  double logprob = 0.0;
  for (int32_t y : tgt_ids) {
    if (y < 0 || static_cast<size_t>(y) >= params.vocab_size) {
      fail(ErrorKind::Index, "target token id out of range: " + std::to_string(y));
    }
    StepResult step = decoder_step(state, h, params);
    logprob += std::log(std::max(step.dist[static_cast<size_t>(y)], 1e-300));
    state = std::move(step.state);
    state.last_token = y;
  }
  return logprob;
}

PairLoss build_pair_loss(Graph& g, const std::vector<int32_t>& src_ids,
                         const std::vector<int32_t>& tgt_ids,
                         const ModelParams& params, Gradients* grads) {
  if (src_ids.empty() || tgt_ids.empty()) {
    fail(ErrorKind::Input, "pair loss: empty sequence");
  }
  const BoundParams b = bind(g, params, grads);
  const EncodeVars enc = encode_t(g, b, src_ids);
  Graph::Var s = init_decoder_t(g, b, enc.bwd_first);
  int32_t prev = Vocabulary::kBos;
  std::vector<Graph::Var> terms;
  terms.reserve(tgt_ids.size());
  for (int32_t y : tgt_ids) {
    if (y < 0 || static_cast<size_t>(y) >= params.vocab_size) {
      fail(ErrorKind::Index, "target token id out of range: " + std::to_string(y));
    }
    const StepVars step = decoder_step_t(g, b, s, prev, enc.h_mat, enc.ua_h);
    terms.push_back(g.ce_logits(step.logits, static_cast<size_t>(y)));
    s = step.s_new;
    prev = y;
  }
  PairLoss out;
  out.loss = g.add_scalars(terms);
  out.tokens = tgt_ids.size();
  return out;
}

}  // namespace anmt
