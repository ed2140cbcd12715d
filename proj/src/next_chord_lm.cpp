#include "chordvec/next_chord_lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "chordvec/chord.h"

namespace chordvec {

namespace {

using Json = nlohmann::json;

Tensor sigmoid(const Tensor& x) {
  return x.unaryExpr([](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

void fill_uniform(Tensor& t, Rng& rng, double range) {
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = rng.uniform(-range, range);
  }
}

Tensor dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Tensor m(rows, cols);
  const double keep = 1.0 - p;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  }
  return m;
}

// Column-wise log-softmax.
Tensor log_softmax(const Tensor& logits) {
  Tensor out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const double mx = logits.col(b).maxCoeff();
    const double lse = mx + std::log((logits.col(b).array() - mx).exp().sum());
    out.col(b) = logits.col(b).array() - lse;
  }
  return out;
}

struct LayerStep {
  Tensor x, h_prev, c_prev, i, f, g, o, c, tc, mask;
};

struct Step {
  std::vector<LayerStep> layers;
  Tensor top, top_mask, logp;
};

const Tensor& decoder_weights(const LMModel& m) { return m.config.tie_weights ? m.encoder : m.dec_w; }

// One time step through every layer; fills `step` when requested.
Tensor step_forward(const LMModel& model, const std::vector<std::size_t>& tokens, LMState& state, Rng* rng,
                    Step* step) {
  const auto batch = static_cast<Eigen::Index>(tokens.size());
  const Eigen::Index e = model.encoder.cols();
  const double p = model.config.dropout;
  const bool drop = rng != nullptr && p > 0;
  Tensor x(e, batch);
  for (Eigen::Index b = 0; b < batch; ++b) x.col(b) = model.encoder.row(static_cast<Eigen::Index>(tokens[static_cast<std::size_t>(b)])).transpose();
  if (step) step->layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmLayer& layer = model.layers[l];
    const Eigen::Index h = layer.u.cols();
    Tensor mask;
    if (drop) {
      mask = dropout_mask(x.rows(), batch, p, *rng);
      x = x.cwiseProduct(mask);
    }
    const Tensor a = layer.w * x + layer.u * state.h[l] + layer.b.replicate(1, batch);
    Tensor gi = sigmoid(a.topRows(h));
    Tensor gf = sigmoid(a.middleRows(h, h));
    Tensor gg = a.middleRows(2 * h, h).array().tanh().matrix();
    Tensor go = sigmoid(a.bottomRows(h));
    Tensor c = gf.cwiseProduct(state.c[l]) + gi.cwiseProduct(gg);
    Tensor tc = c.array().tanh().matrix();
    Tensor hn = go.cwiseProduct(tc);
    if (step) {
      LayerStep& s = step->layers[l];
      s.x = x;
      s.h_prev = state.h[l];
      s.c_prev = state.c[l];
      s.i = std::move(gi);
      s.f = std::move(gf);
      s.g = std::move(gg);
      s.o = std::move(go);
      s.c = c;
      s.tc = std::move(tc);
      s.mask = std::move(mask);
    }
    state.h[l] = hn;
    state.c[l] = std::move(c);
    x = std::move(hn);
  }
  if (drop) {
    Tensor mask = dropout_mask(x.rows(), batch, p, *rng);
    x = x.cwiseProduct(mask);
    if (step) step->top_mask = std::move(mask);
  }
  if (step) step->top = x;
  return decoder_weights(model) * x + model.dec_b.replicate(1, batch);
}

std::size_t grad_index_dec_w(const LMModel& m) { return 1 + 3 * m.layers.size(); }

Json tensor_json(const Tensor& t) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
  }
  return Json{{"rows", t.rows()}, {"cols", t.cols()}, {"data", data}};
}

Tensor tensor_from_json(const Json& j, const std::string& name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw FormatError(0, "tensor " + name + " has inconsistent shape");
  }
  Tensor t(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) t(r, c) = data[k++].get<double>();
  }
  return t;
}

}  // namespace

std::string_view encoder_init_name(EncoderInit init) {
  switch (init) {
    case EncoderInit::NI: return "NI";
    case EncoderInit::PR: return "PR";
    case EncoderInit::CE_cbow: return "CE_cbow";
    case EncoderInit::CE_sglm: return "CE_sglm";
  }
  return "?";
}

EncoderInit parse_encoder_init(std::string_view name) {
  for (auto i : {EncoderInit::NI, EncoderInit::PR, EncoderInit::CE_cbow, EncoderInit::CE_sglm}) {
    if (encoder_init_name(i) == name) return i;
  }
  throw ConfigError("unknown encoder init: " + std::string(name));
}

std::vector<std::pair<std::string, Tensor*>> LMModel::parameters() {
  std::vector<std::pair<std::string, Tensor*>> out{{"encoder", &encoder}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    out.emplace_back(p + "w", &layers[l].w);
    out.emplace_back(p + "u", &layers[l].u);
    out.emplace_back(p + "b", &layers[l].b);
  }
  if (!config.tie_weights) out.emplace_back("decoder.w", &dec_w);
  out.emplace_back("decoder.b", &dec_b);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> LMModel::parameters() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto& [name, t] : const_cast<LMModel*>(this)->parameters()) out.emplace_back(name, t);
  return out;
}

LMState zero_state(const LMModel& model, int batch) {
  LMState s;
  for (const auto& layer : model.layers) {
    s.h.push_back(Tensor::Zero(layer.u.cols(), batch));
    s.c.push_back(Tensor::Zero(layer.u.cols(), batch));
  }
  return s;
}

double LMGrads::norm() const {
  double sq = 0;
  for (const auto& t : g) sq += t.squaredNorm();
  return std::sqrt(sq);
}

void LMGrads::scale(double s) {
  for (auto& t : g) t *= s;
}

LMGrads zero_grads(const LMModel& model) {
  LMGrads grads;
  for (const auto& [name, t] : model.parameters()) grads.g.push_back(Tensor::Zero(t->rows(), t->cols()));
  return grads;
}

Vocabulary lm_vocabulary(const Vocabulary& chords) {
  std::vector<std::string> tokens = chords.tokens();
  if (!chords.find(std::string(kEosToken))) tokens.emplace_back(kEosToken);
  return Vocabulary::from_tokens(tokens);
}

Tensor init_encoder(const LMConfig& config, const Vocabulary& lm_vocab, const EmbeddingMatrix* embeddings, Rng& rng) {
  const auto v = static_cast<Eigen::Index>(lm_vocab.size());
  const Eigen::Index e = config.emb_dim;
  Tensor enc(v, e);
  switch (config.init) {
    case EncoderInit::NI:
      fill_uniform(enc, rng, config.init_range);
      break;
    case EncoderInit::PR: {
      if (e < 5) throw ConfigError("pitch representation needs emb_dim >= 5");
      fill_uniform(enc, rng, 0.01);
      for (Eigen::Index r = 0; r < v; ++r) {
        const std::string& tok = lm_vocab.token(static_cast<std::size_t>(r));
        if (tok == kEosToken) continue;
        PitchRepr pr;
        try {
          pr = encode_pr(parse_chord(tok));
        } catch (const ParseError&) {
          continue;
        }
        for (int k = 0; k < 5; ++k) enc(r, k) = pr[static_cast<std::size_t>(k)] / 12.0;
      }
      break;
    }
    case EncoderInit::CE_cbow:
    case EncoderInit::CE_sglm: {
      if (!embeddings) throw ConfigError("embedding initialization needs an embedding matrix");
      if (embeddings->dim() != e) throw ConfigError("embedding dimension differs from emb_dim");
      fill_uniform(enc, rng, config.init_range);
      for (Eigen::Index r = 0; r < v; ++r) {
        const std::string& tok = lm_vocab.token(static_cast<std::size_t>(r));
        if (tok == kUnkToken) continue;
        if (const auto j = embeddings->vocab.find(tok)) enc.row(r) = embeddings->input.row(static_cast<Eigen::Index>(*j));
      }
      break;
    }
  }
  return enc;
}

LMModel make_lm(const Vocabulary& chords, const LMConfig& config, const EmbeddingMatrix* embeddings) {
  if (config.emb_dim <= 0 || config.hidden() <= 0 || config.layers <= 0) throw ConfigError("model sizes must be positive");
  if (config.dropout < 0 || config.dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
  if (config.tie_weights && config.hidden() != config.emb_dim) throw ConfigError("tied weights need hidden_dim == emb_dim");
  LMModel m;
  m.config = config;
  m.vocab = lm_vocabulary(chords);
  Rng rng(config.seed);
  m.encoder = init_encoder(config, m.vocab, embeddings, rng);
  const int h = config.hidden();
  const double k = 1.0 / std::sqrt(static_cast<double>(h));
  for (int l = 0; l < config.layers; ++l) {
    LstmLayer layer;
    layer.w.resize(4 * h, l == 0 ? config.emb_dim : h);
    layer.u.resize(4 * h, h);
    layer.b.resize(4 * h, 1);
    fill_uniform(layer.w, rng, k);
    fill_uniform(layer.u, rng, k);
    fill_uniform(layer.b, rng, k);
    m.layers.push_back(std::move(layer));
  }
  const auto v = static_cast<Eigen::Index>(m.vocab.size());
  if (!config.tie_weights) {
    m.dec_w.resize(v, h);
    fill_uniform(m.dec_w, rng, config.init_range);
  }
  m.dec_b = Tensor::Zero(v, 1);
  m.final_lr = config.lr;
  return m;
}

std::vector<Tensor> lm_forward(const LMModel& model, const std::vector<std::vector<std::size_t>>& tokens,
                               LMState& state, Rng* rng) {
  std::vector<Tensor> out;
  out.reserve(tokens.size());
  for (const auto& row : tokens) out.push_back(step_forward(model, row, state, rng, nullptr));
  return out;
}

double lm_loss_and_grad(const LMModel& model, const std::vector<std::vector<std::size_t>>& inputs,
                        const std::vector<std::vector<std::size_t>>& targets, LMState& state, LMGrads* grads,
                        Rng* dropout_rng) {
  if (inputs.empty() || inputs.size() != targets.size()) throw ConfigError("inputs and targets must align");
  const std::size_t steps = inputs.size();
  const auto batch = static_cast<Eigen::Index>(inputs[0].size());
  const double n = static_cast<double>(steps) * static_cast<double>(batch);

  std::vector<Step> cache(grads ? steps : 0);
  double loss = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    Step local;
    Step* step = grads ? &cache[t] : &local;
    const Tensor logits = step_forward(model, inputs[t], state, dropout_rng, grads ? step : nullptr);
    Tensor logp = log_softmax(logits);
    for (Eigen::Index b = 0; b < batch; ++b) loss -= logp(static_cast<Eigen::Index>(targets[t][static_cast<std::size_t>(b)]), b);
    if (grads) step->logp = std::move(logp);
  }
  loss /= n;
  if (!grads) return loss;

  const std::size_t L = model.layers.size();
  const std::size_t dec_w_index = grad_index_dec_w(model);
  Tensor& g_dec_w = model.config.tie_weights ? grads->g[0] : grads->g[dec_w_index];
  Tensor& g_dec_b = grads->g.back();
  const Tensor& dec = decoder_weights(model);

  std::vector<Tensor> dh_next(L), dc_next(L);
  for (std::size_t l = 0; l < L; ++l) {
    dh_next[l] = Tensor::Zero(model.layers[l].u.cols(), batch);
    dc_next[l] = Tensor::Zero(model.layers[l].u.cols(), batch);
  }
  for (std::size_t t = steps; t-- > 0;) {
    Step& s = cache[t];
    Tensor dlogits = s.logp.array().exp().matrix();
    for (Eigen::Index b = 0; b < batch; ++b) dlogits(static_cast<Eigen::Index>(targets[t][static_cast<std::size_t>(b)]), b) -= 1.0;
    dlogits /= n;
    g_dec_w.noalias() += dlogits * s.top.transpose();
    g_dec_b += dlogits.rowwise().sum();
    Tensor dx = dec.transpose() * dlogits;
    if (s.top_mask.size()) dx = dx.cwiseProduct(s.top_mask);

    for (std::size_t l = L; l-- > 0;) {
      const LstmLayer& layer = model.layers[l];
      const LayerStep& ls = s.layers[l];
      const Eigen::Index h = layer.u.cols();
      const Tensor dh = dx + dh_next[l];
      const Tensor dc = dc_next[l] + dh.cwiseProduct(ls.o).cwiseProduct((1.0 - ls.tc.array().square()).matrix());
      Tensor da(4 * h, batch);
      da.topRows(h) = dc.cwiseProduct(ls.g).cwiseProduct(ls.i.cwiseProduct((1.0 - ls.i.array()).matrix()));
      da.middleRows(h, h) = dc.cwiseProduct(ls.c_prev).cwiseProduct(ls.f.cwiseProduct((1.0 - ls.f.array()).matrix()));
      da.middleRows(2 * h, h) = dc.cwiseProduct(ls.i).cwiseProduct((1.0 - ls.g.array().square()).matrix());
      da.bottomRows(h) = dh.cwiseProduct(ls.tc).cwiseProduct(ls.o.cwiseProduct((1.0 - ls.o.array()).matrix()));
      dc_next[l] = dc.cwiseProduct(ls.f);
      const std::size_t gi = 1 + 3 * l;
      grads->g[gi].noalias() += da * ls.x.transpose();
      grads->g[gi + 1].noalias() += da * ls.h_prev.transpose();
      grads->g[gi + 2] += da.rowwise().sum();
      dh_next[l] = layer.u.transpose() * da;
      dx = layer.w.transpose() * da;
      if (ls.mask.size()) dx = dx.cwiseProduct(ls.mask);
    }
    for (Eigen::Index b = 0; b < batch; ++b) {
      grads->g[0].row(static_cast<Eigen::Index>(inputs[t][static_cast<std::size_t>(b)])) += dx.col(b).transpose();
    }
  }
  return loss;
}

double clip_gradients(LMGrads& grads, double max_norm) {
  const double norm = grads.norm();
  if (norm > max_norm && norm > 0) grads.scale(max_norm / norm);
  return norm;
}

std::vector<std::size_t> lm_stream(const Corpus& corpus, const Vocabulary& lm_vocab) {
  const auto eos = lm_vocab.find(std::string(kEosToken));
  if (!eos) throw ConfigError("vocabulary lacks the boundary token");
  std::vector<std::size_t> stream;
  for (const auto& s : corpus.songs) {
    for (const auto& tok : s.chords) stream.push_back(lm_vocab.index_or_unk(tok));
    stream.push_back(*eos);
  }
  return stream;
}

Perplexity perplexity(const LMModel& model, const Corpus& corpus) {
  const auto stream = lm_stream(corpus, model.vocab);
  if (stream.size() < 2) throw EmptyCorpus();
  LMState state = zero_state(model, 1);
  const std::size_t seq = static_cast<std::size_t>(std::max(1, model.config.seq_len));
  double total = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < stream.size(); i += seq) {
    const std::size_t len = std::min(seq, stream.size() - 1 - i);
    std::vector<std::vector<std::size_t>> in(len), tg(len);
    for (std::size_t t = 0; t < len; ++t) {
      in[t] = {stream[i + t]};
      tg[t] = {stream[i + t + 1]};
    }
    total += lm_loss_and_grad(model, in, tg, state, nullptr) * static_cast<double>(len);
    count += len;
  }
  Perplexity p;
  p.tokens = count;
  p.mean_loss = total / static_cast<double>(count);
  p.ppl = std::exp(p.mean_loss);
  return p;
}

LMModel lm_train(const Corpus& train, const Corpus& valid, const Vocabulary& chords, const LMConfig& config,
                 const EmbeddingMatrix* embeddings) {
  if (config.epochs <= 0 || config.seq_len <= 0 || config.batch <= 0) throw ConfigError("epochs, seq_len and batch must be positive");
  LMModel model = make_lm(chords, config, embeddings);
  const auto stream = lm_stream(train, model.vocab);
  if (stream.size() < 2 || train.empty()) throw EmptyCorpus();
  const Corpus& held_out = valid.empty() ? train : valid;

  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch), stream.size() / 2);
  const std::size_t rows = stream.size() / batch;
  std::vector<std::vector<std::size_t>> data(rows, std::vector<std::size_t>(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < rows; ++t) data[t][b] = stream[b * rows + t];
  }

  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  double lr = config.lr;
  double best = std::numeric_limits<double>::infinity();
  LMModel best_model = model;
  std::vector<double> history;
  const auto seq = static_cast<std::size_t>(config.seq_len);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    LMState state = zero_state(model, static_cast<int>(batch));
    for (std::size_t i = 0; i + 1 < rows; i += seq) {
      const std::size_t len = std::min(seq, rows - 1 - i);
      const std::vector<std::vector<std::size_t>> in(data.begin() + static_cast<std::ptrdiff_t>(i),
                                                     data.begin() + static_cast<std::ptrdiff_t>(i + len));
      const std::vector<std::vector<std::size_t>> tg(data.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                                     data.begin() + static_cast<std::ptrdiff_t>(i + len + 1));
      LMGrads grads = zero_grads(model);
      const double loss = lm_loss_and_grad(model, in, tg, state, &grads, &dropout_rng);
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("non-finite training loss at epoch " + std::to_string(epoch + 1) + ", position " +
                            std::to_string(i) + ", lr " + std::to_string(lr));
      }
      clip_gradients(grads, config.clip);
      auto params = model.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) *params[k].second -= lr * grads.g[k];
    }
    const double val = perplexity(model, held_out).mean_loss;
    if (!std::isfinite(val)) throw NonFiniteLoss("non-finite validation loss at epoch " + std::to_string(epoch + 1));
    history.push_back(val);
    spdlog::debug("epoch {} lr {} valid loss {:.4f} ppl {:.3f}", epoch + 1, lr, val, std::exp(val));
    if (val < best) {
      best = val;
      best_model = model;
    } else {
      lr /= 4.0;
    }
  }
  best_model.valid_loss = history;
  best_model.final_lr = lr;
  return best_model;
}

std::vector<std::pair<std::string, double>> predict_next(const LMModel& model,
                                                          const std::vector<std::string>& progression,
                                                          std::size_t k) {
  if (progression.empty()) throw ConfigError("progression must contain at least one chord");
  LMState state = zero_state(model, 1);
  const std::size_t eos = model.eos();
  std::vector<std::vector<std::size_t>> tokens{{eos}};
  for (const auto& c : progression) tokens.push_back({model.vocab.index_or_unk(c)});
  const auto logits = lm_forward(model, tokens, state);
  Tensor logp = log_softmax(logits.back());
  std::vector<std::pair<std::size_t, double>> scored;
  double mass = 0;
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    if (i == eos) continue;
    const double p = std::exp(logp(static_cast<Eigen::Index>(i), 0));
    scored.emplace_back(i, p);
    mass += p;
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (scored.size() > k) scored.resize(k);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [i, p] : scored) out.emplace_back(model.vocab.token(i), p / mass);
  return out;
}

void save_lm(const LMModel& model, const std::string& path) {
  const LMConfig& c = model.config;
  Json j;
  j["format"] = "chordvec-lm";
  j["version"] = 1;
  j["config"] = {{"init", encoder_init_name(c.init)}, {"emb_dim", c.emb_dim},   {"hidden_dim", c.hidden()},
                 {"layers", c.layers},                 {"seq_len", c.seq_len},   {"batch", c.batch},
                 {"dropout", c.dropout},               {"lr", c.lr},             {"clip", c.clip},
                 {"epochs", c.epochs},                 {"seed", c.seed},         {"tie_weights", c.tie_weights},
                 {"init_range", c.init_range}};
  j["vocab"] = model.vocab.tokens();
  j["vocab_hash"] = hex64(model.vocab.hash());
  j["valid_loss"] = model.valid_loss;
  j["final_lr"] = model.final_lr;
  Json tensors = Json::object();
  for (const auto& [name, t] : model.parameters()) tensors[name] = tensor_json(*t);
  j["tensors"] = tensors;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

LMModel load_lm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(0, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "chordvec-lm" || j.at("version") != 1) throw FormatError(0, "unsupported checkpoint format");
    LMModel m;
    const Json& c = j.at("config");
    m.config.init = parse_encoder_init(c.at("init").get<std::string>());
    m.config.emb_dim = c.at("emb_dim");
    m.config.hidden_dim = c.at("hidden_dim");
    m.config.layers = c.at("layers");
    m.config.seq_len = c.at("seq_len");
    m.config.batch = c.at("batch");
    m.config.dropout = c.at("dropout");
    m.config.lr = c.at("lr");
    m.config.clip = c.at("clip");
    m.config.epochs = c.at("epochs");
    m.config.seed = c.at("seed");
    m.config.tie_weights = c.at("tie_weights");
    m.config.init_range = c.at("init_range");
    m.vocab = Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    if (hex64(m.vocab.hash()) != j.at("vocab_hash").get<std::string>()) {
      throw FormatError(0, "checkpoint vocabulary does not match its hash");
    }
    if (!m.vocab.find(std::string(kEosToken))) throw FormatError(0, "checkpoint vocabulary lacks the boundary token");
    m.valid_loss = j.at("valid_loss").get<std::vector<double>>();
    m.final_lr = j.at("final_lr");
    m.layers.resize(static_cast<std::size_t>(m.config.layers));
    const Json& tensors = j.at("tensors");
    for (auto& [name, t] : m.parameters()) *t = tensor_from_json(tensors.at(name), name);
    const auto v = static_cast<Eigen::Index>(m.vocab.size());
    const Eigen::Index h = m.config.hidden();
    bool ok = m.encoder.rows() == v && m.encoder.cols() == m.config.emb_dim && m.dec_b.rows() == v;
    if (!m.config.tie_weights) ok = ok && m.dec_w.rows() == v && m.dec_w.cols() == h;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto& L = m.layers[l];
      ok = ok && L.w.rows() == 4 * h && L.w.cols() == (l == 0 ? m.config.emb_dim : h) && L.u.rows() == 4 * h &&
           L.u.cols() == h && L.b.rows() == 4 * h;
    }
    if (!ok) throw FormatError(0, "checkpoint tensor shapes do not match its config");
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(0, std::string("malformed checkpoint: ") + e.what());
  }
}

LMModel load_lm(const std::string& path, const Vocabulary& expected) {
  LMModel m = load_lm(path);
  if (m.vocab.hash() != lm_vocabulary(expected).hash()) {
    throw FormatError(0, "checkpoint vocabulary hash " + hex64(m.vocab.hash()) + " does not match " +
                             hex64(lm_vocabulary(expected).hash()));
  }
  return m;
}

}  // namespace chordvec
