// LSTM next-chord language model: encoder initialization (random, pitch
// representation or pretrained embeddings), stateful truncated BPTT with
// gradient-norm clipping, perplexity and top-k prediction.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chordvec/common.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"

namespace chordvec {

inline constexpr std::string_view kEosToken = "<eos>";

enum class EncoderInit { NI, PR, CE_cbow, CE_sglm };

std::string_view encoder_init_name(EncoderInit init);
EncoderInit parse_encoder_init(std::string_view name);

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

struct LMConfig {
  EncoderInit init = EncoderInit::NI;
  int emb_dim = 200;
  int hidden_dim = 0;  // 0: same as emb_dim
  int layers = 2;
  int seq_len = 35;
  int batch = 20;
  double dropout = 0.2;
  double lr = 20.0;
  double clip = 0.25;
  int epochs = 40;
  std::uint64_t seed = 1;
  bool tie_weights = false;
  double init_range = 0.1;  // encoder and decoder uniform range

  int hidden() const { return hidden_dim > 0 ? hidden_dim : emb_dim; }
};

using Tensor = Eigen::MatrixXd;

struct LstmLayer {
  Tensor w;  // 4H x input, gate blocks i, f, g, o
  Tensor u;  // 4H x H
  Tensor b;  // 4H x 1
};

struct LMModel {
  LMConfig config;
  Vocabulary vocab;  // chord vocabulary plus the boundary token
  Tensor encoder;    // |V| x E
  std::vector<LstmLayer> layers;
  Tensor dec_w;  // |V| x H (unused when tied)
  Tensor dec_b;  // |V| x 1
  std::vector<double> valid_loss;  // per epoch
  double final_lr = 0.0;

  std::size_t eos() const { return *vocab.find(std::string(kEosToken)); }
  // Named views of every trainable tensor, in a fixed order.
  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;
};

// Per-layer hidden and cell state, each H x batch.
struct LMState {
  std::vector<Tensor> h, c;
};

LMState zero_state(const LMModel& model, int batch);

// Parameter gradients with the same shapes as LMModel::parameters().
struct LMGrads {
  std::vector<Tensor> g;
  double norm() const;
  void scale(double s);
};

LMGrads zero_grads(const LMModel& model);

// Chord vocabulary plus the boundary token.
Vocabulary lm_vocabulary(const Vocabulary& chords);

Tensor init_encoder(const LMConfig& config, const Vocabulary& lm_vocab, const EmbeddingMatrix* embeddings, Rng& rng);

// Fresh model with initialized encoder, LSTM and decoder.
LMModel make_lm(const Vocabulary& chords, const LMConfig& config, const EmbeddingMatrix* embeddings = nullptr);

// Inputs are time-major: tokens[t][b]. Returns one |V| x batch logit matrix
// per time step and advances `state`. Dropout is applied only when `rng`
// is given and config.dropout > 0.
std::vector<Tensor> lm_forward(const LMModel& model, const std::vector<std::vector<std::size_t>>& tokens,
                               LMState& state, Rng* rng = nullptr);

// Mean next-token cross-entropy over the window; accumulates gradients into
// `grads` when given. The incoming state is treated as a constant.
double lm_loss_and_grad(const LMModel& model, const std::vector<std::vector<std::size_t>>& inputs,
                        const std::vector<std::vector<std::size_t>>& targets, LMState& state, LMGrads* grads,
                        Rng* dropout_rng = nullptr);

// Rescales gradients so their global norm is at most max_norm; returns the
// norm before clipping.
double clip_gradients(LMGrads& grads, double max_norm);

// Token stream with a boundary token after every song.
std::vector<std::size_t> lm_stream(const Corpus& corpus, const Vocabulary& lm_vocab);

struct Perplexity {
  double mean_loss = 0.0;
  double ppl = 0.0;
  std::size_t tokens = 0;
};

Perplexity perplexity(const LMModel& model, const Corpus& corpus);

// Trains with SGD, dividing the learning rate by 4 whenever validation loss
// does not improve; returns the best-validation model.
LMModel lm_train(const Corpus& train, const Corpus& valid, const Vocabulary& chords, const LMConfig& config,
                 const EmbeddingMatrix* embeddings = nullptr);

// Top-k next chords after the progression (boundary token excluded and the
// remaining probabilities renormalized).
std::vector<std::pair<std::string, double>> predict_next(const LMModel& model,
                                                          const std::vector<std::string>& progression,
                                                          std::size_t k);

void save_lm(const LMModel& model, const std::string& path);
LMModel load_lm(const std::string& path);
// Refuses to load when the stored vocabulary hash differs from `expected`.
LMModel load_lm(const std::string& path, const Vocabulary& expected);

}  // namespace chordvec
