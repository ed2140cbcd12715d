// Chord embeddings trained with the word2vec negative-sampling objective
// (CBOW and skip-gram), plus similarity queries and the text file format.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chordvec/common.h"
#include "chordvec/corpus.h"

namespace chordvec {

enum class EmbeddingMode { cbow, skipgram };

struct EmbeddingConfig {
  EmbeddingMode mode = EmbeddingMode::skipgram;
  int window = 5;
  int dim = 200;
  int negatives = 5;
  int epochs = 5;
  double initial_lr = 0.025;
  double final_lr = 0.025 * 1e-4;
  std::uint64_t seed = 1;
  std::optional<double> subsample_threshold;
  // Effective window drawn uniformly from 1..window per position.
  bool dynamic_window = true;
};

struct EmbeddingMatrix {
  Vocabulary vocab;
  Matrix input;   // |V| x dim, the published vectors
  Matrix output;  // |V| x dim; empty when loaded from a vector file
  EmbeddingConfig config;
  std::vector<double> epoch_loss;  // mean loss per training example

  int dim() const { return static_cast<int>(input.cols()); }
};

struct NsResult {
  double loss = 0.0;
  Vector grad_input;
  // Gradient for the target row followed by one per negative, in call order.
  std::vector<std::pair<std::size_t, Vector>> grad_output;
};

// loss = -log s(u_t . v) - sum_n log s(-u_n . v) with v the input vector.
NsResult ns_objective(const Vector& v, std::size_t target, std::span<const std::size_t> negatives,
                      const Matrix& output);

// Skip-gram pair: v = input[center], target = context.
NsResult ns_loss_and_grad(const Matrix& input, const Matrix& output, std::size_t center, std::size_t context,
                          std::span<const std::size_t> negatives);

// One SGD step on a training example. The input vector is the mean of
// input rows `inputs` (a single row for skip-gram).
double sgd_step(Matrix& input, Matrix& output, std::span<const std::size_t> inputs, std::size_t target,
                std::span<const std::size_t> negatives, double lr);

EmbeddingMatrix train_embeddings(const Corpus& corpus, const Vocabulary& vocab, const EmbeddingConfig& config);

double cosine(const Vector& a, const Vector& b);
double similarity(const EmbeddingMatrix& m, const std::string& a, const std::string& b);
std::vector<std::pair<std::string, double>> nearest(const EmbeddingMatrix& m, const std::string& chord,
                                                    std::size_t k);

void save_embeddings(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

std::string_view mode_name(EmbeddingMode mode);

}  // namespace chordvec
