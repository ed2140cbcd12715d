// Binary artist-attribute classifiers over chord representations: L2
// logistic regression on per-song vectors, a convolutional sequence
// classifier with max-over-time pooling, stratified cross-validation and
// paired t-tests.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chordvec/common.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"
#include "chordvec/next_chord_lm.h"
#include "chordvec/representations.h"

namespace chordvec {

// ---- logistic regression -------------------------------------------------

struct LRConfig {
  double l2 = 1e-4;
  int max_iterations = 2000;
  double tolerance = 1e-6;  // gradient norm
};

struct LRModel {
  Vector weights;
  double bias = 0.0;
  double l2 = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
};

// Mean negative log-likelihood plus (l2 / 2) |w|^2; the bias is not
// penalized. Fills the gradients when both pointers are given.
double lr_objective(const Vector& w, double b, const Matrix& x, const std::vector<int>& y, double l2,
                    Vector* grad_w = nullptr, double* grad_b = nullptr);

// Full-batch gradient descent with backtracking line search from zero.
LRModel train_lr(const Matrix& x, const std::vector<int>& y, const LRConfig& config = {});
double lr_probability(const LRModel& m, const Vector& x);
int lr_predict(const LRModel& m, const Vector& x);

// ---- convolutional classifier ----------------------------------------------

struct CnnConfig {
  EncoderInit init = EncoderInit::NI;
  int emb_dim = 50;
  std::vector<int> widths{3, 4, 5};
  int maps = 30;
  double dropout = 0.5;
  std::size_t seq_limit = 60;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 20;
  std::size_t batch = 50;
  // Share of the training songs held out to pick the best epoch.
  double valid_fraction = 0.1;
  double init_range = 0.1;
  std::uint64_t seed = 1;
};

struct CnnModel {
  CnnConfig config;
  Vocabulary vocab;
  Tensor emb;                  // |V| x E
  std::vector<Tensor> conv_w;  // per width: maps x (w * E)
  std::vector<Tensor> conv_b;  // per width: maps x 1
  Tensor out_w;                // 2 x (maps * widths)
  Tensor out_b;                // 2 x 1
  std::vector<double> valid_loss;

  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;
};

CnnModel make_cnn(const Vocabulary& vocab, const CnnConfig& config, const EmbeddingMatrix* embeddings = nullptr);

// Token ids truncated to config.seq_limit.
std::vector<std::size_t> cnn_encode(const CnnModel& m, const Song& song);

// Mean cross-entropy over the examples. Gradients (same order and shapes as
// parameters()) are accumulated when `grads` is given; dropout is applied
// only when `rng` is given.
double cnn_loss_and_grad(const CnnModel& m, const std::vector<std::vector<std::size_t>>& seqs,
                         const std::vector<int>& labels, std::vector<Tensor>* grads, Rng* rng = nullptr);

// Class-1 probability.
double cnn_probability(const CnnModel& m, const std::vector<std::size_t>& seq);
int cnn_predict(const CnnModel& m, const std::vector<std::size_t>& seq);

// Adam over shuffled minibatches; returns the model of the epoch with the
// lowest loss on the held-out share of `songs`.
CnnModel train_cnn(const std::vector<Song>& songs, const std::vector<int>& labels, const Vocabulary& vocab,
                   const CnnConfig& config, const EmbeddingMatrix* embeddings = nullptr);

// ---- cross-validation and significance ----------------------------------

// Fold id per sample; within every fold each class is balanced to +-1.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

struct CvResult {
  std::string model;
  std::vector<double> per_fold_accuracy;
  double mean = 0.0;
};

// Trains on `train` and returns accuracy on `test` (indices into the data).
using FoldRunner =
    std::function<double(const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, int fold)>;

CvResult cross_validate(const std::string& model, const std::vector<int>& labels, int folds, std::uint64_t seed,
                        const FoldRunner& run);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  int df = 0;
  bool zero_variance = false;
};

// Two-sided paired t-test on per-fold accuracies. Zero variance of the
// differences gives t = 0, p = 1 and sets the flag.
TTest paired_t_test(const CvResult& a, const CvResult& b);

// ---- attribute study ------------------------------------------------------

// Per-song features for one scheme; `idf` is used only for boc_tfidf.
Matrix song_features(const std::vector<Song>& songs, Scheme scheme, const Vocabulary& vocab, const Vector& idf,
                     const EmbeddingMatrix* embeddings);

struct AttributeData {
  std::vector<Song> songs;
  std::vector<int> labels;  // 1 for the second class
  std::string class_a, class_b;
};

// Balanced two-class data set for a label.
AttributeData attribute_data(const Corpus& corpus, const std::string& label, std::uint64_t seed);

CvResult cv_lr(const AttributeData& data, Scheme scheme, const Vocabulary& vocab, const EmbeddingMatrix* embeddings,
               const LRConfig& config, int folds, std::uint64_t seed);
CvResult cv_cnn(const AttributeData& data, const Vocabulary& vocab, const CnnConfig& config,
                const EmbeddingMatrix* embeddings, int folds, std::uint64_t seed);

struct StudyConfig {
  std::vector<Scheme> lr_schemes{Scheme::boc_count, Scheme::boc_tfidf, Scheme::pr_agg, Scheme::ce_maxpool};
  std::vector<EncoderInit> cnn_inits{EncoderInit::NI, EncoderInit::PR, EncoderInit::CE_cbow, EncoderInit::CE_sglm};
  LRConfig lr;
  CnnConfig cnn;
  int folds = 10;
  std::uint64_t seed = 1;
  double alpha = 0.05;
};

struct StudyRow {
  std::string family;  // "LR" or "CNN"
  CvResult cv;
  // Indices (within the family) of rows this one beats at p < alpha.
  std::vector<std::size_t> beats;
};

struct StudyReport {
  std::string attribute, class_a, class_b;
  std::size_t songs = 0;
  std::vector<StudyRow> rows;
};

// `cbow` and `sglm` feed ce_maxpool (sglm) and the CE_* CNN encoders.
StudyReport run_attribute_study(const Corpus& corpus, const std::string& attribute, const Vocabulary& vocab,
                                const EmbeddingMatrix* cbow, const EmbeddingMatrix* sglm, const StudyConfig& config);

// Within-family significance markers, filled from the rows' CV results.
void mark_significance(std::vector<StudyRow>& rows, double alpha);

void write_study_csv(const StudyReport& report, const std::string& path);
std::string format_study_table(const StudyReport& report);

}  // namespace chordvec
