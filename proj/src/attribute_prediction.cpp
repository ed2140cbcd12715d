#include "chordvec/attribute_prediction.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

namespace chordvec {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_binary(const std::vector<int>& y, std::size_t n) {
  if (y.size() != n) throw ConfigError("label count differs from sample count");
  for (int v : y) {
    if (v != 0 && v != 1) throw ConfigError("labels must be 0 or 1");
  }
}

void fill_uniform(Tensor& t, Rng& rng, double range) {
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = rng.uniform(-range, range);
  }
}

// Forward pass of one sequence, with what backpropagation needs.
struct CnnTrace {
  Tensor x;                                   // E x padded length
  std::size_t length = 0;                     // real tokens
  std::vector<std::vector<Eigen::Index>> at;  // per width, per map: argmax window
  Vector features;                            // after ReLU and pooling
  Vector mask;                                // dropout scale per feature
  Eigen::Vector2d prob;
};

CnnTrace cnn_forward(const CnnModel& m, const std::vector<std::size_t>& seq, Rng* rng) {
  CnnTrace tr;
  const Eigen::Index e = m.emb.cols();
  const int wmax = *std::max_element(m.config.widths.begin(), m.config.widths.end());
  tr.length = seq.size();
  const Eigen::Index padded = std::max<Eigen::Index>(static_cast<Eigen::Index>(seq.size()), wmax);
  tr.x = Tensor::Zero(e, padded);
  for (std::size_t t = 0; t < seq.size(); ++t) tr.x.col(static_cast<Eigen::Index>(t)) = m.emb.row(static_cast<Eigen::Index>(seq[t])).transpose();

  const Eigen::Index maps = m.config.maps;
  tr.features.resize(maps * static_cast<Eigen::Index>(m.config.widths.size()));
  for (std::size_t k = 0; k < m.config.widths.size(); ++k) {
    const int w = m.config.widths[k];
    // Windows that start inside the padding are masked out; a song shorter
    // than the width keeps one zero-padded window.
    const Eigen::Index windows = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(seq.size()) - w + 1);
    const Eigen::Map<const Tensor, 0, Eigen::OuterStride<>> win(tr.x.data(), w * e, windows, Eigen::OuterStride<>(e));
    const Tensor pre = (m.conv_w[k] * win).colwise() + m.conv_b[k].col(0);
    std::vector<Eigen::Index> arg(static_cast<std::size_t>(maps));
    for (Eigen::Index j = 0; j < maps; ++j) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < windows; ++c) {
        if (pre(j, c) > pre(j, best)) best = c;
      }
      arg[static_cast<std::size_t>(j)] = best;
      tr.features(static_cast<Eigen::Index>(k) * maps + j) = std::max(0.0, pre(j, best));
    }
    tr.at.push_back(std::move(arg));
  }

  tr.mask = Vector::Ones(tr.features.size());
  if (rng && m.config.dropout > 0) {
    const double keep = 1.0 - m.config.dropout;
    for (Eigen::Index i = 0; i < tr.mask.size(); ++i) tr.mask(i) = rng->uniform() < m.config.dropout ? 0.0 : 1.0 / keep;
  }
  const Eigen::Vector2d logits = m.out_w * tr.features.cwiseProduct(tr.mask) + m.out_b.col(0);
  const double mx = logits.maxCoeff();
  tr.prob = (logits.array() - mx).exp();
  tr.prob /= tr.prob.sum();
  return tr;
}

std::vector<Tensor> zero_like(const CnnModel& m) {
  std::vector<Tensor> g;
  for (const auto& [name, t] : m.parameters()) g.push_back(Tensor::Zero(t->rows(), t->cols()));
  return g;
}

std::vector<std::size_t> indices_where(const std::vector<int>& folds, int f, bool equal) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if ((folds[i] == f) == equal) out.push_back(i);
  }
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

Matrix pick_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::string row_letter(std::size_t i) { return std::string(1, static_cast<char>('a' + i)); }

std::string beats_text(const StudyRow& row) {
  std::string s;
  for (auto j : row.beats) s += (s.empty() ? "" : " ") + row_letter(j);
  return s;
}

// Position of each row within its family.
std::vector<std::size_t> family_positions(const std::vector<StudyRow>& rows) {
  std::map<std::string, std::size_t> next;
  std::vector<std::size_t> pos;
  for (const auto& r : rows) pos.push_back(next[r.family]++);
  return pos;
}

}  // namespace

// ---- logistic regression -------------------------------------------------

double lr_objective(const Vector& w, double b, const Matrix& x, const std::vector<int>& y, double l2, Vector* grad_w,
                    double* grad_b) {
  check_binary(y, static_cast<std::size_t>(x.rows()));
  if (x.rows() == 0) throw ConfigError("no training samples");
  const double n = static_cast<double>(x.rows());
  const Vector z = (x * w).array() + b;
  double loss = 0;
  Vector r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i);
    r(i) = sigmoid(z(i)) - y[static_cast<std::size_t>(i)];
  }
  if (grad_w && grad_b) {
    *grad_w = x.transpose() * r / n + l2 * w;
    *grad_b = r.sum() / n;
  }
  return loss / n + 0.5 * l2 * w.squaredNorm();
}

LRModel train_lr(const Matrix& x, const std::vector<int>& y, const LRConfig& config) {
  if (config.l2 < 0) throw ConfigError("l2 must be non-negative");
  LRModel m;
  m.l2 = config.l2;
  m.weights = Vector::Zero(x.cols());
  Vector gw;
  double gb = 0;
  double f = lr_objective(m.weights, m.bias, x, y, config.l2, &gw, &gb);
  double step = 1.0;
  for (m.iterations = 0; m.iterations < config.max_iterations; ++m.iterations) {
    const double g2 = gw.squaredNorm() + gb * gb;
    m.grad_norm = std::sqrt(g2);
    if (m.grad_norm < config.tolerance) break;
    double t = step, f_new = f;
    Vector w_new;
    double b_new = 0;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      w_new = m.weights - t * gw;
      b_new = m.bias - t * gb;
      f_new = lr_objective(w_new, b_new, x, y, config.l2);
      if (f_new <= f - 0.5 * t * g2) break;
    }
    if (f_new >= f) break;
    m.weights = w_new;
    m.bias = b_new;
    f = lr_objective(m.weights, m.bias, x, y, config.l2, &gw, &gb);
    step = 2.0 * t;
  }
  m.grad_norm = std::sqrt(gw.squaredNorm() + gb * gb);
  return m;
}

double lr_probability(const LRModel& m, const Vector& x) { return sigmoid(m.weights.dot(x) + m.bias); }

int lr_predict(const LRModel& m, const Vector& x) { return m.weights.dot(x) + m.bias > 0 ? 1 : 0; }

// ---- convolutional classifier ----------------------------------------------

std::vector<std::pair<std::string, Tensor*>> CnnModel::parameters() {
  std::vector<std::pair<std::string, Tensor*>> out{{"embedding", &emb}};
  for (std::size_t k = 0; k < conv_w.size(); ++k) {
    out.emplace_back("conv" + std::to_string(config.widths[k]) + ".w", &conv_w[k]);
    out.emplace_back("conv" + std::to_string(config.widths[k]) + ".b", &conv_b[k]);
  }
  out.emplace_back("output.w", &out_w);
  out.emplace_back("output.b", &out_b);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> CnnModel::parameters() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto& [name, t] : const_cast<CnnModel*>(this)->parameters()) out.emplace_back(name, t);
  return out;
}

CnnModel make_cnn(const Vocabulary& vocab, const CnnConfig& config, const EmbeddingMatrix* embeddings) {
  CnnConfig cfg = config;
  const bool pretrained = cfg.init == EncoderInit::CE_cbow || cfg.init == EncoderInit::CE_sglm;
  if (pretrained && embeddings) cfg.emb_dim = embeddings->dim();
  if (cfg.emb_dim <= 0 || cfg.maps <= 0 || cfg.widths.empty()) throw ConfigError("CNN sizes must be positive");
  for (int w : cfg.widths) {
    if (w <= 0) throw ConfigError("filter widths must be positive");
  }
  if (cfg.dropout < 0 || cfg.dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
  if (cfg.seq_limit == 0) throw ConfigError("seq_limit must be positive");

  CnnModel m;
  m.config = cfg;
  m.vocab = vocab;
  Rng rng(cfg.seed);
  LMConfig enc;
  enc.init = cfg.init;
  enc.emb_dim = cfg.emb_dim;
  enc.init_range = cfg.init_range;
  m.emb = init_encoder(enc, vocab, embeddings, rng);
  for (int w : cfg.widths) {
    Tensor cw(cfg.maps, static_cast<Eigen::Index>(w) * cfg.emb_dim);
    fill_uniform(cw, rng, 1.0 / std::sqrt(static_cast<double>(cw.cols())));
    m.conv_w.push_back(std::move(cw));
    m.conv_b.push_back(Tensor::Zero(cfg.maps, 1));
  }
  const Eigen::Index features = cfg.maps * static_cast<Eigen::Index>(cfg.widths.size());
  m.out_w.resize(2, features);
  fill_uniform(m.out_w, rng, 1.0 / std::sqrt(static_cast<double>(features)));
  m.out_b = Tensor::Zero(2, 1);
  return m;
}

std::vector<std::size_t> cnn_encode(const CnnModel& m, const Song& song) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < song.chords.size() && i < m.config.seq_limit; ++i) ids.push_back(m.vocab.index_or_unk(song.chords[i]));
  return ids;
}

double cnn_loss_and_grad(const CnnModel& m, const std::vector<std::vector<std::size_t>>& seqs,
                         const std::vector<int>& labels, std::vector<Tensor>* grads, Rng* rng) {
  check_binary(labels, seqs.size());
  if (seqs.empty()) throw ConfigError("no training samples");
  const double n = static_cast<double>(seqs.size());
  const Eigen::Index e = m.emb.cols();
  const Eigen::Index maps = m.config.maps;
  const std::size_t nw = m.config.widths.size();
  double loss = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const CnnTrace tr = cnn_forward(m, seqs[s], rng);
    const int y = labels[s];
    loss -= std::log(std::max(tr.prob(y), std::numeric_limits<double>::min()));
    if (!grads) continue;
    auto& g = *grads;
    Eigen::Vector2d dz = tr.prob;
    dz(y) -= 1.0;
    dz /= n;
    const Vector dropped = tr.features.cwiseProduct(tr.mask);
    g[1 + 2 * nw] += dz * dropped.transpose();
    g[2 + 2 * nw].col(0) += dz;
    const Vector df = (m.out_w.transpose() * dz).cwiseProduct(tr.mask);
    for (std::size_t k = 0; k < nw; ++k) {
      const int w = m.config.widths[k];
      Tensor& gw = g[1 + 2 * k];
      Tensor& gb = g[2 + 2 * k];
      for (Eigen::Index j = 0; j < maps; ++j) {
        const Eigen::Index fi = static_cast<Eigen::Index>(k) * maps + j;
        if (tr.features(fi) <= 0.0) continue;
        const double d = df(fi);
        const Eigen::Index c = tr.at[k][static_cast<std::size_t>(j)];
        const Eigen::Map<const Vector> window(tr.x.data() + c * e, w * e);
        gw.row(j) += d * window.transpose();
        gb(j, 0) += d;
        for (int q = 0; q < w; ++q) {
          const auto pos = static_cast<std::size_t>(c + q);
          if (pos >= tr.length) break;
          g[0].row(static_cast<Eigen::Index>(seqs[s][pos])) += d * m.conv_w[k].row(j).segment(q * e, e);
        }
      }
    }
  }
  return loss / n;
}

double cnn_probability(const CnnModel& m, const std::vector<std::size_t>& seq) { return cnn_forward(m, seq, nullptr).prob(1); }

int cnn_predict(const CnnModel& m, const std::vector<std::size_t>& seq) { return cnn_probability(m, seq) > 0.5 ? 1 : 0; }

CnnModel train_cnn(const std::vector<Song>& songs, const std::vector<int>& labels, const Vocabulary& vocab,
                   const CnnConfig& config, const EmbeddingMatrix* embeddings) {
  check_binary(labels, songs.size());
  if (songs.empty()) throw ConfigError("no training songs");
  if (config.epochs <= 0 || config.batch == 0) throw ConfigError("epochs and batch must be positive");
  if (config.valid_fraction < 0 || config.valid_fraction >= 1) throw ConfigError("valid_fraction must be in [0, 1)");
  CnnModel m = make_cnn(vocab, config, embeddings);

  std::vector<std::vector<std::size_t>> seqs;
  for (const auto& s : songs) seqs.push_back(cnn_encode(m, s));

  std::vector<std::size_t> fit(songs.size());
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = i;
  std::vector<std::size_t> held;
  if (config.valid_fraction > 0) {
    const int k = std::max(2, static_cast<int>(std::lround(1.0 / config.valid_fraction)));
    if (songs.size() >= static_cast<std::size_t>(2 * k)) {
      const auto folds = stratified_folds(labels, k, config.seed ^ 0x5bd1e995ULL);
      held = indices_where(folds, 0, true);
      fit = indices_where(folds, 0, false);
    }
  }
  const auto held_seqs = pick(seqs, held);
  const auto held_labels = pick(labels, held);

  auto params = m.parameters();
  std::vector<Tensor> adam_m = zero_like(m), adam_v = zero_like(m);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  CnnModel best = m;
  double best_loss = std::numeric_limits<double>::infinity();
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(fit.begin(), fit.end());
    for (std::size_t start = 0; start < fit.size(); start += config.batch) {
      const std::size_t end = std::min(fit.size(), start + config.batch);
      std::vector<std::vector<std::size_t>> bx;
      std::vector<int> by;
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(seqs[fit[i]]);
        by.push_back(labels[fit[i]]);
      }
      std::vector<Tensor> g = zero_like(m);
      cnn_loss_and_grad(m, bx, by, &g, &rng);
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        adam_m[p] = config.beta1 * adam_m[p] + (1.0 - config.beta1) * g[p];
        adam_v[p] = config.beta2 * adam_v[p] + (1.0 - config.beta2) * g[p].cwiseProduct(g[p]);
        *params[p].second -= (config.lr * (adam_m[p] / c1).array() / ((adam_v[p] / c2).array().sqrt() + config.eps)).matrix();
      }
    }
    if (held.empty()) continue;
    const double vl = cnn_loss_and_grad(m, held_seqs, held_labels, nullptr);
    m.valid_loss.push_back(vl);
    spdlog::debug("cnn epoch {} valid loss {:.6f}", epoch + 1, vl);
    if (vl < best_loss) {
      best_loss = vl;
      best = m;
    }
  }
  if (held.empty()) return m;
  best.valid_loss = m.valid_loss;
  return best;
}

// ---- cross-validation and significance ----------------------------------

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least two folds");
  if (labels.size() < static_cast<std::size_t>(folds)) throw ConfigError("fewer samples than folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<int> out(labels.size(), 0);
  std::size_t counter = 0;
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx.begin(), idx.end());
    for (auto i : idx) out[i] = static_cast<int>(counter++ % static_cast<std::size_t>(folds));
  }
  return out;
}

CvResult cross_validate(const std::string& model, const std::vector<int>& labels, int folds, std::uint64_t seed,
                        const FoldRunner& run) {
  const auto assignment = stratified_folds(labels, folds, seed);
  CvResult res;
  res.model = model;
  for (int f = 0; f < folds; ++f) {
    const double acc = run(indices_where(assignment, f, false), indices_where(assignment, f, true), f);
    if (!(acc >= 0.0 && acc <= 1.0)) throw Error("fold accuracy outside [0, 1]");
    res.per_fold_accuracy.push_back(acc);
    spdlog::debug("{} fold {} accuracy {:.4f}", model, f + 1, acc);
  }
  double sum = 0;
  for (double a : res.per_fold_accuracy) sum += a;
  res.mean = sum / folds;
  return res;
}

TTest paired_t_test(const CvResult& a, const CvResult& b) {
  const auto& x = a.per_fold_accuracy;
  const auto& y = b.per_fold_accuracy;
  if (x.size() != y.size()) throw ConfigError("paired t-test needs the same number of folds");
  if (x.size() < 2) throw ConfigError("paired t-test needs at least two folds");
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
  mean /= n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  TTest r;
  r.df = static_cast<int>(x.size()) - 1;
  if (ss == 0.0) {
    r.zero_variance = true;
    return r;
  }
  r.t = mean / std::sqrt(ss / (n - 1) / n);
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

// ---- attribute study ------------------------------------------------------

Matrix song_features(const std::vector<Song>& songs, Scheme scheme, const Vocabulary& vocab, const Vector& idf,
                     const EmbeddingMatrix* embeddings) {
  if (scheme == Scheme::ce_maxpool && !embeddings) throw ConfigError("ce_maxpool needs an embedding matrix");
  std::vector<SongVector> rows;
  for (const auto& s : songs) {
    switch (scheme) {
      case Scheme::boc_count: rows.push_back(boc_count(s, vocab)); break;
      case Scheme::boc_tfidf: rows.push_back(boc_tfidf(s, vocab, idf)); break;
      case Scheme::pr_agg: rows.push_back(pr_aggregate(s)); break;
      case Scheme::ce_maxpool: rows.push_back(ce_maxpool(s, *embeddings)); break;
    }
  }
  const Eigen::Index dim = rows.empty() ? 0 : rows[0].values.size();
  Matrix x(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i].values.transpose();
  return x;
}

AttributeData attribute_data(const Corpus& corpus, const std::string& label, std::uint64_t seed) {
  const auto [a, b] = top_two_classes(corpus, label);
  const Corpus balanced = balance_classes(corpus, label, seed);
  AttributeData d;
  d.class_a = a;
  d.class_b = b;
  for (const auto& s : balanced.songs) {
    d.songs.push_back(s);
    d.labels.push_back(s.labels.at(label) == b ? 1 : 0);
  }
  return d;
}

CvResult cv_lr(const AttributeData& data, Scheme scheme, const Vocabulary& vocab, const EmbeddingMatrix* embeddings,
               const LRConfig& config, int folds, std::uint64_t seed) {
  Matrix all;
  if (scheme != Scheme::boc_tfidf) all = song_features(data.songs, scheme, vocab, Vector(), embeddings);
  return cross_validate("LR " + std::string(scheme_name(scheme)), data.labels, folds, seed,
                        [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, int) {
                          Matrix xtr, xte;
                          if (scheme == Scheme::boc_tfidf) {
                            Corpus train_corpus;
                            train_corpus.songs = pick(data.songs, train);
                            const Vector idf = compute_idf(train_corpus, vocab);
                            xtr = song_features(train_corpus.songs, scheme, vocab, idf, embeddings);
                            xte = song_features(pick(data.songs, test), scheme, vocab, idf, embeddings);
                          } else {
                            xtr = pick_rows(all, train);
                            xte = pick_rows(all, test);
                          }
                          const LRModel m = train_lr(xtr, pick(data.labels, train), config);
                          std::size_t correct = 0;
                          for (std::size_t i = 0; i < test.size(); ++i) {
                            correct += lr_predict(m, xte.row(static_cast<Eigen::Index>(i)).transpose()) == data.labels[test[i]];
                          }
                          return static_cast<double>(correct) / static_cast<double>(test.size());
                        });
}

CvResult cv_cnn(const AttributeData& data, const Vocabulary& vocab, const CnnConfig& config,
                const EmbeddingMatrix* embeddings, int folds, std::uint64_t seed) {
  return cross_validate("CNN " + std::string(encoder_init_name(config.init)), data.labels, folds, seed,
                        [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, int fold) {
                          CnnConfig cfg = config;
                          cfg.seed = config.seed + static_cast<std::uint64_t>(fold);
                          const CnnModel m = train_cnn(pick(data.songs, train), pick(data.labels, train), vocab, cfg,
                                                       embeddings);
                          std::size_t correct = 0;
                          for (auto i : test) correct += cnn_predict(m, cnn_encode(m, data.songs[i])) == data.labels[i];
                          return static_cast<double>(correct) / static_cast<double>(test.size());
                        });
}

void mark_significance(std::vector<StudyRow>& rows, double alpha) {
  const auto pos = family_positions(rows);
  for (auto& r : rows) r.beats.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j || rows[i].family != rows[j].family) continue;
      const TTest t = paired_t_test(rows[i].cv, rows[j].cv);
      if (!t.zero_variance && t.t > 0 && t.p < alpha) rows[i].beats.push_back(pos[j]);
    }
  }
}

StudyReport run_attribute_study(const Corpus& corpus, const std::string& attribute, const Vocabulary& vocab,
                                const EmbeddingMatrix* cbow, const EmbeddingMatrix* sglm, const StudyConfig& config) {
  const AttributeData data = attribute_data(corpus, attribute, config.seed);
  StudyReport rep;
  rep.attribute = attribute;
  rep.class_a = data.class_a;
  rep.class_b = data.class_b;
  rep.songs = data.songs.size();
  spdlog::info("attribute {}: {} songs ({} vs {})", attribute, rep.songs, rep.class_a, rep.class_b);
  for (Scheme s : config.lr_schemes) {
    const EmbeddingMatrix* emb = sglm ? sglm : cbow;
    if (s == Scheme::ce_maxpool && !emb) {
      spdlog::warn("skipping LR {}: no embeddings given", scheme_name(s));
      continue;
    }
    StudyRow row{"LR", cv_lr(data, s, vocab, emb, config.lr, config.folds, config.seed), {}};
    spdlog::info("{}: {:.4f}", row.cv.model, row.cv.mean);
    rep.rows.push_back(std::move(row));
  }
  for (EncoderInit init : config.cnn_inits) {
    const EmbeddingMatrix* emb = init == EncoderInit::CE_cbow ? cbow : init == EncoderInit::CE_sglm ? sglm : nullptr;
    if ((init == EncoderInit::CE_cbow || init == EncoderInit::CE_sglm) && !emb) {
      spdlog::warn("skipping CNN {}: no embeddings given", encoder_init_name(init));
      continue;
    }
    CnnConfig cfg = config.cnn;
    cfg.init = init;
    StudyRow row{"CNN", cv_cnn(data, vocab, cfg, emb, config.folds, config.seed), {}};
    spdlog::info("{}: {:.4f}", row.cv.model, row.cv.mean);
    rep.rows.push_back(std::move(row));
  }
  mark_significance(rep.rows, config.alpha);
  return rep;
}

void write_study_csv(const StudyReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const auto pos = family_positions(report.rows);
  std::size_t folds = 0;
  for (const auto& r : report.rows) folds = std::max(folds, r.cv.per_fold_accuracy.size());
  out << "attribute,family,key,model,mean_accuracy";
  for (std::size_t f = 0; f < folds; ++f) out << ",fold" << f + 1;
  out << ",significantly_better_than\n";
  char buf[32];
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    std::snprintf(buf, sizeof(buf), "%.6f", r.cv.mean);
    out << report.attribute << ',' << r.family << ',' << row_letter(pos[i]) << ',' << r.cv.model << ',' << buf;
    for (double a : r.cv.per_fold_accuracy) {
      std::snprintf(buf, sizeof(buf), "%.6f", a);
      out << ',' << buf;
    }
    out << ',' << beats_text(r) << '\n';
  }
}

std::string format_study_table(const StudyReport& report) {
  std::ostringstream out;
  out << "attribute " << report.attribute << " (" << report.class_a << " vs " << report.class_b << ", " << report.songs
      << " songs)\n";
  const auto pos = family_positions(report.rows);
  char line[160];
  std::snprintf(line, sizeof(line), "%-4s %-16s %9s  %s\n", "key", "model", "accuracy", "better than (p < .05)");
  out << line;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    std::snprintf(line, sizeof(line), "%-4s %-16s %9.2f  %s\n", row_letter(pos[i]).c_str(), r.cv.model.c_str(),
                  100.0 * r.cv.mean, beats_text(r).c_str());
    out << line;
  }
  out << "Keys are compared within the LR and CNN families separately (paired t-test over folds).\n";
  return out.str();
}

}  // namespace chordvec
