#include "chordvec/embeddings.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace chordvec {

namespace {

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// -log sigmoid(x) computed without overflow.
double neg_log_sigmoid(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(-x, 0.0); }

class NoiseSampler {
 public:
  NoiseSampler(const std::vector<double>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0;
    for (double c : counts) {
      acc += std::pow(c, 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace

std::string_view mode_name(EmbeddingMode mode) { return mode == EmbeddingMode::cbow ? "cbow" : "skipgram"; }

NsResult ns_objective(const Vector& v, std::size_t target, std::span<const std::size_t> negatives,
                      const Matrix& output) {
  NsResult r;
  r.grad_input = Vector::Zero(v.size());
  auto term = [&](std::size_t row, bool positive) {
    const Vector u = output.row(static_cast<Eigen::Index>(row)).transpose();
    const double x = u.dot(v);
    // d/dx of -log s(x) is s(x) - 1; of -log s(-x) it is s(x).
    const double g = positive ? sigmoid(x) - 1.0 : sigmoid(x);
    r.loss += positive ? neg_log_sigmoid(x) : neg_log_sigmoid(-x);
    r.grad_input += g * u;
    r.grad_output.emplace_back(row, g * v);
  };
  term(target, true);
  for (std::size_t n : negatives) term(n, false);
  return r;
}

NsResult ns_loss_and_grad(const Matrix& input, const Matrix& output, std::size_t center, std::size_t context,
                          std::span<const std::size_t> negatives) {
  const Vector v = input.row(static_cast<Eigen::Index>(center)).transpose();
  return ns_objective(v, context, negatives, output);
}

double sgd_step(Matrix& input, Matrix& output, std::span<const std::size_t> inputs, std::size_t target,
                std::span<const std::size_t> negatives, double lr) {
  if (inputs.empty()) return 0.0;
  std::map<std::size_t, int> multiplicity;
  for (std::size_t i : inputs) ++multiplicity[i];
  const double n = static_cast<double>(inputs.size());
  Vector v = Vector::Zero(input.cols());
  for (const auto& [row, count] : multiplicity) {
    v += (static_cast<double>(count) / n) * input.row(static_cast<Eigen::Index>(row)).transpose();
  }
  const NsResult r = ns_objective(v, target, negatives, output);
  for (const auto& [row, g] : r.grad_output) output.row(static_cast<Eigen::Index>(row)) -= lr * g.transpose();
  for (const auto& [row, count] : multiplicity) {
    input.row(static_cast<Eigen::Index>(row)) -= (lr * static_cast<double>(count) / n) * r.grad_input.transpose();
  }
  return r.loss;
}

EmbeddingMatrix train_embeddings(const Corpus& corpus, const Vocabulary& vocab, const EmbeddingConfig& config) {
  if (config.dim <= 0) throw ConfigError("embedding dimension must be positive");
  if (config.window <= 0) throw ConfigError("window must be positive");
  if (config.negatives < 1) throw ConfigError("negatives must be at least 1");
  if (config.epochs <= 0) throw ConfigError("epochs must be positive");

  std::vector<std::vector<std::size_t>> songs;
  std::vector<double> counts(vocab.size(), 0.0);
  std::size_t total_tokens = 0;
  for (const auto& s : corpus.songs) {
    auto ids = to_indices(s, vocab);
    for (std::size_t id : ids) counts[id] += 1.0;
    total_tokens += ids.size();
    if (!ids.empty()) songs.push_back(std::move(ids));
  }
  if (total_tokens == 0) throw EmptyCorpus();

  const auto dim = static_cast<Eigen::Index>(config.dim);
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  EmbeddingMatrix m;
  m.vocab = vocab;
  m.config = config;
  m.input.resize(rows, dim);
  m.output = Matrix::Zero(rows, dim);
  Rng rng(config.seed);
  const double half = 0.5 / static_cast<double>(config.dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m.input(r, c) = rng.uniform(-half, half);
  }

  // Tokens that never occur get a tiny weight so the sampler stays valid.
  std::vector<double> noise_counts = counts;
  for (auto& c : noise_counts) c = std::max(c, 1e-12);
  const NoiseSampler sampler(noise_counts);

  const double total_examples = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  double processed = 0;
  std::vector<std::size_t> negs, contexts, kept;
  negs.reserve(static_cast<std::size_t>(config.negatives));

  auto draw_negatives = [&](std::size_t target) {
    negs.clear();
    for (int k = 0; k < config.negatives; ++k) {
      const std::size_t n = sampler.draw(rng);
      if (n != target) negs.push_back(n);
    }
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t examples = 0;
    for (const auto& song : songs) {
      const std::vector<std::size_t>* seq = &song;
      if (config.subsample_threshold) {
        kept.clear();
        const double t = *config.subsample_threshold * static_cast<double>(total_tokens);
        for (std::size_t id : song) {
          const double f = counts[id];
          const double keep_p = (std::sqrt(f / t) + 1.0) * t / f;
          if (keep_p >= 1.0 || rng.uniform() < keep_p) kept.push_back(id);
        }
        seq = &kept;
      }
      const auto len = static_cast<std::ptrdiff_t>(seq->size());
      for (std::ptrdiff_t pos = 0; pos < len; ++pos) {
        const double lr =
            config.initial_lr - (config.initial_lr - config.final_lr) * std::min(1.0, processed / total_examples);
        processed += 1.0;
        const int reach = config.dynamic_window ? 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.window)))
                                                : config.window;
        contexts.clear();
        for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, pos - reach); c <= std::min(len - 1, pos + reach); ++c) {
          if (c != pos) contexts.push_back((*seq)[static_cast<std::size_t>(c)]);
        }
        if (contexts.empty()) continue;
        const std::size_t center = (*seq)[static_cast<std::size_t>(pos)];
        if (config.mode == EmbeddingMode::skipgram) {
          for (std::size_t ctx : contexts) {
            draw_negatives(ctx);
            const std::size_t in[1] = {center};
            loss_sum += sgd_step(m.input, m.output, in, ctx, negs, lr);
            ++examples;
          }
        } else {
          draw_negatives(center);
          loss_sum += sgd_step(m.input, m.output, contexts, center, negs, lr);
          ++examples;
        }
      }
    }
    m.epoch_loss.push_back(examples ? loss_sum / static_cast<double>(examples) : 0.0);
  }
  return m;
}

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

namespace {

std::size_t require_token(const EmbeddingMatrix& m, const std::string& token) {
  const auto idx = m.vocab.find(token);
  if (!idx) throw Error("token not in embedding vocabulary: " + token);
  return *idx;
}

}  // namespace

double similarity(const EmbeddingMatrix& m, const std::string& a, const std::string& b) {
  const auto ia = static_cast<Eigen::Index>(require_token(m, a));
  const auto ib = static_cast<Eigen::Index>(require_token(m, b));
  return cosine(m.input.row(ia).transpose(), m.input.row(ib).transpose());
}

std::vector<std::pair<std::string, double>> nearest(const EmbeddingMatrix& m, const std::string& chord,
                                                    std::size_t k) {
  const std::size_t q = require_token(m, chord);
  const Vector qv = m.input.row(static_cast<Eigen::Index>(q)).transpose();
  std::vector<std::pair<std::size_t, double>> scored;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    if (i == q) continue;
    scored.emplace_back(i, cosine(qv, m.input.row(static_cast<Eigen::Index>(i)).transpose()));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  if (scored.size() > k) scored.resize(k);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [i, c] : scored) out.emplace_back(m.vocab.token(i), c);
  return out;
}

void save_embeddings(const EmbeddingMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path);
  out << m.input.rows() << ' ' << m.input.cols() << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.input.rows(); ++r) {
    out << m.vocab.token(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < m.input.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), " %.9g", m.input(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing embedding file: " + path);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "missing header");
  std::istringstream header(line);
  long long count = -1, dim = -1;
  std::string extra;
  if (!(header >> count >> dim) || (header >> extra) || count < 0 || dim <= 0) {
    throw FormatError(1, "header must be \"<count> <dim>\"");
  }
  std::vector<std::string> tokens;
  Matrix input(count, dim);
  std::size_t line_no = 1;
  for (long long r = 0; r < count; ++r) {
    ++line_no;
    if (!std::getline(in, line)) throw FormatError(line_no, "expected " + std::to_string(count) + " vector rows");
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) throw FormatError(line_no, "missing token");
    for (long long c = 0; c < dim; ++c) {
      std::string num;
      if (!(row >> num)) throw FormatError(line_no, "expected " + std::to_string(dim) + " values");
      try {
        std::size_t used = 0;
        input(r, c) = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
      } catch (const std::exception&) {
        throw FormatError(line_no, "invalid number '" + num + "'");
      }
    }
    if (row >> extra) throw FormatError(line_no, "more than " + std::to_string(dim) + " values");
    tokens.push_back(token);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw FormatError(line_no, "rows beyond header count");
  }

  EmbeddingMatrix m;
  m.vocab = Vocabulary::from_tokens(tokens);
  if (m.vocab.size() > tokens.size()) {
    // No UNK row in the file: append a zero vector for it.
    input.conservativeResize(input.rows() + 1, Eigen::NoChange);
    input.row(input.rows() - 1).setZero();
  }
  m.input = std::move(input);
  m.config.dim = static_cast<int>(dim);
  return m;
}

}  // namespace chordvec
