// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero when any criterion fails. Criterion numbers given as arguments
// restrict the run to those criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "bayes_oracle.h"
#include "chordvec/analysis.h"
#include "chordvec/attribute_prediction.h"
#include "chordvec/chord.h"
#include "chordvec/cli.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"
#include "chordvec/evaluation.h"
#include "chordvec/next_chord_lm.h"
#include "chordvec/synthetic.h"
#include "evaluation_fixture.h"
#include "lm_fixture.h"
#include "test_util.h"

using namespace chordvec;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double tensor_rel_err(const Tensor& analytic, const Tensor& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-10});
  return (analytic - numeric).norm() / denom;
}

// Central difference of `loss` with respect to every entry of `t`.
Tensor central_difference(Tensor& t, const std::function<double()>& loss, double h) {
  Tensor fd(t.rows(), t.cols());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double keep = t.data()[i];
    t.data()[i] = keep + h;
    const double up = loss();
    t.data()[i] = keep - h;
    const double down = loss();
    t.data()[i] = keep;
    fd.data()[i] = (up - down) / (2 * h);
  }
  return fd;
}

Tensor random_tensor(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.normal();
  return t;
}

// ---- 1: gradient suites ----------------------------------------------------

double ns_suite(Rng& rng, int instances) {
  double worst = 0;
  for (int n = 0; n < instances; ++n) {
    const auto rows = static_cast<Eigen::Index>(3 + rng.below(6));
    const auto dim = static_cast<Eigen::Index>(2 + rng.below(5));
    Tensor input = random_tensor(rng, rows, dim), output = random_tensor(rng, rows, dim);
    const std::size_t center = rng.below(static_cast<std::uint64_t>(rows));
    const std::size_t context = rng.below(static_cast<std::uint64_t>(rows));
    std::vector<std::size_t> negatives(rng.below(6));
    for (auto& k : negatives) k = rng.below(static_cast<std::uint64_t>(rows));

    const NsResult r = ns_loss_and_grad(input, output, center, context, negatives);
    Tensor analytic_in = Tensor::Zero(rows, dim), analytic_out = Tensor::Zero(rows, dim);
    analytic_in.row(static_cast<Eigen::Index>(center)) = r.grad_input.transpose();
    for (const auto& [row, g] : r.grad_output) analytic_out.row(static_cast<Eigen::Index>(row)) += g.transpose();
    auto loss = [&] { return ns_loss_and_grad(input, output, center, context, negatives).loss; };
    worst = std::max(worst, tensor_rel_err(analytic_in, central_difference(input, loss, 1e-5)));
    worst = std::max(worst, tensor_rel_err(analytic_out, central_difference(output, loss, 1e-5)));

    // CBOW: the input vector is a mean of context rows.
    Tensor v = random_tensor(rng, dim, 1);
    const NsResult c = ns_objective(v, context, negatives, output);
    auto cbow_loss = [&] { return ns_objective(v, context, negatives, output).loss; };
    worst = std::max(worst, tensor_rel_err(c.grad_input, central_difference(v, cbow_loss, 1e-5)));
  }
  return worst;
}

double lstm_suite(Rng& rng, int instances) {
  double worst = 0;
  const Vocabulary chords = Vocabulary::from_tokens({"UNK", "C", "F", "G", "Am"});
  for (int n = 0; n < instances; ++n) {
    LMConfig cfg;
    cfg.tie_weights = n % 4 == 3;
    cfg.hidden_dim = 2 + static_cast<int>(rng.below(2));
    cfg.emb_dim = cfg.tie_weights ? cfg.hidden_dim : 2 + static_cast<int>(rng.below(3));
    cfg.layers = 2;
    cfg.dropout = 0.0;
    cfg.init_range = 0.8;
    cfg.seed = rng.next();
    LMModel model = make_lm(chords, cfg);
    for (auto& [name, t] : model.parameters()) *t *= 1.5;

    const std::size_t steps = 2 + rng.below(4), batch = 1 + rng.below(3), v = model.vocab.size();
    std::vector<std::vector<std::size_t>> inputs(steps, std::vector<std::size_t>(batch)), targets = inputs;
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        inputs[t][b] = rng.below(v);
        targets[t][b] = rng.below(v);
      }
    }
    LMState start = zero_state(model, static_cast<int>(batch));
    for (std::size_t l = 0; l < start.h.size(); ++l) {
      start.h[l] = random_tensor(rng, start.h[l].rows(), start.h[l].cols(), 0.5);
      start.c[l] = random_tensor(rng, start.c[l].rows(), start.c[l].cols(), 0.5);
    }

    LMGrads grads = zero_grads(model);
    LMState s = start;
    lm_loss_and_grad(model, inputs, targets, s, &grads);
    auto loss = [&] {
      LMState fresh = start;
      return lm_loss_and_grad(model, inputs, targets, fresh, nullptr);
    };
    auto params = model.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      worst = std::max(worst, tensor_rel_err(grads.g[k], central_difference(*params[k].second, loss, 1e-5)));
    }
  }
  return worst;
}

double cnn_suite(Rng& rng, int instances) {
  double worst = 0;
  const Vocabulary vocab = Vocabulary::from_tokens({"UNK", "C", "F", "G", "Am"});
  for (int n = 0; n < instances; ++n) {
    CnnConfig cfg;
    cfg.emb_dim = 2 + static_cast<int>(rng.below(3));
    cfg.maps = 1 + static_cast<int>(rng.below(3));
    cfg.widths = n % 2 == 0 ? std::vector<int>{3, 4, 5} : std::vector<int>{1, 2};
    cfg.dropout = 0.0;
    cfg.init_range = 1.0;
    cfg.seed = rng.next();
    CnnModel m = make_cnn(vocab, cfg);
    for (auto& b : m.conv_b) b = random_tensor(rng, b.rows(), b.cols(), 0.3);

    const std::size_t examples = 1 + rng.below(3);
    std::vector<std::vector<std::size_t>> seqs;
    std::vector<int> labels;
    for (std::size_t e = 0; e < examples; ++e) {
      std::vector<std::size_t> seq(1 + rng.below(8));
      for (auto& t : seq) t = rng.below(vocab.size());
      seqs.push_back(seq);
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    std::vector<Tensor> grads;
    for (const auto& [name, t] : m.parameters()) grads.push_back(Tensor::Zero(t->rows(), t->cols()));
    cnn_loss_and_grad(m, seqs, labels, &grads);
    auto loss = [&] { return cnn_loss_and_grad(m, seqs, labels, nullptr); };
    auto params = m.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      worst = std::max(worst, tensor_rel_err(grads[k], central_difference(*params[k].second, loss, 1e-6)));
    }
  }
  return worst;
}

double lr_suite(Rng& rng, int instances) {
  double worst = 0;
  for (int n = 0; n < instances; ++n) {
    const auto rows = static_cast<Eigen::Index>(2 + rng.below(12));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(6));
    const Matrix x = random_tensor(rng, rows, d);
    std::vector<int> y(static_cast<std::size_t>(rows));
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    Tensor w = random_tensor(rng, d, 1), b = random_tensor(rng, 1, 1);
    const double l2 = 0.5 * rng.uniform();
    Vector gw;
    double gb = 0;
    lr_objective(w, b(0, 0), x, y, l2, &gw, &gb);
    auto loss = [&] { return lr_objective(w, b(0, 0), x, y, l2); };
    worst = std::max(worst, tensor_rel_err(gw, central_difference(w, loss, 1e-6)));
    worst = std::max(worst, tensor_rel_err(Tensor::Constant(1, 1, gb), central_difference(b, loss, 1e-6)));
  }
  return worst;
}

Outcome criterion_gradients() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const int n = 100;
  const double ns = ns_suite(rng, n), lstm = lstm_suite(rng, n), cnn = cnn_suite(rng, n), lr = lr_suite(rng, n);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(ns < 1e-4, "word2vec NS worst rel err " + fmt("%.2e", ns));
  o.require(lstm < 1e-4, "LSTM BPTT worst rel err " + fmt("%.2e", lstm));
  o.require(cnn < 1e-4, "CNN worst rel err " + fmt("%.2e", cnn));
  o.require(lr < 1e-4, "LR worst rel err " + fmt("%.2e", lr));
  o.require(secs < 120, std::to_string(n) + " instances per suite in " + fmt("%.1f s", secs));
  return o;
}

// ---- 2: perplexity identity -------------------------------------------------

// Mean next-token loss over the whole stream in one forward pass, with the
// log-softmax computed here.
double oracle_mean_loss(const LMModel& m, const Corpus& corpus) {
  const auto stream = lm_stream(corpus, m.vocab);
  std::vector<std::vector<std::size_t>> in;
  for (std::size_t i = 0; i + 1 < stream.size(); ++i) in.push_back({stream[i]});
  LMState s = zero_state(m, 1);
  const auto logits = lm_forward(m, in, s);
  double total = 0;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const Eigen::VectorXd z = logits[t].col(0);
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    total += lse - z(static_cast<Eigen::Index>(stream[t + 1]));
  }
  return total / static_cast<double>(logits.size());
}

Outcome criterion_perplexity() {
  Outcome o;
  Rng rng(202);
  double worst_identity = 0, worst_oracle = 0, worst_uniform = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> tokens{"UNK"};
    const std::size_t v = 2 + rng.below(30);
    for (std::size_t i = 0; i < v; ++i) tokens.push_back(annotation_palette()[i % 48] + (i >= 48 ? "*" : ""));
    const Vocabulary chords = Vocabulary::from_tokens(tokens);
    LMConfig cfg;
    cfg.emb_dim = 2 + static_cast<int>(rng.below(6));
    cfg.layers = 1 + static_cast<int>(rng.below(2));
    cfg.seq_len = 1 + static_cast<int>(rng.below(8));
    cfg.init_range = 0.5;
    cfg.seed = rng.next();
    LMModel m = make_lm(chords, cfg);
    Corpus c;
    for (int s = 0; s < 4; ++s) {
      std::vector<std::string> song;
      for (std::size_t k = 0; k < 2 + rng.below(10); ++k) song.push_back(tokens[rng.below(tokens.size())]);
      c.songs.push_back(testutil::song("s" + std::to_string(s), song));
    }
    const Perplexity p = perplexity(m, c);
    worst_identity = std::max(worst_identity, std::abs(p.ppl - std::exp(p.mean_loss)));
    worst_oracle = std::max(worst_oracle, std::abs(p.mean_loss - oracle_mean_loss(m, c)));

    // Equal decoder weights and biases make every next token equally likely.
    m.dec_w.setConstant(0.0);
    m.dec_b.setConstant(rng.normal());
    const double ln_v = std::log(static_cast<double>(m.vocab.size()));
    worst_uniform = std::max(worst_uniform, std::abs(perplexity(m, c).mean_loss - ln_v));
  }
  o.require(worst_identity <= 1e-12, "|ppl - exp(loss)| max " + fmt("%.1e", worst_identity));
  o.require(worst_oracle <= 1e-12, "|loss - independent log-softmax loss| max " + fmt("%.1e", worst_oracle));
  o.require(worst_uniform <= 1e-9, "uniform model |loss - ln|V|| max " + fmt("%.1e", worst_uniform));
  return o;
}

// ---- 3: memorization ---------------------------------------------------------

Outcome criterion_memorization() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const LMModel m = testutil::memorized_model();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ppl = perplexity(m, testutil::loop_corpus(10, "v")).ppl;
  const auto next = predict_next(m, {"C", "G", "Am"}, 1);
  o.require(ppl < 1.2, "validation PPL " + fmt("%.4f", ppl));
  o.require(!next.empty() && next[0].first == "F" && next[0].second > 0.9,
            "top-1 after C G Am: " + (next.empty() ? std::string("none") : next[0].first + fmt(" p=%.4f", next[0].second)));
  o.require(secs < 60, "40 epochs in " + fmt("%.1f s", secs));
  return o;
}

// ---- 4: circle of fifths -----------------------------------------------------

struct CalibrationRow {
  double mean_fifth, mean_random, gap, stderr_;
  int top5;
};

CalibrationRow calibration_fixture() {
  std::ifstream in(std::string(CHORDVEC_FIXTURES) + "/fifths_calibration.tsv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int cs = 0, es = 0;
    CalibrationRow r{};
    ss >> cs >> es >> r.mean_fifth >> r.mean_random >> r.gap >> r.stderr_ >> r.top5;
    return r;
  }
  throw IoError("missing calibration fixture");
}

Outcome criterion_fifths() {
  Outcome o;
  const Corpus c = generate_synthetic_corpus(42, 5000);
  EmbeddingConfig ec;
  ec.mode = EmbeddingMode::skipgram;
  ec.dim = 50;
  ec.window = 5;
  ec.epochs = 5;
  ec.seed = 1;
  const EmbeddingMatrix e = train_embeddings(c, build_vocab(c), ec);
  const FifthScore f = fifth_chain_score(e, Quality::major);
  int top5 = 0;
  for (const auto& p : relative_pair_report(e).pairs) top5 += p.neighbor_rank >= 1 && p.neighbor_rank <= 5;
  const CalibrationRow cal = calibration_fixture();
  o.require(f.gap > 0, "major fifth gap " + fmt("%.4f", f.gap));
  o.require(f.gap >= 3 * f.random_stderr, "gap / random-pair stderr = " + fmt("%.2f", f.gap / f.random_stderr));
  o.require(top5 >= 8, "relative minor in top 5 for " + std::to_string(top5) + "/12 major roots");
  o.require(std::abs(f.gap - cal.gap) < 1e-3 && std::abs(f.random_stderr - cal.stderr_) < 1e-3 && top5 == cal.top5,
            "matches committed calibration (gap " + fmt("%.4f", cal.gap) + ", top5 " + std::to_string(cal.top5) + ")");
  return o;
}

// ---- 5: power law -------------------------------------------------------------

Outcome criterion_power_law() {
  Outcome o;
  std::vector<std::pair<double, double>> exact;
  for (int r = 1; r <= 61; ++r) exact.emplace_back(r, 5000.0 * std::pow(r, -1.25));
  const PowerLawFit fit = fit_power_law(exact, 61);
  o.require(std::abs(fit.b + 1.25) < 1e-9, "exact ranks: |b + 1.25| = " + fmt("%.1e", std::abs(fit.b + 1.25)));
  const PowerLawFit syn = fit_power_law(song_frequency_ranks(generate_synthetic_corpus(42, 5000)), 61);
  o.require(syn.r_squared > 0.8, "synthetic corpus: b = " + fmt("%.3f", syn.b) + ", r^2 = " + fmt("%.4f", syn.r_squared));
  return o;
}

// ---- 6: metric fixtures ------------------------------------------------------

Outcome criterion_metrics() {
  Outcome o;
  using testutil::fixture;
  using testutil::fixture_preds;
  const auto ann = fixture();
  const auto preds = fixture_preds();
  auto exact = [&](double got, double want, const std::string& name) {
    o.require(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)), name + " " + fmt("%.6f", got));
  };
  exact(match_best(preds, ann, ExpertiseGroup::all), 200.0 / 3.0, "match_best");
  exact(match_oo4(preds, ann, ExpertiseGroup::all), 100.0, "match_oo4");
  const ModeMetrics mode = mode_metrics(preds, ann);
  exact(mode.mode_best, 100.0, "mode_best");
  exact(mode.mode_oo4, 100.0, "mode_oo4");
  o.require(mode.n_mode_examples == 1, "mode examples " + std::to_string(mode.n_mode_examples));
  exact(pitch_matches(preds, ann, ExpertiseGroup::all).pm_ave, 14.0 / 3.0, "pm_ave");
  exact(pairwise_agreement(ann), 100.0 / 6.0, "pairwise");
  exact(pairwise_pitch_agreement(ann), 400.0 / 9.0, "jaccard");

  std::vector<std::pair<std::vector<double>, std::vector<double>>> sets = {{testutil::kFig3X, testutil::kFig3Y}};
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    Rng rng(seed);
    std::vector<double> x(9), y(9);
    for (int i = 0; i < 9; ++i) {
      x[i] = rng.normal();
      y[i] = 0.8 * x[i] + 0.6 * rng.normal();
    }
    sets.emplace_back(x, y);
  }
  double worst_p = 0, worst_s = 0;
  for (const auto& [x, y] : sets) {
    worst_p = std::max(worst_p, std::abs(pearson(x, y).p - testutil::exact_permutation_p(x, y)));
    const double exact_s = testutil::exact_permutation_p(testutil::brute_ranks(x), testutil::brute_ranks(y));
    worst_s = std::max(worst_s, std::abs(spearman(x, y).p - exact_s));
  }
  o.require(worst_p <= 0.01, "Pearson p vs 9! permutations, max diff " + fmt("%.4f", worst_p));
  o.require(worst_s <= 0.01, "Spearman p vs 9! permutations, max diff " + fmt("%.4f", worst_s));
  return o;
}

// ---- 7: classifier signal ------------------------------------------------------

Outcome criterion_classifiers() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticConfig cfg;
  cfg.labels = QualitySkew{};
  cfg.labels->skew = 0.7;
  const Corpus labelled = generate_synthetic_corpus(2024, 4000, cfg);
  const double bayes = oracle::bayes_accuracy(labelled, cfg);
  o.require(std::abs(bayes - 0.65) < 0.02, "Bayes accuracy of the corpus " + fmt("%.4f", bayes));

  const Corpus unlabeled = generate_synthetic_corpus(4048, 5000);
  const Vocabulary vocab = build_vocab(unlabeled);
  EmbeddingConfig ec;
  ec.dim = 32;
  ec.seed = 5;
  const EmbeddingMatrix sglm = train_embeddings(unlabeled, vocab, ec);

  const AttributeData data = attribute_data(labelled, "gender", 1);
  AttributeData shuffled = data;
  Rng rng(99);
  rng.shuffle(shuffled.labels.begin(), shuffled.labels.end());

  const CvResult lr = cv_lr(data, Scheme::boc_count, vocab, nullptr, LRConfig{}, 10, 1);
  const CvResult lr_ctl = cv_lr(shuffled, Scheme::boc_count, vocab, nullptr, LRConfig{}, 10, 1);
  CnnConfig cc;
  cc.init = EncoderInit::CE_sglm;
  cc.epochs = 10;
  const CvResult cnn = cv_cnn(data, vocab, cc, &sglm, 10, 1);
  const CvResult cnn_ctl = cv_cnn(shuffled, vocab, cc, &sglm, 10, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto report = [&](const std::string& name, const CvResult& real, const CvResult& control) {
    const TTest t = paired_t_test(real, control);
    o.require(real.mean > 0.55, name + " accuracy " + fmt("%.4f", real.mean));
    o.require(std::abs(control.mean - 0.5) <= 0.05, name + " shuffled control " + fmt("%.4f", control.mean));
    o.require(real.mean > control.mean && t.p < 0.05, name + " vs control paired-t p = " + fmt("%.2g", t.p));
  };
  report("LR(boc_count)", lr, lr_ctl);
  report("CNN(CE_sglm)", cnn, cnn_ctl);
  o.require(secs < 600, fmt("%.0f s", secs));
  return o;
}

// ---- 8: determinism ----------------------------------------------------------

std::string tensor_bytes(const std::vector<const Tensor*>& ts) {
  std::string out;
  for (const Tensor* t : ts) out.append(reinterpret_cast<const char*>(t->data()), sizeof(double) * static_cast<std::size_t>(t->size()));
  return out;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "chordvec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in;
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
}

Outcome criterion_determinism() {
  Outcome o;
  testutil::TempDir dir;
  SyntheticConfig scfg;
  scfg.labels = QualitySkew{};
  scfg.labels->skew = 1.0;
  const Corpus corpus = generate_synthetic_corpus(9, 300, scfg);
  const Vocabulary vocab = build_vocab(corpus);

  std::map<std::string, std::pair<std::string, std::string>> artifacts;
  for (int run = 0; run < 2; ++run) {
    auto put = [&](const std::string& name, std::string bytes) {
      (run == 0 ? artifacts[name].first : artifacts[name].second) = std::move(bytes);
    };
    const std::string tag = std::to_string(run);
    save_corpus(generate_synthetic_corpus(9, 300, scfg), dir.file("corpus" + tag));
    put("generate_synthetic_corpus", testutil::slurp(dir.file("corpus" + tag)));

    EmbeddingMatrix sg;
    for (EmbeddingMode mode : {EmbeddingMode::cbow, EmbeddingMode::skipgram}) {
      EmbeddingConfig ec;
      ec.mode = mode;
      ec.dim = 8;
      ec.epochs = 2;
      ec.seed = 3;
      const EmbeddingMatrix e = train_embeddings(corpus, vocab, ec);
      save_embeddings(e, dir.file("emb" + tag));
      put("train_embeddings " + std::string(mode_name(mode)), testutil::slurp(dir.file("emb" + tag)));
      sg = e;
    }

    LMConfig lc;
    lc.emb_dim = 8;
    lc.epochs = 2;
    lc.seq_len = 10;
    lc.seed = 4;
    const Split sp = split(corpus, 4);
    save_lm(lm_train(sp.train, sp.valid, vocab, lc), dir.file("lm" + tag));
    put("lm_train", testutil::slurp(dir.file("lm" + tag)));

    const AttributeData data = attribute_data(corpus, "gender", 2);
    CnnConfig cc;
    cc.init = EncoderInit::CE_sglm;
    cc.emb_dim = 8;
    cc.maps = 4;
    cc.epochs = 2;
    const CnnModel cnn = train_cnn(data.songs, data.labels, vocab, cc, &sg);
    std::vector<const Tensor*> ts;
    for (const auto& [name, t] : cnn.parameters()) ts.push_back(t);
    put("train_cnn", tensor_bytes(ts));

    const Matrix x = song_features(data.songs, Scheme::boc_count, vocab, Vector(), nullptr);
    const LRModel lr = train_lr(x, data.labels);
    const Tensor weights = lr.weights;
    put("train_lr", tensor_bytes({&weights}) + fmt("%.17g", lr.bias));

    const CvResult cv = cv_cnn(data, vocab, cc, &sg, 3, 5);
    std::string folds;
    for (double a : cv.per_fold_accuracy) folds += fmt("%.17g,", a);
    put("cv_cnn", folds);

    const std::string out = dir.file("cli" + tag);
    const std::string in = dir.file("corpus" + tag);
    const bool ok = cli({"--out-dir", out, "--seed", "6", "train-emb", "--input", in, "--output", out + "/e.txt", "--dim", "8",
                         "--epochs", "1"}) == 0 &&
                    cli({"--out-dir", out, "--seed", "6", "train-lm", "--input", in, "--output", out + "/lm.json",
                         "--emb-dim", "8", "--epochs", "2"}) == 0 &&
                    cli({"--out-dir", out, "--seed", "6", "classify", "--input", in, "--label", "gender", "--folds", "3",
                         "--lr-only"}) == 0;
    put("cli exit codes", ok ? "ok" : "");
    put("cli train-emb", testutil::slurp(out + "/e.txt"));
    put("cli train-lm", testutil::slurp(out + "/lm.json"));
    put("cli classify", testutil::slurp(out + "/classify_gender.csv"));
  }
  std::size_t identical = 0;
  for (const auto& [name, pair] : artifacts) {
    const bool same = !pair.first.empty() && pair.first == pair.second;
    identical += same;
    if (!same) o.require(false, name + " differs between identical runs");
  }
  o.require(identical == artifacts.size(),
            std::to_string(identical) + "/" + std::to_string(artifacts.size()) + " entry points byte-identical");
  return o;
}

// ---- 9: parser conformance ----------------------------------------------------

Outcome criterion_parser() {
  Outcome o;
  const auto rows = testutil::load_chord_table();
  std::map<std::string, const testutil::ChordRow*> table;
  for (const auto& r : rows) table[r.symbol] = &r;
  std::size_t mismatches = 0, palette_found = 0;
  for (const auto& row : rows) {
    try {
      const Chord c = parse_chord(row.symbol);
      bool ok = encode_pr(c)[4] == row.special;
      if (row.pitches) {
        std::vector<int> got;
        for (const auto& p : pitch_classes(c)) got.push_back(p.index());
        ok = ok && got == *row.pitches;
        ok = ok && parse_chord(to_symbol(c)) == c;
      } else {
        try {
          pitch_classes(c);
          ok = false;
        } catch (const UnknownChord&) {
        }
      }
      if (!ok) {
        ++mismatches;
        o.notes.push_back("mismatch " + row.symbol);
      }
    } catch (const std::exception& e) {
      ++mismatches;
      o.notes.push_back("error " + row.symbol + ": " + e.what());
    }
  }
  for (const auto& sym : annotation_palette()) {
    const auto it = table.find(sym);
    if (it == table.end() || !it->second->pitches) {
      ++mismatches;
      o.notes.push_back("palette chord missing from table " + sym);
      continue;
    }
    ++palette_found;
  }
  for (const char* required : {"G/B", "F#7", "E5", "Dsus4", "Bdim", "C*", "UNK", "H"}) {
    if (!table.count(required)) {
      ++mismatches;
      o.notes.push_back(std::string("table lacks ") + required);
    }
  }
  o.require(rows.size() >= 200, std::to_string(rows.size()) + " table symbols");
  o.require(palette_found == 48, std::to_string(palette_found) + "/48 palette chords checked");
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suites", criterion_gradients},
      {"perplexity identity", criterion_perplexity},
      {"memorization", criterion_memorization},
      {"circle-of-fifths recovery", criterion_fifths},
      {"power-law fit", criterion_power_law},
      {"metric fixtures", criterion_metrics},
      {"classifier signal", criterion_classifiers},
      {"determinism", criterion_determinism},
      {"parser conformance", criterion_parser},
  };
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) {
    const long n = std::strtol(argv[a], nullptr, 10);
    if (n < 1 || n > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance_test [criterion 1-%zu ...]\n", criteria.size());
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(n - 1));
  }
  if (selected.empty()) {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  }
  int failed = 0;
  for (std::size_t i : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s criterion %zu (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(selected.size()) - failed, selected.size());
  return failed == 0 ? 0 : 1;
}
