#include "chordvec/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>

namespace chordvec {

namespace {

std::optional<Chord> try_parse(const std::string& token) {
  try {
    return parse_chord(token);
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

Vector row_of(const EmbeddingMatrix& m, std::size_t i) {
  return m.input.row(static_cast<Eigen::Index>(i)).transpose();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::pair<std::string, std::string> resolve_classes(const Corpus& corpus, const std::string& label,
                                                    const std::optional<std::pair<std::string, std::string>>& c) {
  return c ? *c : top_two_classes(corpus, label);
}

}  // namespace

Projection2D pca_project(const Matrix& x, std::vector<std::string> tokens) {
  if (x.rows() < 1 || x.cols() < 2) throw ConfigError("PCA needs at least one row and two columns");
  if (tokens.size() != static_cast<std::size_t>(x.rows())) throw ConfigError("token count does not match rows");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centred = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(std::max<Eigen::Index>(1, x.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Vector evals = solver.eigenvalues();  // ascending
  const Eigen::Index d = evals.size();
  const double total = std::max(evals.cwiseMax(0.0).sum(), 0.0);

  Projection2D p;
  p.tokens = std::move(tokens);
  p.axes.resize(x.cols(), 2);
  for (int k = 0; k < 2; ++k) {
    Vector axis = solver.eigenvectors().col(d - 1 - k);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    p.axes.col(k) = axis;
    p.explained_variance[static_cast<std::size_t>(k)] = total > 0 ? std::max(evals(d - 1 - k), 0.0) / total : 0.0;
  }
  p.points = centred * p.axes;
  return p;
}

Projection2D pca_project(const EmbeddingMatrix& m) { return pca_project(m.input, m.vocab.tokens()); }

std::optional<std::size_t> canonical_token(const Vocabulary& vocab, PitchClass root, Quality quality) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto c = try_parse(vocab.token(i));
    if (!c || c->special != Special::none || c->extension || c->bass) continue;
    if (c->root == root && c->quality == quality) return i;
  }
  return std::nullopt;
}

FifthScore fifth_chain_score(const EmbeddingMatrix& m, Quality quality) {
  std::map<int, std::size_t> by_root;
  for (int r = 1; r <= 12; ++r) {
    if (const auto t = canonical_token(m.vocab, PitchClass(r), quality)) by_root[r] = *t;
  }
  FifthScore s;
  double fifth_sum = 0;
  std::vector<double> random;
  for (const auto& [ra, ia] : by_root) {
    for (const auto& [rb, ib] : by_root) {
      if (rb <= ra) continue;
      const double c = cosine(row_of(m, ia), row_of(m, ib));
      const bool fifth = fifth_of(PitchClass(ra)) == PitchClass(rb) || fifth_of(PitchClass(rb)) == PitchClass(ra);
      if (fifth) {
        fifth_sum += c;
        ++s.n_fifth;
      } else {
        random.push_back(c);
      }
    }
  }
  s.n_random = random.size();
  if (s.n_fifth) s.mean_fifth = fifth_sum / static_cast<double>(s.n_fifth);
  if (!random.empty()) {
    double sum = 0;
    for (double c : random) sum += c;
    s.mean_random = sum / static_cast<double>(random.size());
    if (random.size() > 1) {
      double ss = 0;
      for (double c : random) ss += (c - s.mean_random) * (c - s.mean_random);
      const double sd = std::sqrt(ss / static_cast<double>(random.size() - 1));
      s.random_stderr = sd / std::sqrt(static_cast<double>(random.size()));
    }
  }
  s.gap = s.mean_fifth - s.mean_random;
  return s;
}

RelativeReport relative_pair_report(const EmbeddingMatrix& m) {
  RelativeReport report;
  for (int r = 1; r <= 12; ++r) {
    const auto major = canonical_token(m.vocab, PitchClass(r), Quality::major);
    if (!major) continue;
    const PitchClass rel = relative_minor_root(PitchClass(r));
    const auto minor = canonical_token(m.vocab, rel, Quality::minor);
    if (!minor) {
      report.notes.push_back("no minor chord on " + pitch_name(rel, false) + " for " + m.vocab.token(*major));
      continue;
    }
    RelativePair p;
    p.major = m.vocab.token(*major);
    p.minor = m.vocab.token(*minor);
    p.cosine = cosine(row_of(m, *major), row_of(m, *minor));
    const auto ranked = nearest(m, p.major, m.vocab.size());
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      if (ranked[k].first == p.minor) {
        p.neighbor_rank = k + 1;
        break;
      }
    }
    report.pairs.push_back(p);
  }
  return report;
}

std::vector<EnharmonicPair> enharmonic_report(const EmbeddingMatrix& m) {
  std::vector<EnharmonicPair> out;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    const auto c = try_parse(m.vocab.token(i));
    if (!c || c->special == Special::unk || c->root_spelling != Spelling::sharp) continue;
    Chord flat = *c;
    flat.prefer_flats = true;
    flat.root_spelling = Spelling::flat;
    const std::string name = to_symbol(flat);
    const auto j = m.vocab.find(name);
    if (!j || *j == i) continue;
    out.push_back({m.vocab.token(i), name, cosine(row_of(m, i), row_of(m, *j))});
  }
  return out;
}

double signed_ratio(double rate_a, double rate_b) {
  if (rate_a <= 0 || rate_b <= 0) throw ConfigError("salience rates must be positive");
  return rate_a >= rate_b ? rate_a / rate_b - 1.0 : -(rate_b / rate_a - 1.0);
}

SalienceReport chord_salience(const Corpus& corpus, const std::string& label,
                              std::optional<std::pair<std::string, std::string>> classes) {
  const auto [ca, cb] = resolve_classes(corpus, label, classes);
  std::map<std::string, std::pair<double, double>> df;
  double na = 0, nb = 0;
  for (const auto& s : corpus.songs) {
    const auto it = s.labels.find(label);
    if (it == s.labels.end() || (it->second != ca && it->second != cb)) continue;
    const bool is_a = it->second == ca;
    (is_a ? na : nb) += 1.0;
    for (const auto& tok : std::set<std::string>(s.chords.begin(), s.chords.end())) {
      auto& e = df[tok];
      (is_a ? e.first : e.second) += 1.0;
    }
  }
  if (na == 0 || nb == 0) throw ConfigError("both classes need at least one song");
  SalienceReport r{label, ca, cb, {}};
  const double eps_a = 1.0 / (na + 1.0), eps_b = 1.0 / (nb + 1.0);
  for (const auto& [tok, counts] : df) {
    SalienceEntry e;
    e.key = tok;
    e.rate_a = counts.first > 0 ? counts.first / na : eps_a;
    e.rate_b = counts.second > 0 ? counts.second / nb : eps_b;
    e.ratio = signed_ratio(e.rate_a, e.rate_b);
    r.entries.push_back(e);
  }
  std::stable_sort(r.entries.begin(), r.entries.end(), [&](const SalienceEntry& x, const SalienceEntry& y) {
    return df[x.key].first + df[x.key].second > df[y.key].first + df[y.key].second;
  });
  return r;
}

SalienceReport quality_salience(const Corpus& corpus, const std::string& label,
                                std::optional<std::pair<std::string, std::string>> classes) {
  const auto [ca, cb] = resolve_classes(corpus, label, classes);
  static const QualityClass kShown[] = {QualityClass::augmented, QualityClass::minor, QualityClass::major,
                                        QualityClass::suspended, QualityClass::diminished};
  std::map<QualityClass, std::pair<double, double>> counts;
  double ta = 0, tb = 0;
  for (const auto& s : corpus.songs) {
    const auto it = s.labels.find(label);
    if (it == s.labels.end() || (it->second != ca && it->second != cb)) continue;
    const bool is_a = it->second == ca;
    for (const auto& tok : s.chords) {
      const auto c = try_parse(tok);
      if (!c || c->special == Special::unk || c->special == Special::hammer_on ||
          c->special == Special::hammer_on_minor) {
        continue;
      }
      auto& e = counts[quality_class(*c)];
      (is_a ? e.first : e.second) += 1.0;
      (is_a ? ta : tb) += 1.0;
    }
  }
  if (ta == 0 || tb == 0) throw ConfigError("both classes need at least one pitched chord");
  SalienceReport r{label, ca, cb, {}};
  for (QualityClass q : kShown) {
    SalienceEntry e;
    e.key = std::string(quality_class_name(q));
    e.rate_a = counts[q].first > 0 ? counts[q].first / ta : 1.0 / (ta + 1.0);
    e.rate_b = counts[q].second > 0 ? counts[q].second / tb : 1.0 / (tb + 1.0);
    e.ratio = signed_ratio(e.rate_a, e.rate_b);
    r.entries.push_back(e);
  }
  return r;
}

void write_projection_csv(const Projection2D& p, const std::string& path) {
  auto out = open_out(path);
  out << "token,x,y\n";
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    out << p.tokens[i] << ',' << fmt(p.points(static_cast<Eigen::Index>(i), 0)) << ','
        << fmt(p.points(static_cast<Eigen::Index>(i), 1)) << '\n';
  }
  out << "# explained_variance," << fmt(p.explained_variance[0]) << ',' << fmt(p.explained_variance[1]) << '\n';
}

void write_projection_svg(const Projection2D& p, const std::string& path) {
  auto out = open_out(path);
  const double w = 800, h = 600, pad = 40;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  if (p.points.rows() > 0) {
    x0 = p.points.col(0).minCoeff();
    x1 = p.points.col(0).maxCoeff();
    y0 = p.points.col(1).minCoeff();
    y1 = p.points.col(1).maxCoeff();
  }
  const double sx = x1 > x0 ? (w - 2 * pad) / (x1 - x0) : 1.0;
  const double sy = y1 > y0 ? (h - 2 * pad) / (y1 - y0) : 1.0;
  auto colour = [](const std::string& tok) -> const char* {
    const auto c = try_parse(tok);
    if (!c || c->special == Special::unk) return "#888888";
    switch (quality_class(*c)) {
      case QualityClass::major: return "#1f77b4";
      case QualityClass::minor: return "#d62728";
      case QualityClass::augmented: return "#9467bd";
      case QualityClass::diminished: return "#2ca02c";
      case QualityClass::suspended: return "#ff7f0e";
      case QualityClass::power: return "#8c564b";
      default: return "#888888";
    }
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-size=\"10\">\n";
  out << "<text x=\"" << pad << "\" y=\"20\">PC1 " << fmt(100 * p.explained_variance[0]) << "%, PC2 "
      << fmt(100 * p.explained_variance[1]) << "%</text>\n";
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double cx = pad + (p.points(r, 0) - x0) * sx;
    const double cy = h - pad - (p.points(r, 1) - y0) * sy;
    std::string label = p.tokens[i];
    for (std::size_t k = 0; k < label.size(); ++k) {
      if (label[k] == '&' || label[k] == '<') label.replace(k, 1, label[k] == '&' ? "&amp;" : "&lt;");
    }
    out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"3\" fill=\"" << colour(p.tokens[i])
        << "\"/><text x=\"" << fmt(cx + 4) << "\" y=\"" << fmt(cy - 4) << "\">" << label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_fifth_csv(const FifthScore& s, const std::string& quality, const std::string& path) {
  auto out = open_out(path);
  out << "quality,mean_fifth,mean_random,gap,random_stderr,n_fifth,n_random\n";
  out << quality << ',' << fmt(s.mean_fifth) << ',' << fmt(s.mean_random) << ',' << fmt(s.gap) << ','
      << fmt(s.random_stderr) << ',' << s.n_fifth << ',' << s.n_random << '\n';
}

void write_relative_csv(const RelativeReport& r, const std::string& path) {
  auto out = open_out(path);
  out << "major,minor,cosine,neighbor_rank\n";
  for (const auto& p : r.pairs) out << p.major << ',' << p.minor << ',' << fmt(p.cosine) << ',' << p.neighbor_rank << '\n';
  for (const auto& n : r.notes) out << "# " << n << '\n';
}

void write_enharmonic_csv(const std::vector<EnharmonicPair>& r, const std::string& path) {
  auto out = open_out(path);
  out << "sharp,flat,cosine\n";
  for (const auto& p : r) out << p.sharp << ',' << p.flat << ',' << fmt(p.cosine) << '\n';
}

void write_salience_csv(const SalienceReport& r, const std::string& path) {
  auto out = open_out(path);
  out << "key,rate_" << r.class_a << ",rate_" << r.class_b << ",ratio\n";
  for (const auto& e : r.entries) out << e.key << ',' << fmt(e.rate_a) << ',' << fmt(e.rate_b) << ',' << fmt(e.ratio) << '\n';
}

}  // namespace chordvec
