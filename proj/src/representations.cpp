#include "chordvec/representations.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "chordvec/chord.h"

namespace chordvec {

SongVector boc_count(const Song& song, const Vocabulary& vocab) {
  SongVector v;
  v.scheme = Scheme::boc_count;
  v.values = Vector::Zero(static_cast<Eigen::Index>(vocab.size()));
  if (song.chords.empty()) return v;
  for (const auto& tok : song.chords) v.values(static_cast<Eigen::Index>(vocab.index_or_unk(tok))) += 1.0;
  v.values /= static_cast<double>(song.chords.size());
  return v;
}

Vector compute_idf(const Corpus& corpus, const Vocabulary& vocab) {
  if (corpus.empty()) throw EmptyCorpus();
  Vector df = Vector::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& s : corpus.songs) {
    std::set<std::size_t> seen;
    for (const auto& tok : s.chords) seen.insert(vocab.index_or_unk(tok));
    for (std::size_t i : seen) df(static_cast<Eigen::Index>(i)) += 1.0;
  }
  const double n = static_cast<double>(corpus.size());
  Vector idf(df.size());
  for (Eigen::Index i = 0; i < df.size(); ++i) idf(i) = df(i) > 0 ? std::log(n / df(i)) : 0.0;
  return idf;
}

SongVector boc_tfidf(const Song& song, const Vocabulary& vocab, const Vector& idf) {
  if (idf.size() != static_cast<Eigen::Index>(vocab.size())) throw ConfigError("idf length does not match vocabulary");
  SongVector v = boc_count(song, vocab);
  v.values = v.values.cwiseProduct(idf);
  v.scheme = Scheme::boc_tfidf;
  return v;
}

SongVector pr_aggregate(const Song& song) {
  SongVector v;
  v.scheme = Scheme::pr_agg;
  v.values = Vector::Zero(12);
  double total = 0;
  for (const auto& tok : song.chords) {
    const Chord c = parse_chord(tok);
    if (c.special == Special::unk) continue;
    for (const auto& p : pitch_classes(c)) {
      v.values(p.index() - 1) += 1.0;
      total += 1.0;
    }
  }
  if (total == 0) {
    spdlog::warn("song {} has no pitched chords; pitch vector is zero", song.id);
    return v;
  }
  v.values /= total;
  return v;
}

SongVector ce_maxpool(const Song& song, const EmbeddingMatrix& m) {
  SongVector v;
  v.scheme = Scheme::ce_maxpool;
  v.values = Vector::Zero(m.input.cols());
  bool first = true;
  for (const auto& tok : song.chords) {
    const auto row = m.input.row(static_cast<Eigen::Index>(m.vocab.index_or_unk(tok)));
    for (Eigen::Index d = 0; d < v.values.size(); ++d) {
      if (first || std::abs(row(d)) > std::abs(v.values(d))) v.values(d) = row(d);
    }
    first = false;
  }
  return v;
}

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::boc_count: return "boc_count";
    case Scheme::boc_tfidf: return "boc_tfidf";
    case Scheme::pr_agg: return "pr_agg";
    case Scheme::ce_maxpool: return "ce_maxpool";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::boc_count, Scheme::boc_tfidf, Scheme::pr_agg, Scheme::ce_maxpool}) {
    if (scheme_name(s) == name) return s;
  }
  throw ConfigError("unknown feature scheme: " + std::string(name));
}

void write_features_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<SongVector>& features) {
  if (ids.size() != features.size()) throw ConfigError("ids and features differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (Eigen::Index d = 0; d < features[i].values.size(); ++d) {
      std::snprintf(buf, sizeof(buf), ",%.9g", features[i].values(d));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace chordvec
