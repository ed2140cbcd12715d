#include "chordvec/corpus.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_set>

#include "chordvec/chord.h"

namespace chordvec {

using nlohmann::json;

Vocabulary::Vocabulary() {
  tokens_.emplace_back(kUnkToken);
  df_.push_back(0);
  index_.emplace(std::string(kUnkToken), 0);
}

Vocabulary Vocabulary::from_df(const std::vector<std::pair<std::string, std::size_t>>& df, std::size_t unk_df,
                               std::size_t n_songs) {
  auto sorted = df;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  Vocabulary v;
  v.df_[0] = unk_df;
  v.n_songs_ = n_songs;
  for (const auto& [tok, count] : sorted) {
    if (tok == kUnkToken) continue;
    v.index_.emplace(tok, v.tokens_.size());
    v.tokens_.push_back(tok);
    v.df_.push_back(count);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  v.tokens_.clear();
  v.df_.clear();
  v.index_.clear();
  for (const auto& t : tokens) {
    if (v.index_.count(t)) throw Error("duplicate vocabulary token: " + t);
    v.index_.emplace(t, v.tokens_.size());
    v.tokens_.push_back(t);
    v.df_.push_back(0);
  }
  if (!v.index_.count(std::string(kUnkToken))) {
    v.index_.emplace(std::string(kUnkToken), v.tokens_.size());
    v.tokens_.emplace_back(kUnkToken);
    v.df_.push_back(0);
  }
  v.unk_index_ = v.index_.at(std::string(kUnkToken));
  return v;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_or_unk(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? unk_index_ : it->second;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

std::vector<std::size_t> to_indices(const Song& song, const Vocabulary& vocab) {
  std::vector<std::size_t> out;
  out.reserve(song.chords.size());
  for (const auto& c : song.chords) out.push_back(vocab.index_or_unk(c));
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

Labels parse_labels(const json& j, std::size_t line_no) {
  Labels labels;
  if (j.is_null()) return labels;
  if (!j.is_object()) throw FormatError(line_no, "\"labels\" must be an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_null()) continue;
    if (!v.is_string()) throw FormatError(line_no, "label \"" + k + "\" must be a string");
    labels[k] = v.get<std::string>();
  }
  return labels;
}

}  // namespace

Song song_from_json_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError(line_no, "record must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw FormatError(line_no, "missing string field \"id\"");
  if (!j.contains("chords") || !j["chords"].is_array()) throw FormatError(line_no, "missing array field \"chords\"");
  Song s;
  s.id = j["id"].get<std::string>();
  for (const auto& c : j["chords"]) {
    if (!c.is_string()) throw FormatError(line_no, "chord tokens must be strings");
    s.chords.push_back(c.get<std::string>());
  }
  if (j.contains("artist") && !j["artist"].is_null()) {
    if (!j["artist"].is_string()) throw FormatError(line_no, "\"artist\" must be a string or null");
    s.artist_id = j["artist"].get<std::string>();
  }
  if (j.contains("title") && !j["title"].is_null()) {
    if (!j["title"].is_string()) throw FormatError(line_no, "\"title\" must be a string or null");
    s.title = j["title"].get<std::string>();
  }
  if (j.contains("labels")) s.labels = parse_labels(j["labels"], line_no);
  return s;
}

std::string song_to_json_line(const Song& song) {
  json j;
  j["id"] = song.id;
  j["artist"] = song.artist_id ? json(*song.artist_id) : json(nullptr);
  if (song.title) j["title"] = *song.title;
  j["chords"] = song.chords;
  j["labels"] = json::object();
  for (const auto& [k, v] : song.labels) j["labels"][k] = v;
  return j.dump();
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.provenance = path;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Song s = song_from_json_line(line, line_no);
    if (!ids.insert(s.id).second) throw FormatError(line_no, "duplicate song id \"" + s.id + "\"");
    for (auto& tok : s.chords) {
      tok = trim(tok);
      try {
        parse_chord(tok);
      } catch (const ParseError& e) {
        spdlog::warn("song {}: replacing unparseable chord '{}' with UNK ({})", s.id, tok, e.what());
        tok = std::string(kUnkToken);
      }
    }
    corpus.songs.push_back(std::move(s));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& s : corpus.songs) out << song_to_json_line(s) << '\n';
}

namespace {

using GramSet = std::set<std::string>;

GramSet trigrams(const std::vector<std::string>& chords) {
  GramSet out;
  if (chords.empty()) return out;
  auto join = [&](std::size_t from, std::size_t n) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) g += '\x1f';
      g += chords[from + k];
    }
    return g;
  };
  if (chords.size() < 3) {
    out.insert(join(0, chords.size()));
    return out;
  }
  for (std::size_t i = 0; i + 3 <= chords.size(); ++i) out.insert(join(i, 3));
  return out;
}

std::string normalize_key(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  }
  return out;
}

}  // namespace

double trigram_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const GramSet ga = trigrams(a), gb = trigrams(b);
  if (ga.empty() && gb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& g : ga) inter += gb.count(g);
  return static_cast<double>(inter) / static_cast<double>(ga.size() + gb.size() - inter);
}

DedupResult dedup(const Corpus& corpus, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("dedup threshold must be in (0, 1]");
  const std::size_t n = corpus.songs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return corpus.songs[x].id < corpus.songs[y].id; });

  std::vector<GramSet> grams(n);
  std::unordered_map<std::string, std::vector<std::size_t>> postings;
  std::unordered_set<std::string> seen_titles;
  std::vector<bool> keep(n, false);
  std::size_t removed = 0;

  for (std::size_t idx : order) {
    const Song& s = corpus.songs[idx];
    grams[idx] = trigrams(s.chords);
    std::string title_key;
    if (s.artist_id && s.title) title_key = normalize_key(*s.artist_id) + "\x1f" + normalize_key(*s.title);

    bool duplicate = !title_key.empty() && seen_titles.count(title_key);
    if (!duplicate && !grams[idx].empty()) {
      std::unordered_map<std::size_t, std::size_t> overlap;
      for (const auto& g : grams[idx]) {
        const auto it = postings.find(g);
        if (it == postings.end()) continue;
        for (std::size_t other : it->second) ++overlap[other];
      }
      for (const auto& [other, inter] : overlap) {
        const double j = static_cast<double>(inter) /
                         static_cast<double>(grams[idx].size() + grams[other].size() - inter);
        if (j >= threshold) {
          duplicate = true;
          break;
        }
      }
    }
    if (duplicate) {
      ++removed;
      continue;
    }
    keep[idx] = true;
    if (!title_key.empty()) seen_titles.insert(title_key);
    for (const auto& g : grams[idx]) postings[g].push_back(idx);
  }

  DedupResult result;
  result.corpus.provenance = corpus.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) result.corpus.songs.push_back(corpus.songs[i]);
  }
  result.removed = removed;
  return result;
}

Corpus filter_min_chords(const Corpus& corpus, std::size_t min_chords) {
  Corpus out;
  out.provenance = corpus.provenance;
  for (const auto& s : corpus.songs) {
    if (s.chords.size() >= min_chords) out.songs.push_back(s);
  }
  return out;
}

namespace {

std::unordered_map<std::string, std::size_t> document_frequencies(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& s : corpus.songs) {
    std::unordered_set<std::string> seen(s.chords.begin(), s.chords.end());
    for (const auto& t : seen) ++df[t];
  }
  return df;
}

}  // namespace

Vocabulary build_vocab(const Corpus& corpus, double df_threshold) {
  const auto df = document_frequencies(corpus);
  const double n = static_cast<double>(corpus.size());
  std::unordered_set<std::string> kept;
  std::vector<std::pair<std::string, std::size_t>> kept_df;
  for (const auto& [tok, count] : df) {
    if (tok == kUnkToken) continue;
    if (n > 0 && static_cast<double>(count) / n >= df_threshold) {
      kept.insert(tok);
      kept_df.emplace_back(tok, count);
    }
  }
  std::size_t unk_df = 0;
  for (const auto& s : corpus.songs) {
    for (const auto& t : s.chords) {
      if (!kept.count(t)) {
        ++unk_df;
        break;
      }
    }
  }
  return Vocabulary::from_df(kept_df, unk_df, corpus.size());
}

std::vector<std::pair<std::string, std::size_t>> song_frequency_ranks(const Corpus& corpus) {
  const auto df = document_frequencies(corpus);
  std::vector<std::pair<std::string, std::size_t>> out(df.begin(), df.end());
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  return out;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& rank_df, std::size_t top_k) {
  const std::size_t n = std::min(top_k, rank_df.size());
  if (n < 2) throw ConfigError("power-law fit needs at least two points");
  double mx = 0, my = 0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rank_df[i].first <= 0 || rank_df[i].second <= 0) throw ConfigError("power-law fit needs positive values");
    xs[i] = std::log(rank_df[i].first);
    ys[i] = std::log(rank_df[i].second);
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw ConfigError("power-law fit needs distinct ranks");
  PowerLawFit fit;
  fit.points = n;
  fit.b = sxy / sxx;
  fit.a = std::exp(my - fit.b * mx);
  if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) {
    fit.degenerate = true;
    fit.b = 0.0;
    fit.a = rank_df.front().second;
    fit.r_squared = 0.0;
    return fit;
  }
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (std::log(fit.a) + fit.b * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

PowerLawFit fit_power_law(const std::vector<std::pair<std::string, std::size_t>>& ranks, std::size_t top_k) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    pts.emplace_back(static_cast<double>(i + 1), static_cast<double>(ranks[i].second));
  }
  return fit_power_law(pts, top_k);
}

Split split(const Corpus& corpus, std::uint64_t seed, double train, double valid, double test) {
  if (train < 0 || valid < 0 || test < 0 || std::abs(train + valid + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = corpus.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * valid));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test));
  const std::size_t n_train = n - n_valid - n_test;
  Split out;
  out.train.provenance = out.valid.provenance = out.test.provenance = corpus.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    Corpus& dest = i < n_train ? out.train : (i < n_train + n_valid ? out.valid : out.test);
    dest.songs.push_back(corpus.songs[idx[i]]);
  }
  return out;
}

Corpus join_metadata(const Corpus& corpus, const std::string& metadata_path) {
  std::ifstream in(metadata_path);
  if (!in) throw IoError("cannot open metadata file: " + metadata_path);
  std::unordered_map<std::string, Labels> by_artist;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("artist") || !j["artist"].is_string()) {
      throw FormatError(line_no, "metadata record needs a string \"artist\"");
    }
    const auto artist = j["artist"].get<std::string>();
    Labels labels = j.contains("labels") ? parse_labels(j["labels"], line_no) : Labels{};
    const auto [it, inserted] = by_artist.emplace(artist, labels);
    if (!inserted && it->second != labels) {
      throw FormatError(line_no, "conflicting metadata rows for artist \"" + artist + "\"");
    }
  }
  Corpus out = corpus;
  for (auto& s : out.songs) {
    if (!s.artist_id) continue;
    const auto it = by_artist.find(*s.artist_id);
    if (it == by_artist.end()) continue;
    for (const auto& [k, v] : it->second) s.labels[k] = v;
  }
  return out;
}

std::pair<std::string, std::string> top_two_classes(const Corpus& corpus, const std::string& label) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus.songs) {
    const auto it = s.labels.find(label);
    if (it != s.labels.end()) ++counts[it->second];
  }
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (sorted.size() < 2) throw ConfigError("label \"" + label + "\" has fewer than two classes");
  return {sorted[0].first, sorted[1].first};
}

Corpus balance_classes(const Corpus& corpus, const std::string& label, std::uint64_t seed) {
  const auto [first, second] = top_two_classes(corpus, label);
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < corpus.songs.size(); ++i) {
    const auto it = corpus.songs[i].labels.find(label);
    if (it == corpus.songs[i].labels.end()) continue;
    if (it->second == first) a.push_back(i);
    if (it->second == second) b.push_back(i);
  }
  const std::size_t m = std::min(a.size(), b.size());
  Rng rng(seed);
  rng.shuffle(a.begin(), a.end());
  rng.shuffle(b.begin(), b.end());
  std::vector<bool> keep(corpus.songs.size(), false);
  for (std::size_t i = 0; i < m; ++i) keep[a[i]] = keep[b[i]] = true;
  Corpus out;
  out.provenance = corpus.provenance;
  for (std::size_t i = 0; i < corpus.songs.size(); ++i) {
    if (keep[i]) out.songs.push_back(corpus.songs[i]);
  }
  return out;
}

}  // namespace chordvec
