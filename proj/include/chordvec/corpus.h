// Chord-progression corpora: loading, cleaning, vocabulary, statistics and
// splits.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chordvec/common.h"

namespace chordvec {

using Labels = std::map<std::string, std::string>;

struct Song {
  std::string id;
  std::vector<std::string> chords;
  std::optional<std::string> artist_id;
  std::optional<std::string> title;
  Labels labels;

  bool operator==(const Song&) const = default;
};

struct Corpus {
  std::vector<Song> songs;
  std::string provenance;

  std::size_t size() const { return songs.size(); }
  bool empty() const { return songs.empty(); }
};

class Vocabulary {
 public:
  Vocabulary();

  // Token order is UNK first, then by descending df, ties lexicographic.
  static Vocabulary from_df(const std::vector<std::pair<std::string, std::size_t>>& df, std::size_t unk_df,
                            std::size_t n_songs);
  // Plain token list, e.g. from an embedding file. Adds UNK if absent.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> find(const std::string& token) const;
  // Index of a token, or unk_index() for out-of-vocabulary tokens.
  std::size_t index_or_unk(const std::string& token) const;
  std::size_t unk_index() const { return unk_index_; }
  std::size_t df(std::size_t i) const { return i < df_.size() ? df_[i] : 0; }
  std::size_t n_songs() const { return n_songs_; }
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t unk_index_ = 0;
  std::size_t n_songs_ = 0;
};

struct PowerLawFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
  // Set when the log-df values have zero variance and r^2 is undefined.
  bool degenerate = false;
  std::size_t points = 0;
};

struct DedupResult {
  Corpus corpus;
  std::size_t removed = 0;
};

struct Split {
  Corpus train;
  Corpus valid;
  Corpus test;
};

// Line-delimited JSON. Unparseable chord tokens become UNK with a warning.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);
Song song_from_json_line(const std::string& line, std::size_t line_no);
std::string song_to_json_line(const Song& song);

// Jaccard similarity of chord-trigram sets.
double trigram_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);
DedupResult dedup(const Corpus& corpus, double threshold = 0.9);

Corpus filter_min_chords(const Corpus& corpus, std::size_t min_chords = 6);

Vocabulary build_vocab(const Corpus& corpus, double df_threshold = 0.001);

// Document frequency of every raw token, descending, ties lexicographic.
std::vector<std::pair<std::string, std::size_t>> song_frequency_ranks(const Corpus& corpus);

// Least squares of log(df) on log(rank) over the first top_k entries.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& rank_df, std::size_t top_k);
PowerLawFit fit_power_law(const std::vector<std::pair<std::string, std::size_t>>& ranks, std::size_t top_k);

Split split(const Corpus& corpus, std::uint64_t seed, double train = 0.8, double valid = 0.1, double test = 0.1);

// Attaches labels by artist id. Conflicting duplicate metadata rows throw.
Corpus join_metadata(const Corpus& corpus, const std::string& metadata_path);

// Keeps the two most frequent values of `label` and downsamples both to the
// smaller count. Songs without the label are dropped.
Corpus balance_classes(const Corpus& corpus, const std::string& label, std::uint64_t seed);

// The two most frequent values of a label (more frequent first; ties
// lexicographic).
std::pair<std::string, std::string> top_two_classes(const Corpus& corpus, const std::string& label);

// Song chords mapped through a vocabulary.
std::vector<std::size_t> to_indices(const Song& song, const Vocabulary& vocab);

}  // namespace chordvec
