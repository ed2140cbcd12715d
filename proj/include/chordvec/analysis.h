// Diagnostics over an embedding space (PCA, circle of fifths, relative
// major/minor pairs, enharmonics) and class-wise chord usage salience.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "chordvec/chord.h"
#include "chordvec/common.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"

namespace chordvec {

struct Projection2D {
  std::vector<std::string> tokens;
  Matrix points;                            // n x 2
  std::array<double, 2> explained_variance{};  // fractions of total variance
  Matrix axes;                              // dim x 2, unit columns
};

// Rows are mean-centred and projected on the top two principal axes. Each
// axis is oriented so its largest-magnitude loading is positive.
Projection2D pca_project(const Matrix& x, std::vector<std::string> tokens);
Projection2D pca_project(const EmbeddingMatrix& m);

// The vocabulary token standing for (root, quality): the most frequent plain
// spelling (no extension, bass or marker), or nullopt.
std::optional<std::size_t> canonical_token(const Vocabulary& vocab, PitchClass root, Quality quality);

struct FifthScore {
  double mean_fifth = 0.0;
  double mean_random = 0.0;
  double gap = 0.0;
  double random_stderr = 0.0;
  std::size_t n_fifth = 0;
  std::size_t n_random = 0;
};

// Mean cosine over (root, fifth_of(root)) pairs of one quality versus all
// other same-quality pairs.
FifthScore fifth_chain_score(const EmbeddingMatrix& m, Quality quality);

struct RelativePair {
  std::string major, minor;
  double cosine = 0.0;
  std::size_t neighbor_rank = 0;  // 1-based rank of the minor among the major's neighbours
};

struct RelativeReport {
  std::vector<RelativePair> pairs;
  std::vector<std::string> notes;
};

RelativeReport relative_pair_report(const EmbeddingMatrix& m);

struct EnharmonicPair {
  std::string sharp, flat;
  double cosine = 0.0;
};

std::vector<EnharmonicPair> enharmonic_report(const EmbeddingMatrix& m);

struct SalienceEntry {
  std::string key;  // token or quality name
  double rate_a = 0.0, rate_b = 0.0;
  double ratio = 0.0;  // (higher / lower) - 1, negative when class b is higher
};

struct SalienceReport {
  std::string label, class_a, class_b;
  std::vector<SalienceEntry> entries;
};

double signed_ratio(double rate_a, double rate_b);

// Song-frequency rate per class with floor 1 / (class size + 1). Classes are
// the two most common values of `label`, or the given pair.
SalienceReport chord_salience(const Corpus& corpus, const std::string& label,
                              std::optional<std::pair<std::string, std::string>> classes = std::nullopt);

// Share of chord tokens of each quality class within each class of songs.
SalienceReport quality_salience(const Corpus& corpus, const std::string& label,
                                std::optional<std::pair<std::string, std::string>> classes = std::nullopt);

void write_projection_csv(const Projection2D& p, const std::string& path);
void write_projection_svg(const Projection2D& p, const std::string& path);
void write_fifth_csv(const FifthScore& s, const std::string& quality, const std::string& path);
void write_relative_csv(const RelativeReport& r, const std::string& path);
void write_enharmonic_csv(const std::vector<EnharmonicPair>& r, const std::string& path);
void write_salience_csv(const SalienceReport& r, const std::string& path);

}  // namespace chordvec
