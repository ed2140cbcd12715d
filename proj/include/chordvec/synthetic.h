// Synthetic diatonic corpus generator.
//
// Each song picks a key, then walks a first-order Markov chain over the seven
// diatonic triads whose mass sits on fifth-related and relative major/minor
// moves. Individual chords can be recoloured (sus4, aug, parallel minor,
// diminished); with a QualitySkew the recolouring rates differ per class.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "chordvec/chord.h"
#include "chordvec/corpus.h"

namespace chordvec {

inline constexpr int kDegrees = 7;

struct QualitySkew {
  std::string label = "gender";
  // Class A uses more suspended and diminished chords, class B more augmented
  // and minor ones, each by a factor (1 + skew).
  std::string class_a = "male";
  std::string class_b = "female";
  double skew = 0.0;
};

struct SyntheticConfig {
  std::size_t min_length = 8;
  std::size_t max_length = 32;
  // Relative key frequencies indexed by tonic semitone above C.
  std::array<double, 12> key_weights{8, 0.7, 8, 1.5, 5, 3, 1, 10, 1, 6, 2, 1.5};
  double p_sus = 0.05;    // major -> sus4
  double p_aug = 0.03;    // major -> aug
  double p_minor = 0.05;  // major -> parallel minor
  double p_dim = 0.05;    // minor -> dim
  std::optional<QualitySkew> labels;
};

struct RecolorRates {
  double sus, aug, minor, dim;
};

// Rates used for a song of the given class (class_index 0 = A, 1 = B);
// class_index < 0 means unlabeled.
RecolorRates recolor_rates(const SyntheticConfig& cfg, int class_index);

// Row-stochastic transition matrix over degrees I ii iii IV V vi vii.
const std::array<std::array<double, kDegrees>, kDegrees>& diatonic_transitions();
const std::array<double, kDegrees>& diatonic_start();
int degree_semitones(int degree);
Quality degree_quality(int degree);
bool key_prefers_flats(int tonic_semitone);

Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_songs, const SyntheticConfig& cfg = {});

}  // namespace chordvec
