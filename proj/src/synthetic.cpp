#include "chordvec/synthetic.h"

#include <cstdio>
#include <numeric>

namespace chordvec {

namespace {

constexpr std::array<int, kDegrees> kDegreeSemitones{0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, kDegrees> kRelative{5, 3, 4, 1, 2, 0, 0};

std::array<std::array<double, kDegrees>, kDegrees> build_transitions() {
  std::array<std::array<double, kDegrees>, kDegrees> t{};
  for (int d = 0; d < kDegrees; ++d) {
    for (int e = 0; e < kDegrees; ++e) {
      double w = 0.3;
      if (e == d) w = 0.1;
      if (e == kRelative[d]) w = 2.0;
      if (e == (d + 4) % kDegrees) w = 2.5;  // root up a fifth
      if (e == (d + 3) % kDegrees) w = 4.0;  // root down a fifth
      if (e == 6) w *= 0.3;                  // the diminished triad is rare
      t[d][e] = w;
    }
    const double sum = std::accumulate(t[d].begin(), t[d].end(), 0.0);
    for (auto& w : t[d]) w /= sum;
  }
  return t;
}

std::size_t sample_index(Rng& rng, const double* weights, std::size_t n) {
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += weights[i];
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < n; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return n - 1;
}

}  // namespace

const std::array<std::array<double, kDegrees>, kDegrees>& diatonic_transitions() {
  static const auto t = build_transitions();
  return t;
}

const std::array<double, kDegrees>& diatonic_start() {
  static const std::array<double, kDegrees> s{0.55, 0.05, 0.05, 0.15, 0.1, 0.1, 0.0};
  return s;
}

int degree_semitones(int degree) { return kDegreeSemitones.at(static_cast<std::size_t>(degree)); }

Quality degree_quality(int degree) {
  switch (degree) {
    case 0:
    case 3:
    case 4: return Quality::major;
    case 6: return Quality::diminished;
    default: return Quality::minor;
  }
}

bool key_prefers_flats(int tonic_semitone) {
  switch (((tonic_semitone % 12) + 12) % 12) {
    case 1:
    case 3:
    case 5:
    case 8:
    case 10: return true;
    default: return false;
  }
}

RecolorRates recolor_rates(const SyntheticConfig& cfg, int class_index) {
  RecolorRates r{cfg.p_sus, cfg.p_aug, cfg.p_minor, cfg.p_dim};
  if (!cfg.labels || class_index < 0) return r;
  const double f = 1.0 + cfg.labels->skew;
  if (class_index == 0) {
    r.sus *= f;
    r.dim *= f;
  } else {
    r.aug *= f;
    r.minor *= f;
  }
  return r;
}

Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_songs, const SyntheticConfig& cfg) {
  if (cfg.min_length == 0 || cfg.max_length < cfg.min_length) throw ConfigError("invalid song length range");
  const RecolorRates unlabeled = recolor_rates(cfg, -1);
  if (unlabeled.sus + unlabeled.aug + unlabeled.minor > 1.0) throw ConfigError("recolour rates exceed 1");

  Rng rng(seed);
  Corpus corpus;
  corpus.provenance = "synthetic:seed=" + std::to_string(seed);
  const auto& trans = diatonic_transitions();
  const auto& start = diatonic_start();

  for (std::size_t i = 0; i < n_songs; ++i) {
    Song song;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%07zu", i);
    song.id = id;
    int class_index = -1;
    if (cfg.labels) {
      class_index = static_cast<int>(i % 2);
      song.labels[cfg.labels->label] = class_index == 0 ? cfg.labels->class_a : cfg.labels->class_b;
    }
    const RecolorRates rates = recolor_rates(cfg, class_index);
    const int key = static_cast<int>(sample_index(rng, cfg.key_weights.data(), 12));
    const bool flats = key_prefers_flats(key);
    const std::size_t length = cfg.min_length + rng.below(cfg.max_length - cfg.min_length + 1);

    auto degree = static_cast<int>(sample_index(rng, start.data(), kDegrees));
    for (std::size_t t = 0; t < length; ++t) {
      Chord c;
      c.root = PitchClass::from_semitone(degree_semitones(degree));
      c.quality = degree_quality(degree);
      const double u = rng.uniform();
      if (c.quality == Quality::major) {
        if (u < rates.sus) {
          c.quality = Quality::suspended4;
        } else if (u < rates.sus + rates.aug) {
          c.quality = Quality::augmented;
        } else if (u < rates.sus + rates.aug + rates.minor) {
          c.quality = Quality::minor;
        }
      } else if (c.quality == Quality::minor && u < rates.dim) {
        c.quality = Quality::diminished;
      }
      c.prefer_flats = flats;
      song.chords.push_back(transpose(c, key).raw);
      degree = static_cast<int>(sample_index(rng, trans[static_cast<std::size_t>(degree)].data(), kDegrees));
    }
    corpus.songs.push_back(std::move(song));
  }
  return corpus;
}

}  // namespace chordvec
