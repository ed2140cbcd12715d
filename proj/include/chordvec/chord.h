// Chord symbols: parsing, pitch-class derivation and simple transformations.
//
// Pitch classes use the chromatic index C=1 ... B=12. The accepted symbol
// grammar is documented in docs/chord-grammar.md.

#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chordvec/common.h"

namespace chordvec {

class PitchClass {
 public:
  constexpr PitchClass() = default;
  explicit PitchClass(int index);

  // Wraps any integer semitone offset from C onto 1..12.
  static PitchClass from_semitone(int semitones_above_c);

  int index() const { return index_; }
  int semitone() const { return index_ - 1; }
  PitchClass shifted(int semitones) const { return from_semitone(semitone() + semitones); }

  auto operator<=>(const PitchClass&) const = default;

 private:
  int index_ = 1;
};

enum class Spelling { natural, sharp, flat };

enum class Quality { major, minor, augmented, diminished, suspended2, suspended4, power5, other };

enum class QualityClass { major, minor, augmented, diminished, suspended, power, other };

enum class Special { none, star, unk, hammer_on, hammer_on_minor };

struct Chord {
  PitchClass root;
  Spelling root_spelling = Spelling::natural;
  // Accidental style used when the chord is re-spelled after transposition.
  bool prefer_flats = false;
  Quality quality = Quality::major;
  // For quality=other: the triad recognised before the unknown suffix.
  Quality fallback_triad = Quality::major;
  std::optional<int> extension;  // semitones above the root
  std::optional<PitchClass> bass;
  Special special = Special::none;
  std::string raw;

  // Structural identity; the raw text is not compared.
  bool operator==(const Chord& other) const;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& reason)
      : Error("chord parse error at " + std::to_string(position) + ": " + reason),
        position_(position),
        reason_(reason) {}
  std::size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

class UnknownChord : public Error {
 public:
  UnknownChord() : Error("UNK chord has no pitch content") {}
};

using PitchRepr = std::array<int, 5>;

inline constexpr std::string_view kUnkToken = "UNK";

Chord parse_chord(std::string_view symbol);

// Triad (or dyad for power chords) in triad order, then the extension pitch.
// Slash chords are rotated so the bass leads; a bass outside the chord is
// prepended. Hammer-on tokens carry no pitches. Throws UnknownChord for UNK.
std::vector<PitchClass> pitch_classes(const Chord& chord);

PitchRepr encode_pr(const Chord& chord);

QualityClass quality_class(const Chord& chord);

PitchClass fifth_of(PitchClass p);
PitchClass relative_minor_root(PitchClass major_root);

Chord transpose(const Chord& chord, int semitones);

// Canonical text for a chord (used after transposition).
std::string to_symbol(const Chord& chord);

// Name of a pitch class in the requested accidental style.
std::string pitch_name(PitchClass p, bool prefer_flats);

// Same sounding chord regardless of spelling and of the '*' marker.
bool same_sound(const Chord& a, const Chord& b);

std::string_view quality_class_name(QualityClass q);

// Semitone offsets of the triad (or dyad) for a quality.
std::vector<int> triad_intervals(Quality q);

// The 48 annotation-palette chords: major, minor, dominant 7 and minor 7 on
// each of the 12 roots.
const std::vector<std::string>& annotation_palette();

// True when the chord is one of the palette shapes (any spelling).
bool in_palette(const Chord& chord);

}  // namespace chordvec
