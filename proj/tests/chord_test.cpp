#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "chordvec/chord.h"
#include "test_util.h"

using namespace chordvec;

namespace {

std::vector<int> pcs_of(const std::string& symbol) {
  std::vector<int> out;
  for (const auto& p : pitch_classes(parse_chord(symbol))) out.push_back(p.index());
  return out;
}

}  // namespace

TEST_CASE("parse_chord: plain and slash chords") {
  const Chord c = parse_chord("C");
  CHECK(c.root.index() == 1);
  CHECK(c.quality == Quality::major);
  CHECK_FALSE(c.extension.has_value());
  CHECK_FALSE(c.bass.has_value());

  const Chord gb = parse_chord("G/B");
  CHECK(gb.root.index() == 8);
  CHECK(gb.quality == Quality::major);
  REQUIRE(gb.bass.has_value());
  CHECK(gb.bass->index() == 12);

  const Chord f7 = parse_chord("F#7");
  CHECK(f7.root.index() == 7);
  CHECK(f7.root_spelling == Spelling::sharp);
  CHECK(f7.quality == Quality::major);
  CHECK(f7.extension == 10);
}

TEST_CASE("parse_chord: errors carry a position") {
  try {
    parse_chord("Xb9");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 0);
  }
  CHECK_THROWS_AS(parse_chord(""), ParseError);
  try {
    parse_chord("C##");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  try {
    parse_chord("Am?");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(parse_chord("C/X"), ParseError);
  CHECK_THROWS_AS(parse_chord("C/Em"), ParseError);
  CHECK_THROWS_AS(parse_chord("*"), ParseError);
}

TEST_CASE("parse_chord: unknown suffix degrades to quality other") {
  const Chord c = parse_chord("Cm7b5");
  CHECK(c.quality == Quality::other);
  CHECK(c.fallback_triad == Quality::minor);
  CHECK(pcs_of("Cm7b5") == std::vector<int>{1, 4, 8, 11});
  CHECK(quality_class(c) == QualityClass::other);
  CHECK(to_symbol(transpose(c, 2)) == "Dm7b5");
}

TEST_CASE("parse_chord: special tokens") {
  const Chord unk = parse_chord("UNK");
  CHECK(unk.special == Special::unk);
  CHECK_FALSE(unk.extension.has_value());
  CHECK_FALSE(unk.bass.has_value());
  CHECK_THROWS_AS(pitch_classes(unk), UnknownChord);
  CHECK(parse_chord("H").special == Special::hammer_on);
  CHECK(parse_chord("Hm").special == Special::hammer_on_minor);
  const Chord star = parse_chord("C*");
  CHECK(star.special == Special::star);
  CHECK(pcs_of("C*") == std::vector<int>{1, 5, 8});
}

TEST_CASE("pitch_classes: interval table") {
  CHECK(pcs_of("C") == std::vector<int>{1, 5, 8});
  CHECK(pcs_of("Am7") == std::vector<int>{10, 1, 5, 8});
  CHECK(pcs_of("Cdim7") == std::vector<int>{1, 4, 7, 10});
  CHECK(pcs_of("D7sus4") == std::vector<int>{3, 8, 10, 1});
  const auto cs_list = pcs_of("C#");
  std::set<int> sharp(cs_list.begin(), cs_list.end());
  const auto db_list = pcs_of("Db");
  std::set<int> flat(db_list.begin(), db_list.end());
  CHECK(sharp == flat);
  CHECK(flat == std::set<int>{2, 6, 9});
}

TEST_CASE("encode_pr") {
  CHECK(encode_pr(parse_chord("C")) == PitchRepr{1, 5, 8, 0, 0});
  CHECK(encode_pr(parse_chord("UNK")) == PitchRepr{0, 0, 0, 0, 2});
  CHECK(encode_pr(parse_chord("E5")) == PitchRepr{5, 12, 0, 0, 0});
  CHECK(encode_pr(parse_chord("Am7")) == PitchRepr{10, 1, 5, 8, 0});
  CHECK(encode_pr(parse_chord("G*")) == PitchRepr{8, 12, 3, 0, 1});
  CHECK(encode_pr(parse_chord("H")) == PitchRepr{0, 0, 0, 0, 3});
  CHECK(encode_pr(parse_chord("Hm")) == PitchRepr{0, 0, 0, 0, 4});
  // Non-chord-tone bass plus seventh: five pitches, the first four are kept.
  CHECK(encode_pr(parse_chord("Am7/B")) == PitchRepr{12, 10, 1, 5, 0});
}

TEST_CASE("quality_class") {
  CHECK(quality_class(parse_chord("Gsus4")) == QualityClass::suspended);
  CHECK(quality_class(parse_chord("Gsus2")) == QualityClass::suspended);
  CHECK(quality_class(parse_chord("Bdim")) == QualityClass::diminished);
  CHECK(quality_class(parse_chord("Am7")) == QualityClass::minor);
  CHECK(quality_class(parse_chord("G7")) == QualityClass::major);
  CHECK(quality_class(parse_chord("E5")) == QualityClass::power);
  CHECK(quality_class(parse_chord("Caug")) == QualityClass::augmented);
}

TEST_CASE("fifth_of and relative minor") {
  CHECK(fifth_of(PitchClass(1)) == PitchClass(8));
  CHECK(fifth_of(PitchClass(6)) == PitchClass(1));
  CHECK(relative_minor_root(PitchClass(1)) == PitchClass(10));
  CHECK(relative_minor_root(PitchClass(8)) == PitchClass(5));
  CHECK(relative_minor_root(PitchClass(10)) == PitchClass(7));
  for (int start = 1; start <= 12; ++start) {
    PitchClass p(start);
    std::set<int> orbit;
    for (int i = 0; i < 12; ++i) {
      orbit.insert(p.index());
      p = fifth_of(p);
    }
    CHECK(p == PitchClass(start));
    CHECK(orbit.size() == 12);
  }
}

TEST_CASE("transpose") {
  CHECK(to_symbol(transpose(parse_chord("C"), 7)) == "G");
  CHECK(transpose(parse_chord("Am"), 12) == parse_chord("Am"));
  const Chord a = transpose(parse_chord("G/B"), 2);
  CHECK(a.raw == "A/C#");
  auto shifted = pcs_of("G/B");
  for (auto& p : shifted) p = (p - 1 + 2) % 12 + 1;
  CHECK(pcs_of(a.raw) == shifted);
  CHECK(to_symbol(transpose(parse_chord("Bb"), 3)) == "Db");
  CHECK_THROWS_AS(PitchClass(13), Error);
}

TEST_CASE("property: transpose round trip and uniform pitch shift") {
  testutil::Gen gen(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::string sym = gen.chord_symbol();
    const Chord c = parse_chord(sym);
    const int k = static_cast<int>(gen.rng.below(25)) - 12;
    CHECK_MESSAGE(transpose(transpose(c, k), -k) == c, sym << " k=" << k);
    const auto before = pitch_classes(c);
    const auto after = pitch_classes(parse_chord(transpose(c, k).raw));
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i].shifted(k));
  }
}

TEST_CASE("property: parsing is pure and raw text round-trips") {
  testutil::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string sym = gen.chord_symbol();
    const Chord a = parse_chord(sym), b = parse_chord(sym);
    CHECK(a == b);
    CHECK(pitch_classes(parse_chord(a.raw)) == pitch_classes(a));
    CHECK(pitch_classes(parse_chord(to_symbol(a))) == pitch_classes(a));
  }
}

TEST_CASE("enharmonic pairs share pitch sets") {
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"C#", "Db"}, {"D#", "Eb"}, {"F#", "Gb"}, {"G#", "Ab"}, {"A#", "Bb"}};
  for (const auto& [s, f] : pairs) {
    for (const std::string suffix : {"", "m", "7", "m7", "dim", "sus4"}) {
      auto x = pcs_of(s + suffix), y = pcs_of(f + suffix);
      CHECK(x == y);
      CHECK(same_sound(parse_chord(s + suffix), parse_chord(f + suffix)));
      CHECK(s + suffix != f + suffix);
    }
  }
}

TEST_CASE("annotation palette") {
  const auto& palette = annotation_palette();
  CHECK(palette.size() == 48);
  std::set<std::vector<int>> distinct;
  for (const auto& sym : palette) {
    const Chord c = parse_chord(sym);
    CHECK(in_palette(c));
    distinct.insert(pcs_of(sym));
  }
  CHECK(distinct.size() == 48);
  CHECK_FALSE(in_palette(parse_chord("Csus4")));
  CHECK_FALSE(in_palette(parse_chord("G/B")));
  CHECK(in_palette(parse_chord("D#m7")));
}

TEST_CASE("symbol table conformance") {
  const auto rows = testutil::load_chord_table();
  CHECK(rows.size() >= 200);
  std::size_t mismatches = 0;
  for (const auto& row : rows) {
    const Chord c = parse_chord(row.symbol);
    if (!row.pitches) {
      CHECK_THROWS_AS(pitch_classes(c), UnknownChord);
    } else {
      std::vector<int> got;
      for (const auto& p : pitch_classes(c)) got.push_back(p.index());
      if (got != *row.pitches) ++mismatches;
      CHECK_MESSAGE(got == *row.pitches, row.symbol);
    }
    CHECK(encode_pr(c)[4] == row.special);
  }
  CHECK(mismatches == 0);
}
