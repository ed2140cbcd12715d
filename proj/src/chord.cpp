#include "chordvec/chord.h"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace chordvec {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

PitchClass::PitchClass(int index) : index_(index) {
  if (index < 1 || index > 12) throw Error("pitch class index out of range: " + std::to_string(index));
}

PitchClass PitchClass::from_semitone(int semitones_above_c) {
  const int s = ((semitones_above_c % 12) + 12) % 12;
  return PitchClass(s + 1);
}

bool Chord::operator==(const Chord& other) const {
  if (special != other.special) return false;
  if (special == Special::unk || special == Special::hammer_on || special == Special::hammer_on_minor) return true;
  if (quality == Quality::other && fallback_triad != other.fallback_triad) return false;
  return root == other.root && root_spelling == other.root_spelling && prefer_flats == other.prefer_flats &&
         quality == other.quality && extension == other.extension && bass == other.bass;
}

namespace {

int letter_semitone(char c) {
  switch (c) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return -1;
  }
}

bool starts_with(std::string_view s, std::size_t at, std::string_view prefix) {
  return s.size() >= at + prefix.size() && s.compare(at, prefix.size(), prefix) == 0;
}

bool suffix_char_ok(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '+' || c == '-' || c == '#';
}

struct Note {
  PitchClass pc;
  Spelling spelling;
  std::size_t length;
};

// Letter plus optional single accidental starting at `at`.
Note parse_note(std::string_view s, std::size_t at, std::size_t offset, const char* what) {
  if (at >= s.size()) throw ParseError(offset + at, std::string("missing ") + what);
  const int base = letter_semitone(s[at]);
  if (base < 0) throw ParseError(offset + at, std::string("unknown ") + what + " letter");
  Spelling sp = Spelling::natural;
  int shift = 0;
  std::size_t len = 1;
  if (at + 1 < s.size() && (s[at + 1] == '#' || s[at + 1] == 'b')) {
    sp = s[at + 1] == '#' ? Spelling::sharp : Spelling::flat;
    shift = sp == Spelling::sharp ? 1 : -1;
    len = 2;
    if (at + 2 < s.size() && (s[at + 2] == '#' || s[at + 2] == 'b')) {
      // "bb" would also be caught here; no suffix starts with 'b'.
      throw ParseError(offset + at + 2, "malformed accidental");
    }
  }
  return {PitchClass::from_semitone(base + shift), sp, len};
}

struct SuffixParse {
  Quality quality = Quality::major;
  Quality fallback = Quality::major;
  std::optional<int> extension;
};

SuffixParse parse_suffix(std::string_view s, std::size_t offset) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!suffix_char_ok(s[i])) throw ParseError(offset + i, "unrecognized suffix");
  }
  SuffixParse out;
  std::size_t i = 0;
  bool have_triad = false;

  // Triad part. "maj" is checked first so that "maj7" is not read as minor.
  if (starts_with(s, i, "maj") || starts_with(s, i, "Maj") || starts_with(s, i, "M7")) {
    // extension handled below
  } else if (starts_with(s, i, "min")) {
    out.quality = Quality::minor, i += 3, have_triad = true;
  } else if (starts_with(s, i, "m")) {
    out.quality = Quality::minor, i += 1, have_triad = true;
  } else if (starts_with(s, i, "dim")) {
    out.quality = Quality::diminished, i += 3, have_triad = true;
  } else if (starts_with(s, i, "aug")) {
    out.quality = Quality::augmented, i += 3, have_triad = true;
  } else if (starts_with(s, i, "+")) {
    out.quality = Quality::augmented, i += 1, have_triad = true;
  } else if (starts_with(s, i, "sus2")) {
    out.quality = Quality::suspended2, i += 4, have_triad = true;
  } else if (starts_with(s, i, "sus4")) {
    out.quality = Quality::suspended4, i += 4, have_triad = true;
  } else if (starts_with(s, i, "sus")) {
    out.quality = Quality::suspended4, i += 3, have_triad = true;
  } else if (starts_with(s, i, "5")) {
    out.quality = Quality::power5, i += 1, have_triad = true;
  }

  // Extension part; longest tokens first.
  struct Ext {
    std::string_view text;
    int interval;
  };
  static constexpr Ext kExt[] = {{"maj7", 11}, {"Maj7", 11}, {"M7", 11}, {"add9", 14}, {"add2", 2}, {"11", 17},
                                 {"13", 21},   {"7", 10},    {"6", 9},   {"9", 14}};
  for (const auto& e : kExt) {
    if (starts_with(s, i, e.text)) {
      out.extension = e.interval;
      if (e.interval == 10 && out.quality == Quality::diminished) out.extension = 9;
      i += e.text.size();
      break;
    }
  }
  if (!out.extension && (starts_with(s, i, "maj") || starts_with(s, i, "Maj"))) i += 3;

  // Trailing suspension, as in "D7sus4".
  if (!have_triad) {
    if (starts_with(s, i, "sus2")) {
      out.quality = Quality::suspended2, i += 4;
    } else if (starts_with(s, i, "sus4")) {
      out.quality = Quality::suspended4, i += 4;
    } else if (starts_with(s, i, "sus")) {
      out.quality = Quality::suspended4, i += 3;
    }
  }

  if (i < s.size()) {
    out.fallback = out.quality == Quality::other ? Quality::major : out.quality;
    out.quality = Quality::other;
  }
  return out;
}

std::string_view suffix_of_raw(std::string_view raw) {
  std::size_t start = raw.size() >= 2 && (raw[1] == '#' || raw[1] == 'b') ? 2 : 1;
  std::size_t end = raw.size();
  if (end > start && raw[end - 1] == '*') --end;
  const auto slash = raw.find('/', start);
  if (slash != std::string_view::npos && slash < end) end = slash;
  return raw.substr(start, end - start);
}

}  // namespace

Chord parse_chord(std::string_view symbol) {
  if (symbol.empty()) throw ParseError(0, "empty symbol");
  Chord c;
  c.raw = std::string(symbol);
  if (symbol == kUnkToken || symbol == "H" || symbol == "Hm") {
    c.special = symbol == kUnkToken ? Special::unk : symbol == "H" ? Special::hammer_on : Special::hammer_on_minor;
    c.quality = Quality::other;
    return c;
  }

  std::string_view body = symbol;
  if (body.back() == '*') {
    c.special = Special::star;
    body.remove_suffix(1);
    if (body.empty()) throw ParseError(0, "missing root");
  }

  const Note root = parse_note(body, 0, 0, "root");
  c.root = root.pc;
  c.root_spelling = root.spelling;
  c.prefer_flats = root.spelling == Spelling::flat;

  std::string_view rest = body.substr(root.length);
  std::size_t rest_offset = root.length;
  const auto slash = rest.find('/');
  if (slash != std::string_view::npos) {
    const std::string_view bass_text = rest.substr(slash + 1);
    const std::size_t bass_offset = rest_offset + slash + 1;
    const Note bass = parse_note(bass_text, 0, bass_offset, "bass");
    if (bass.length != bass_text.size()) throw ParseError(bass_offset + bass.length, "malformed bass");
    c.bass = bass.pc;
    rest = rest.substr(0, slash);
  }

  const SuffixParse sp = parse_suffix(rest, rest_offset);
  c.quality = sp.quality;
  c.fallback_triad = sp.fallback;
  c.extension = sp.extension;
  return c;
}

std::vector<int> triad_intervals(Quality q) {
  switch (q) {
    case Quality::major: return {0, 4, 7};
    case Quality::minor: return {0, 3, 7};
    case Quality::augmented: return {0, 4, 8};
    case Quality::diminished: return {0, 3, 6};
    case Quality::suspended2: return {0, 2, 7};
    case Quality::suspended4: return {0, 5, 7};
    case Quality::power5: return {0, 7};
    case Quality::other: return {0, 4, 7};
  }
  return {0, 4, 7};
}

std::vector<PitchClass> pitch_classes(const Chord& chord) {
  if (chord.special == Special::unk) throw UnknownChord();
  if (chord.special == Special::hammer_on || chord.special == Special::hammer_on_minor) return {};
  const Quality q = chord.quality == Quality::other ? chord.fallback_triad : chord.quality;
  std::vector<PitchClass> pcs;
  for (int iv : triad_intervals(q)) pcs.push_back(chord.root.shifted(iv));
  if (chord.extension) {
    const PitchClass ext = chord.root.shifted(*chord.extension);
    if (std::find(pcs.begin(), pcs.end(), ext) == pcs.end()) pcs.push_back(ext);
  }
  if (chord.bass) {
    const auto it = std::find(pcs.begin(), pcs.end(), *chord.bass);
    if (it != pcs.end()) {
      std::rotate(pcs.begin(), it, pcs.end());
    } else {
      pcs.insert(pcs.begin(), *chord.bass);
    }
  }
  return pcs;
}

PitchRepr encode_pr(const Chord& chord) {
  PitchRepr pr{0, 0, 0, 0, 0};
  switch (chord.special) {
    case Special::none: break;
    case Special::star: pr[4] = 1; break;
    case Special::unk: pr[4] = 2; return pr;
    case Special::hammer_on: pr[4] = 3; break;
    case Special::hammer_on_minor: pr[4] = 4; break;
  }
  const auto pcs = pitch_classes(chord);
  for (std::size_t i = 0; i < pcs.size() && i < 4; ++i) pr[i] = pcs[i].index();
  return pr;
}

QualityClass quality_class(const Chord& chord) {
  switch (chord.quality) {
    case Quality::major: return QualityClass::major;
    case Quality::minor: return QualityClass::minor;
    case Quality::augmented: return QualityClass::augmented;
    case Quality::diminished: return QualityClass::diminished;
    case Quality::suspended2:
    case Quality::suspended4: return QualityClass::suspended;
    case Quality::power5: return QualityClass::power;
    case Quality::other: return QualityClass::other;
  }
  return QualityClass::other;
}

std::string_view quality_class_name(QualityClass q) {
  switch (q) {
    case QualityClass::major: return "major";
    case QualityClass::minor: return "minor";
    case QualityClass::augmented: return "augmented";
    case QualityClass::diminished: return "diminished";
    case QualityClass::suspended: return "suspended";
    case QualityClass::power: return "power";
    case QualityClass::other: return "other";
  }
  return "other";
}

PitchClass fifth_of(PitchClass p) { return p.shifted(7); }

PitchClass relative_minor_root(PitchClass major_root) { return major_root.shifted(-3); }

std::string pitch_name(PitchClass p, bool prefer_flats) {
  static const char* kSharp[] = {"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
  static const char* kFlat[] = {"C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B"};
  return prefer_flats ? kFlat[p.semitone()] : kSharp[p.semitone()];
}

std::string to_symbol(const Chord& chord) {
  switch (chord.special) {
    case Special::unk: return std::string(kUnkToken);
    case Special::hammer_on: return "H";
    case Special::hammer_on_minor: return "Hm";
    default: break;
  }
  std::string out = pitch_name(chord.root, chord.prefer_flats);
  std::string ext;
  if (chord.extension) {
    switch (*chord.extension) {
      case 10: ext = "7"; break;
      case 11: ext = "maj7"; break;
      case 9: ext = chord.quality == Quality::diminished ? "7" : "6"; break;
      case 14: ext = "add9"; break;
      case 2: ext = "add2"; break;
      case 17: ext = "11"; break;
      case 21: ext = "13"; break;
      default: break;
    }
  }
  switch (chord.quality) {
    case Quality::major: out += ext; break;
    case Quality::minor: out += "m" + ext; break;
    case Quality::augmented: out += "aug" + ext; break;
    case Quality::diminished: out += "dim" + ext; break;
    case Quality::suspended2: out += ext + "sus2"; break;
    case Quality::suspended4: out += ext + "sus4"; break;
    case Quality::power5: out += "5" + ext; break;
    case Quality::other: out += std::string(suffix_of_raw(chord.raw)); break;
  }
  if (chord.bass) out += "/" + pitch_name(*chord.bass, chord.prefer_flats);
  if (chord.special == Special::star) out += "*";
  return out;
}

Chord transpose(const Chord& chord, int semitones) {
  if (chord.special == Special::unk || chord.special == Special::hammer_on ||
      chord.special == Special::hammer_on_minor) {
    return chord;
  }
  Chord out = chord;
  out.root = chord.root.shifted(semitones);
  if (chord.bass) out.bass = chord.bass->shifted(semitones);
  const std::string name = pitch_name(out.root, out.prefer_flats);
  out.root_spelling = name.size() == 1 ? Spelling::natural : (name[1] == '#' ? Spelling::sharp : Spelling::flat);
  out.raw = to_symbol(out);
  return out;
}

bool same_sound(const Chord& a, const Chord& b) {
  const bool a_unk = a.special == Special::unk, b_unk = b.special == Special::unk;
  if (a_unk || b_unk) return a_unk && b_unk;
  auto strip = [](Special s) { return s == Special::star ? Special::none : s; };
  if (strip(a.special) != strip(b.special)) return false;
  if (a.special == Special::hammer_on || a.special == Special::hammer_on_minor) return true;
  if (a.quality != b.quality || a.extension != b.extension || a.root != b.root || a.bass != b.bass) return false;
  if (a.quality == Quality::other) return suffix_of_raw(a.raw) == suffix_of_raw(b.raw);
  return true;
}

const std::vector<std::string>& annotation_palette() {
  static const std::vector<std::string> palette = [] {
    static const char* kRoots[] = {"C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
    std::vector<std::string> out;
    for (const char* r : kRoots) {
      for (const char* suffix : {"", "m", "7", "m7"}) out.push_back(std::string(r) + suffix);
    }
    return out;
  }();
  return palette;
}

bool in_palette(const Chord& chord) {
  if (chord.special != Special::none || chord.bass) return false;
  if (chord.quality != Quality::major && chord.quality != Quality::minor) return false;
  return !chord.extension || *chord.extension == 10;
}

}  // namespace chordvec
