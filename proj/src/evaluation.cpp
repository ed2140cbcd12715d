#include "chordvec/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "chordvec/chord.h"

namespace chordvec {

namespace {

using Json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::set<int> pitch_set(const std::string& token) {
  std::set<int> out;
  try {
    const Chord c = parse_chord(token);
    if (c.special == Special::unk) return out;
    for (const auto& p : pitch_classes(c)) out.insert(p.index());
  } catch (const Error&) {
  }
  return out;
}

// Distinct response keys of one annotator for one prompt.
std::set<std::string> response_keys(const AnnotationRecord& r, bool first_only = false) {
  std::set<std::string> keys{sound_key(r.first_choice)};
  if (!first_only) {
    for (const auto& a : r.alternatives) keys.insert(sound_key(a));
  }
  return keys;
}

const std::vector<std::string>& preds_for(const Predictions& preds, const std::string& prompt) {
  const auto it = preds.find(prompt);
  if (it == preds.end() || it->second.empty()) throw ConfigError("no model prediction for prompt " + prompt);
  return it->second;
}

// Prompt id -> records of annotators in the group, in input order.
std::map<std::string, std::vector<const AnnotationRecord*>> by_prompt(const std::vector<AnnotationRecord>& ann,
                                                                       ExpertiseGroup g) {
  std::map<std::string, std::vector<const AnnotationRecord*>> out;
  for (const auto& r : ann) {
    if (in_group(r.expertise, g)) out[r.prompt_id].push_back(&r);
  }
  return out;
}

std::map<std::string, std::vector<const AnnotationRecord*>> by_annotator(const std::vector<AnnotationRecord>& ann,
                                                                          ExpertiseGroup g) {
  std::map<std::string, std::vector<const AnnotationRecord*>> out;
  for (const auto& r : ann) {
    if (in_group(r.expertise, g)) out[r.annotator_id].push_back(&r);
  }
  return out;
}

// Number of the top-k predictions an annotator included, capped at 1.
double included(const std::vector<std::string>& ranked, std::size_t k, const std::set<std::string>& keys) {
  double hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += keys.count(sound_key(ranked[i])) ? 1.0 : 0.0;
  return std::min(hits, 1.0);
}

double match_at(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g, std::size_t k) {
  const auto prompts = by_prompt(ann, g);
  if (prompts.empty()) return kNaN;
  double total = 0;
  for (const auto& [prompt, records] : prompts) {
    const auto& ranked = preds_for(preds, prompt);
    // For k > 1 the per-annotator hits are summed before the cap so the
    // value is the sum of Match_best over predictions, capped at 1.
    double sum = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
      const std::string key = sound_key(ranked[i]);
      double n = 0;
      for (const auto* r : records) n += response_keys(*r).count(key) ? 1.0 : 0.0;
      sum += n / static_cast<double>(records.size());
    }
    total += std::min(sum, 1.0);
  }
  return 100.0 * total / static_cast<double>(prompts.size());
}

double pairwise(const std::vector<AnnotationRecord>& ann, ExpertiseGroup g,
                double (*score)(const std::string&, const std::string&)) {
  const auto annotators = by_annotator(ann, g);
  std::vector<std::map<std::string, std::string>> firsts;
  for (const auto& [id, records] : annotators) {
    std::map<std::string, std::string> m;
    for (const auto* r : records) m[r->prompt_id] = r->first_choice;
    firsts.push_back(std::move(m));
  }
  double total = 0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < firsts.size(); ++a) {
    for (std::size_t b = a + 1; b < firsts.size(); ++b) {
      double sum = 0;
      std::size_t shared = 0;
      for (const auto& [prompt, chord] : firsts[a]) {
        const auto it = firsts[b].find(prompt);
        if (it == firsts[b].end()) continue;
        sum += score(chord, it->second);
        ++shared;
      }
      if (shared == 0) continue;
      total += sum / static_cast<double>(shared);
      ++pairs;
    }
  }
  return pairs ? 100.0 * total / static_cast<double>(pairs) : kNaN;
}

double same_chord(const std::string& a, const std::string& b) { return sound_key(a) == sound_key(b) ? 1.0 : 0.0; }

std::string fmt(double v, const char* spec = "%.2f") {
  if (std::isnan(v)) return "-";
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_p(double p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), p < 0.01 ? "%.1e" : "%.2f", p);
  return buf;
}

}  // namespace

std::optional<std::string> annotation_problem(const AnnotationRecord& r) {
  if (r.prompt_id.empty()) return "prompt_id is empty";
  if (r.annotator_id.empty()) return "annotator_id is empty";
  if (r.expertise < 0 || r.expertise > 100) return "expertise must be in 0..100";
  if (r.progression.size() != 3 && r.progression.size() != 6) return "progression must have 3 or 6 chords";
  for (const auto& c : r.progression) {
    try {
      parse_chord(c);
    } catch (const ParseError& e) {
      return "progression chord '" + c + "': " + e.what();
    }
  }
  if (r.alternatives.empty() || r.alternatives.size() > 2) return "alternatives must have 1 or 2 chords";
  std::vector<std::string> choices{r.first_choice};
  choices.insert(choices.end(), r.alternatives.begin(), r.alternatives.end());
  std::set<std::string> seen;
  for (const auto& c : choices) {
    try {
      if (!in_palette(parse_chord(c))) return "choice '" + c + "' is not in the palette";
    } catch (const ParseError& e) {
      return "choice '" + c + "': " + e.what();
    }
    if (!seen.insert(sound_key(c)).second) return "choice '" + c + "' is repeated";
  }
  return std::nullopt;
}

AnnotationRecord annotation_from_json(const std::string& line, std::size_t line_no) {
  AnnotationRecord r;
  try {
    const Json j = Json::parse(line);
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.progression = j.at("progression").get<std::vector<std::string>>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    r.expertise = j.at("expertise").get<int>();
    r.first_choice = j.at("first_choice").get<std::string>();
    r.alternatives = j.at("alternatives").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw FormatError(line_no, std::string("invalid annotation record: ") + e.what());
  }
  if (const auto problem = annotation_problem(r)) throw FormatError(line_no, *problem);
  return r;
}

std::string annotation_to_json(const AnnotationRecord& r) {
  Json j;
  j["prompt_id"] = r.prompt_id;
  j["progression"] = r.progression;
  j["annotator_id"] = r.annotator_id;
  j["expertise"] = r.expertise;
  j["first_choice"] = r.first_choice;
  j["alternatives"] = r.alternatives;
  return j.dump();
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  std::vector<AnnotationRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotationRecord r = annotation_from_json(line, line_no);
    if (!seen.emplace(r.prompt_id, r.annotator_id).second) {
      throw FormatError(line_no, "duplicate response of " + r.annotator_id + " to " + r.prompt_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Prompt> load_prompts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt file: " + path);
  std::vector<Prompt> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Prompt p;
    try {
      const Json j = Json::parse(line);
      p.id = j.at("id").get<std::string>();
      p.progression = j.at("progression").get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      throw FormatError(line_no, std::string("invalid prompt: ") + e.what());
    }
    if (p.progression.size() != 3 && p.progression.size() != 6) throw FormatError(line_no, "prompt must have 3 or 6 chords");
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view group_name(ExpertiseGroup g) {
  switch (g) {
    case ExpertiseGroup::beginner: return "beginner";
    case ExpertiseGroup::intermediate: return "intermediate";
    case ExpertiseGroup::expert: return "expert";
    case ExpertiseGroup::all: return "all";
  }
  return "?";
}

bool in_group(int expertise, ExpertiseGroup g) {
  switch (g) {
    case ExpertiseGroup::beginner: return expertise == 0;
    case ExpertiseGroup::intermediate: return expertise > 0 && expertise < 50;
    case ExpertiseGroup::expert: return expertise >= 50;
    case ExpertiseGroup::all: return true;
  }
  return false;
}

std::string sound_key(const std::string& token) {
  try {
    Chord c = parse_chord(token);
    if (c.special == Special::unk) return std::string(kUnkToken);
    if (c.special == Special::star) c.special = Special::none;
    c.prefer_flats = false;
    return to_symbol(c);
  } catch (const ParseError&) {
    return token;
  }
}

double match_best(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g) {
  return match_at(preds, ann, g, 1);
}

double match_oo4(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g) {
  return match_at(preds, ann, g, 4);
}

ModeMetrics mode_metrics(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g,
                         bool first_only) {
  ModeMetrics m;
  double best = 0, oo4 = 0;
  for (const auto& [prompt, records] : by_prompt(ann, g)) {
    std::map<std::string, int> counts;
    for (const auto* r : records) {
      for (const auto& k : response_keys(*r, first_only)) ++counts[k];
    }
    int top = 0, ties = 0;
    std::string mode;
    for (const auto& [k, n] : counts) {
      if (n > top) {
        top = n;
        ties = 1;
        mode = k;
      } else if (n == top) {
        ++ties;
      }
    }
    if (ties != 1) continue;
    ++m.n_mode_examples;
    const auto& ranked = preds_for(preds, prompt);
    if (sound_key(ranked[0]) == mode) best += 1.0;
    oo4 += included(ranked, 4, {mode});
  }
  if (m.n_mode_examples) {
    m.mode_best = 100.0 * best / static_cast<double>(m.n_mode_examples);
    m.mode_oo4 = 100.0 * oo4 / static_cast<double>(m.n_mode_examples);
  }
  return m;
}

int shared_pitches(const std::string& a, const std::string& b) {
  const auto x = pitch_set(a), y = pitch_set(b);
  int n = 0;
  for (int p : x) n += y.count(p) ? 1 : 0;
  return n;
}

double pitch_jaccard(const std::string& a, const std::string& b) {
  const auto x = pitch_set(a), y = pitch_set(b);
  std::set<int> u = x;
  u.insert(y.begin(), y.end());
  if (u.empty()) return 0.0;
  return static_cast<double>(shared_pitches(a, b)) / static_cast<double>(u.size());
}

PitchMatchResult pitch_matches(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g) {
  PitchMatchResult res;
  for (const auto& [id, records] : by_annotator(ann, g)) {
    int total = 0;
    for (const auto* r : records) total += shared_pitches(preds_for(preds, r->prompt_id)[0], r->first_choice);
    res.per_annotator[id] = total;
  }
  if (res.per_annotator.empty()) {
    res.pm_ave = kNaN;
    return res;
  }
  double sum = 0;
  for (const auto& [id, t] : res.per_annotator) sum += t;
  res.pm_ave = sum / static_cast<double>(res.per_annotator.size());
  return res;
}

double pairwise_agreement(const std::vector<AnnotationRecord>& ann, ExpertiseGroup g) {
  return pairwise(ann, g, &same_chord);
}

double pairwise_pitch_agreement(const std::vector<AnnotationRecord>& ann, ExpertiseGroup g) {
  return pairwise(ann, g, &pitch_jaccard);
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("correlation inputs differ in length");
  if (xs.size() < 3) throw ConfigError("correlation needs at least three points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  Correlation c;
  if (sxx == 0 || syy == 0) return c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  const double df = n - 2;
  const double t = c.r * std::sqrt(df / (1 - c.r * c.r));
  const boost::math::students_t dist(df);
  c.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return c;
}

Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("correlation inputs differ in length");
  return pearson(average_ranks(xs), average_ranks(ys));
}

MetricReport expertise_report(const std::string& model, const Predictions& preds,
                              const std::vector<AnnotationRecord>& ann, bool first_only_mode) {
  MetricReport rep;
  rep.model = model;
  for (auto g : {ExpertiseGroup::beginner, ExpertiseGroup::intermediate, ExpertiseGroup::expert, ExpertiseGroup::all}) {
    GroupMetrics gm;
    gm.group = g;
    gm.annotators = by_annotator(ann, g).size();
    gm.match_best = match_best(preds, ann, g);
    gm.match_oo4 = match_oo4(preds, ann, g);
    gm.pm_ave = pitch_matches(preds, ann, g).pm_ave;
    gm.mode = mode_metrics(preds, ann, g, first_only_mode);
    rep.groups.push_back(gm);
  }
  const auto pm = pitch_matches(preds, ann, ExpertiseGroup::all);
  std::vector<double> expertise, best, oo4, pms;
  for (const auto& [id, records] : by_annotator(ann, ExpertiseGroup::all)) {
    AnnotatorDetail d;
    d.annotator_id = id;
    d.expertise = records.front()->expertise;
    double b = 0, o = 0;
    for (const auto* r : records) {
      const auto& ranked = preds_for(preds, r->prompt_id);
      const auto keys = response_keys(*r);
      b += included(ranked, 1, keys);
      o += included(ranked, 4, keys);
    }
    d.match_best = 100.0 * b / static_cast<double>(records.size());
    d.match_oo4 = 100.0 * o / static_cast<double>(records.size());
    d.pitch_matches = pm.per_annotator.at(id);
    expertise.push_back(d.expertise);
    best.push_back(d.match_best);
    oo4.push_back(d.match_oo4);
    pms.push_back(d.pitch_matches);
    rep.annotators.push_back(d);
  }
  if (expertise.size() >= 3) {
    rep.best_spearman = spearman(expertise, best);
    rep.oo4_spearman = spearman(expertise, oo4);
    rep.pm_pearson = pearson(expertise, pms);
  } else {
    rep.best_spearman = rep.oo4_spearman = rep.pm_pearson = Correlation{kNaN, kNaN};
  }
  return rep;
}

void write_report_csv(const std::vector<MetricReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "model,group,annotators,match_best,match_oo4,mode_best,mode_oo4,n_mode_examples,pm_ave\n";
  for (const auto& r : reports) {
    for (const auto& g : r.groups) {
      out << r.model << ',' << group_name(g.group) << ',' << g.annotators << ',' << fmt(g.match_best, "%.4f") << ','
          << fmt(g.match_oo4, "%.4f") << ',' << fmt(g.mode.mode_best, "%.4f") << ',' << fmt(g.mode.mode_oo4, "%.4f")
          << ',' << g.mode.n_mode_examples << ',' << fmt(g.pm_ave, "%.4f") << '\n';
    }
  }
  out << "\nmodel,best_rs,best_p,oo4_rs,oo4_p,pm_rp,pm_p\n";
  for (const auto& r : reports) {
    out << r.model << ',' << fmt(r.best_spearman.r, "%.4f") << ',' << fmt(r.best_spearman.p, "%.6g") << ','
        << fmt(r.oo4_spearman.r, "%.4f") << ',' << fmt(r.oo4_spearman.p, "%.6g") << ',' << fmt(r.pm_pearson.r, "%.4f")
        << ',' << fmt(r.pm_pearson.p, "%.6g") << '\n';
  }
}

std::string format_report_table(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %-13s %10s %10s %10s %10s %8s\n", "model", "group", "Match_best",
                "Match_oo4", "Mode_best", "Mode_oo4", "PM_ave");
  out << line;
  for (const auto& r : reports) {
    for (const auto& g : r.groups) {
      std::snprintf(line, sizeof(line), "%-10s %-13s %10s %10s %10s %10s %8s\n", r.model.c_str(),
                    std::string(group_name(g.group)).c_str(), fmt(g.match_best).c_str(), fmt(g.match_oo4).c_str(),
                    fmt(g.mode.mode_best).c_str(), fmt(g.mode.mode_oo4).c_str(), fmt(g.pm_ave).c_str());
      out << line;
    }
  }
  out << '\n';
  std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %8s %8s %8s\n", "model", "best r_s", "p", "oo4 r_s", "p", "PM r_p",
                "p");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %8s %8s %8s\n", r.model.c_str(), fmt(r.best_spearman.r).c_str(),
                  fmt_p(r.best_spearman.p).c_str(), fmt(r.oo4_spearman.r).c_str(), fmt_p(r.oo4_spearman.p).c_str(),
                  fmt(r.pm_pearson.r).c_str(), fmt_p(r.pm_pearson.p).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace chordvec
