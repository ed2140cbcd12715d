// Human next-chord annotations: loading and validation, Match / Mode /
// Pitch-Match metrics against model predictions, inter-annotator agreement,
// expertise groups and correlation statistics.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chordvec/common.h"

namespace chordvec {

struct AnnotationRecord {
  std::string prompt_id;
  std::vector<std::string> progression;
  std::string annotator_id;
  int expertise = 0;
  std::string first_choice;
  std::vector<std::string> alternatives;

  bool operator==(const AnnotationRecord&) const = default;
};

// Why a record is invalid, or nullopt when it is valid.
std::optional<std::string> annotation_problem(const AnnotationRecord& r);

AnnotationRecord annotation_from_json(const std::string& line, std::size_t line_no);
std::string annotation_to_json(const AnnotationRecord& r);
std::vector<AnnotationRecord> load_annotations(const std::string& path);

// Prompt set served to annotators: id plus progression.
struct Prompt {
  std::string id;
  std::vector<std::string> progression;
};
std::vector<Prompt> load_prompts(const std::string& path);

enum class ExpertiseGroup { beginner, intermediate, expert, all };
std::string_view group_name(ExpertiseGroup g);
bool in_group(int expertise, ExpertiseGroup g);

// Ranked model predictions per prompt id (best first).
using Predictions = std::map<std::string, std::vector<std::string>>;

// Canonical key shared by chords that sound the same (C#m7 and Dbm7).
std::string sound_key(const std::string& token);

double match_best(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g);
// Sum of Match_best over the top four predictions, capped at 1 per example.
double match_oo4(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g);

struct ModeMetrics {
  double mode_best = 0.0;
  double mode_oo4 = 0.0;
  std::size_t n_mode_examples = 0;
};

// Mode over the pooled responses (first choice and alternatives, each chord
// counted once per annotator) unless first_only is set.
ModeMetrics mode_metrics(const Predictions& preds, const std::vector<AnnotationRecord>& ann,
                         ExpertiseGroup g = ExpertiseGroup::all, bool first_only = false);

// |pitches(a) ∩ pitches(b)|; zero when either is UNK or unparseable.
int shared_pitches(const std::string& a, const std::string& b);
// |∩| / |∪| of the two pitch sets.
double pitch_jaccard(const std::string& a, const std::string& b);

struct PitchMatchResult {
  std::map<std::string, int> per_annotator;  // total shared pitches over answered prompts
  double pm_ave = 0.0;
};

PitchMatchResult pitch_matches(const Predictions& preds, const std::vector<AnnotationRecord>& ann, ExpertiseGroup g);

double pairwise_agreement(const std::vector<AnnotationRecord>& ann, ExpertiseGroup g = ExpertiseGroup::all);
double pairwise_pitch_agreement(const std::vector<AnnotationRecord>& ann, ExpertiseGroup g = ExpertiseGroup::all);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

// Two-sided p-values from the t distribution with n - 2 degrees of freedom.
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);
Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys);
std::vector<double> average_ranks(const std::vector<double>& xs);

struct GroupMetrics {
  ExpertiseGroup group = ExpertiseGroup::all;
  std::size_t annotators = 0;
  double match_best = 0.0, match_oo4 = 0.0, pm_ave = 0.0;
  ModeMetrics mode;
};

struct AnnotatorDetail {
  std::string annotator_id;
  int expertise = 0;
  double match_best = 0.0, match_oo4 = 0.0;
  int pitch_matches = 0;
};

struct MetricReport {
  std::string model;
  std::vector<GroupMetrics> groups;  // beginner, intermediate, expert, all
  std::vector<AnnotatorDetail> annotators;
  Correlation best_spearman, oo4_spearman, pm_pearson;
};

MetricReport expertise_report(const std::string& model, const Predictions& preds,
                              const std::vector<AnnotationRecord>& ann, bool first_only_mode = false);

void write_report_csv(const std::vector<MetricReport>& reports, const std::string& path);
std::string format_report_table(const std::vector<MetricReport>& reports);

}  // namespace chordvec
