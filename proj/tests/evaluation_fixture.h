// Hand-computed annotation fixture and an exact permutation oracle for
// correlation p-values, shared by the unit and acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "chordvec/evaluation.h"

namespace testutil {

using chordvec::AnnotationRecord;
using chordvec::Predictions;

inline AnnotationRecord rec(const std::string& prompt, const std::string& annotator, int expertise, const std::string& first,
                     std::vector<std::string> alts) {
  AnnotationRecord r;
  r.prompt_id = prompt;
  r.progression = prompt == "p1" ? std::vector<std::string>{"C", "F", "G"} : std::vector<std::string>{"Am", "F", "C"};
  r.annotator_id = annotator;
  r.expertise = expertise;
  r.first_choice = first;
  r.alternatives = std::move(alts);
  return r;
}

// Two prompts, three annotators (one per expertise group).
inline std::vector<AnnotationRecord> fixture() {
  return {
      rec("p1", "a", 0, "C", {"Am"}),  rec("p1", "b", 20, "Am", {"F"}), rec("p1", "c", 60, "G7", {"C"}),
      rec("p2", "a", 0, "G", {"C"}),   rec("p2", "b", 20, "Em", {"Am"}), rec("p2", "c", 60, "G", {"Dm"}),
  };
}

inline Predictions fixture_preds() { return {{"p1", {"C", "Am", "F", "G"}}, {"p2", {"G", "Em", "C", "F"}}}; }

inline double plain_r(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Fraction of all n! pairings whose |r| is at least the observed |r|.
inline double exact_permutation_p(const std::vector<double>& x, const std::vector<double>& y) {
  const double observed = std::abs(plain_r(x, y));
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> perm(y.size());
  std::size_t hits = 0, total = 0;
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = y[idx[i]];
    if (std::abs(plain_r(x, perm)) >= observed - 1e-12) ++hits;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i] ? 1 : 0;
      equal += w == v[i] ? 1 : 0;
    }
    out[i] = less + (equal + 1) / 2.0;
  }
  return out;
}

inline const std::vector<double> kFig3X = {0, 0, 10, 10, 19, 25, 25, 50, 73};
inline const std::vector<double> kFig3Y = {38, 41, 47, 43, 51, 46, 49, 53, 62};

}  // namespace testutil
