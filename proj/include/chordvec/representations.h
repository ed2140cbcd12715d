// Per-song feature vectors: bag-of-chords counts and TF-IDF, aggregated
// pitch counts, and max-pooled chord embeddings.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chordvec/common.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"

namespace chordvec {

enum class Scheme { boc_count, boc_tfidf, pr_agg, ce_maxpool };

struct SongVector {
  Vector values;
  Scheme scheme = Scheme::boc_count;
  int dim() const { return static_cast<int>(values.size()); }
};

// Relative chord frequencies over the vocabulary; OOV tokens count as UNK.
SongVector boc_count(const Song& song, const Vocabulary& vocab);

// idf(t) = ln(N / df(t)) over `corpus`; tokens absent from it get 0.
Vector compute_idf(const Corpus& corpus, const Vocabulary& vocab);
SongVector boc_tfidf(const Song& song, const Vocabulary& vocab, const Vector& idf);

// Twelve pitch-class counts (C first) normalized by the number of pitches.
SongVector pr_aggregate(const Song& song);

// Per dimension, the signed value with the largest magnitude across the
// song's chords; ties go to the earliest chord.
SongVector ce_maxpool(const Song& song, const EmbeddingMatrix& m);

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

// CSV rows "song_id,v1,...,vd".
void write_features_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<SongVector>& features);

}  // namespace chordvec
