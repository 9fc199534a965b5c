#pragma once

#include <set>
#include <string>
#include <vector>

#include "patvar/annotation.hpp"
#include "patvar/pattern.hpp"

namespace patvar {

struct LabeledExample {
  AnnotatedSentence sentence;
  std::string label;
};

struct SynthesisConfig {
  int max_patterns = 5;
  int max_atoms = 4;
  double min_precision = 1.0;
  int beam_width = 200;
};

struct ScoredPattern {
  PatternAst pattern;
  std::set<std::string> matched_positive_ids;
  std::set<std::string> matched_negative_ids;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Candidate atoms drawn from one sentence: each token's POS tag (unless
/// OTHER), its stem, its soft form when the lemma is in the lexicon, its
/// entity tag, and a single wildcard.
std::set<Atom> enumerate_atoms(const AnnotatedSentence& sentence, const SynonymLexicon& lexicon);

/// Scores a pattern against positives and negatives.
ScoredPattern score_pattern(const PatternAst& pattern, const std::vector<LabeledExample>& positives,
                            const std::vector<LabeledExample>& negatives,
                            const SynonymLexicon& lexicon);

/// Total order used everywhere candidates are ranked: higher f1, then fewer
/// atoms, then lexicographic rendering.
bool ranks_before(const ScoredPattern& a, const ScoredPattern& b);

/// Bottom-up beam search over single-sequence patterns. Round one scores
/// every atom on its own; each later round appends one atom to every beam
/// entry. The beam keeps the top `beam_width` candidates per round. Returns
/// every distinct candidate that matched at least one positive, ranked.
std::vector<ScoredPattern> enumerate_candidates(const std::vector<LabeledExample>& positives,
                                                const std::vector<LabeledExample>& negatives,
                                                const SynthesisConfig& cfg,
                                                const SynonymLexicon& lexicon);

/// Greedy set cover over candidates with precision >= min_precision. Picks
/// the candidate covering the most still-uncovered positives until all are
/// covered, nothing adds coverage, or max_patterns are chosen. The bare
/// wildcard is never returned.
std::vector<PatternAst> synthesize_patterns(const std::vector<LabeledExample>& positives,
                                            const std::vector<LabeledExample>& negatives,
                                            const SynthesisConfig& cfg,
                                            const SynonymLexicon& lexicon);

/// Same as synthesize_patterns but keeps the scores of the chosen patterns.
std::vector<ScoredPattern> synthesize_scored(const std::vector<LabeledExample>& positives,
                                             const std::vector<LabeledExample>& negatives,
                                             const SynthesisConfig& cfg,
                                             const SynonymLexicon& lexicon);

}  // namespace patvar
