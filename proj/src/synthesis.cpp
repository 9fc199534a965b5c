#include "patvar/synthesis.hpp"

#include <algorithm>
#include <map>

#include "patvar/error.hpp"

namespace patvar {
namespace {

// Candidate under construction: positives/negatives are indices into the
// caller's vectors so extensions only re-test sentences the prefix matched.
struct Partial {
  Sequence seq;
  std::string rendered;
  std::vector<std::size_t> pos_hits;
  std::vector<std::size_t> neg_hits;
  double f1 = 0.0;
};

double f1_of(std::size_t pos_hits, std::size_t neg_hits, std::size_t n_pos) {
  const double matched = static_cast<double>(pos_hits + neg_hits);
  const double precision = matched > 0 ? static_cast<double>(pos_hits) / matched : 0.0;
  const double recall = n_pos > 0 ? static_cast<double>(pos_hits) / static_cast<double>(n_pos) : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

bool partial_before(const Partial& a, const Partial& b) {
  if (a.f1 != b.f1) return a.f1 > b.f1;
  if (a.seq.size() != b.seq.size()) return a.seq.size() < b.seq.size();
  return a.rendered < b.rendered;
}

std::vector<std::size_t> hits(const PatternAst& p, const std::vector<LabeledExample>& examples,
                              const std::vector<std::size_t>& among, const SynonymLexicon& lex) {
  std::vector<std::size_t> out;
  for (auto i : among)
    if (match_sentence(p, examples[i].sentence, lex)) out.push_back(i);
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

ScoredPattern to_scored(const Partial& p, const std::vector<LabeledExample>& positives,
                        const std::vector<LabeledExample>& negatives) {
  ScoredPattern s;
  s.pattern.alternatives.push_back(p.seq);
  for (auto i : p.pos_hits) s.matched_positive_ids.insert(positives[i].sentence.id);
  for (auto i : p.neg_hits) s.matched_negative_ids.insert(negatives[i].sentence.id);
  const double matched = static_cast<double>(p.pos_hits.size() + p.neg_hits.size());
  s.precision = matched > 0 ? static_cast<double>(p.pos_hits.size()) / matched : 0.0;
  s.recall = positives.empty() ? 0.0
                               : static_cast<double>(p.pos_hits.size()) /
                                     static_cast<double>(positives.size());
  s.f1 = p.f1;
  return s;
}

bool is_bare_wildcard(const PatternAst& p) {
  for (const auto& seq : p.alternatives)
    if (std::all_of(seq.begin(), seq.end(), [](const Atom& a) { return a.is_wildcard(); }))
      return true;
  return false;
}

}  // namespace

std::set<Atom> enumerate_atoms(const AnnotatedSentence& sentence, const SynonymLexicon& lexicon) {
  std::set<Atom> atoms{Atom::wildcard()};
  for (const auto& t : sentence.tokens) {
    if (t.pos != Pos::Other) atoms.insert(Atom::pos_tag(t.pos));
    if (t.lemma.empty()) continue;
    atoms.insert(Atom::stem(t.lemma));
    if (lexicon.contains(t.lemma)) atoms.insert(Atom::soft(t.lemma));
    if (t.entity) atoms.insert(Atom::entity(*t.entity));
  }
  return atoms;
}

ScoredPattern score_pattern(const PatternAst& pattern, const std::vector<LabeledExample>& positives,
                            const std::vector<LabeledExample>& negatives,
                            const SynonymLexicon& lexicon) {
  ScoredPattern s;
  s.pattern = pattern;
  for (const auto& e : positives)
    if (match_sentence(pattern, e.sentence, lexicon)) s.matched_positive_ids.insert(e.sentence.id);
  for (const auto& e : negatives)
    if (match_sentence(pattern, e.sentence, lexicon)) s.matched_negative_ids.insert(e.sentence.id);
  const auto p = s.matched_positive_ids.size();
  const auto n = s.matched_negative_ids.size();
  s.precision = p + n > 0 ? static_cast<double>(p) / static_cast<double>(p + n) : 0.0;
  s.recall = positives.empty() ? 0.0 : static_cast<double>(p) / static_cast<double>(positives.size());
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

bool ranks_before(const ScoredPattern& a, const ScoredPattern& b) {
  if (a.f1 != b.f1) return a.f1 > b.f1;
  const auto na = a.pattern.atom_count();
  const auto nb = b.pattern.atom_count();
  if (na != nb) return na < nb;
  return render_pattern(a.pattern) < render_pattern(b.pattern);
}

std::vector<ScoredPattern> enumerate_candidates(const std::vector<LabeledExample>& positives,
                                                const std::vector<LabeledExample>& negatives,
                                                const SynthesisConfig& cfg,
                                                const SynonymLexicon& lexicon) {
  if (positives.empty()) throw EmptyPositives();
  std::set<Atom> atom_set;
  for (const auto& e : positives) atom_set.merge(enumerate_atoms(e.sentence, lexicon));
  const std::vector<Atom> atoms(atom_set.begin(), atom_set.end());

  const auto all_pos = all_indices(positives.size());
  const auto all_neg = all_indices(negatives.size());
  std::map<std::string, Partial> seen;

  auto evaluate = [&](Sequence seq, const std::vector<std::size_t>& pos_among,
                      const std::vector<std::size_t>& neg_among) -> const Partial* {
    Partial p;
    p.seq = std::move(seq);
    p.rendered = render_sequence(p.seq);
    if (seen.count(p.rendered)) return nullptr;
    PatternAst ast{{p.seq}};
    p.pos_hits = hits(ast, positives, pos_among, lexicon);
    if (p.pos_hits.empty()) return nullptr;
    p.neg_hits = hits(ast, negatives, neg_among, lexicon);
    p.f1 = f1_of(p.pos_hits.size(), p.neg_hits.size(), positives.size());
    auto key = p.rendered;
    return &seen.emplace(std::move(key), std::move(p)).first->second;
  };

  auto keep_top = [&](std::vector<const Partial*>& round) {
    std::sort(round.begin(), round.end(),
              [](const Partial* a, const Partial* b) { return partial_before(*a, *b); });
    if (round.size() > static_cast<std::size_t>(std::max(cfg.beam_width, 1)))
      round.resize(static_cast<std::size_t>(std::max(cfg.beam_width, 1)));
  };

  std::vector<const Partial*> beam;
  for (const auto& a : atoms)
    if (auto p = evaluate({a}, all_pos, all_neg)) beam.push_back(p);
  keep_top(beam);

  for (int length = 2; length <= cfg.max_atoms && !beam.empty(); ++length) {
    std::vector<const Partial*> next;
    for (const Partial* prefix : beam) {
      for (const auto& a : atoms) {
        if (a.is_wildcard() && prefix->seq.back().is_wildcard()) continue;
        Sequence seq = prefix->seq;
        seq.push_back(a);
        if (auto p = evaluate(std::move(seq), prefix->pos_hits, prefix->neg_hits)) next.push_back(p);
      }
    }
    keep_top(next);
    beam = std::move(next);
  }

  std::vector<const Partial*> ordered;
  ordered.reserve(seen.size());
  for (const auto& [_, p] : seen) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const Partial* a, const Partial* b) { return partial_before(*a, *b); });
  std::vector<ScoredPattern> out;
  out.reserve(ordered.size());
  for (const auto* p : ordered) out.push_back(to_scored(*p, positives, negatives));
  return out;
}

std::vector<ScoredPattern> synthesize_scored(const std::vector<LabeledExample>& positives,
                                             const std::vector<LabeledExample>& negatives,
                                             const SynthesisConfig& cfg,
                                             const SynonymLexicon& lexicon) {
  if (positives.empty()) throw EmptyPositives();
  auto candidates = enumerate_candidates(positives, negatives, cfg, lexicon);
  std::vector<ScoredPattern> viable;
  for (auto& c : candidates)
    if (c.precision >= cfg.min_precision && !is_bare_wildcard(c.pattern)) viable.push_back(std::move(c));
  if (viable.empty())
    throw NoViablePattern("no candidate reaches precision " + std::to_string(cfg.min_precision));

  std::set<std::string> uncovered;
  for (const auto& e : positives)
    if (!uncovered.insert(e.sentence.id).second)
      throw PreconditionViolation("duplicate positive id '" + e.sentence.id + "'");
  std::vector<ScoredPattern> chosen;
  std::vector<bool> used(viable.size(), false);
  while (!uncovered.empty() && chosen.size() < static_cast<std::size_t>(std::max(cfg.max_patterns, 0))) {
    std::size_t best = viable.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < viable.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (const auto& id : viable[i].matched_positive_ids) gain += uncovered.count(id);
      // viable is already ranked, so the first candidate with the top gain
      // wins ties.
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == viable.size()) break;
    used[best] = true;
    for (const auto& id : viable[best].matched_positive_ids) uncovered.erase(id);
    chosen.push_back(viable[best]);
  }
  return chosen;
}

std::vector<PatternAst> synthesize_patterns(const std::vector<LabeledExample>& positives,
                                            const std::vector<LabeledExample>& negatives,
                                            const SynthesisConfig& cfg,
                                            const SynonymLexicon& lexicon) {
  std::vector<PatternAst> out;
  for (auto& s : synthesize_scored(positives, negatives, cfg, lexicon)) out.push_back(std::move(s.pattern));
  return out;
}

}  // namespace patvar
