#include "patvar/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "patvar/error.hpp"
#include "patvar/strings.hpp"

namespace patvar {

std::vector<std::string> bag_of_words(std::string_view text, const AnnotationProvider* provider) {
  std::vector<std::string> out;
  if (provider) {
    if (str::is_blank(text)) return out;
    for (const auto& tok : annotate(text, *provider).tokens)
      if (str::contains_alnum(tok.surface)) out.push_back(tok.lemma);
    return out;
  }
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

NaiveBayesClassifier::NaiveBayesClassifier(std::vector<std::string> label_set,
                                           const AnnotationProvider* provider)
    : labels_(std::move(label_set)), provider_(provider) {
  if (labels_.empty()) throw PreconditionViolation("classifier needs a non-empty label set");
}

void NaiveBayesClassifier::train(const std::vector<TrainingItem>& items) {
  if (items.empty()) throw EmptyTrainingSet();
  const auto k = labels_.size();
  std::vector<double> docs(k, 0.0);
  counts_.assign(k, {});
  totals_.assign(k, 0.0);
  vocab_.clear();
  for (const auto& item : items) {
    auto it = std::find(labels_.begin(), labels_.end(), item.label);
    if (it == labels_.end()) throw UnknownLabel("training label '" + item.label + "'");
    const auto c = static_cast<std::size_t>(it - labels_.begin());
    docs[c] += 1.0;
    for (auto& w : bag_of_words(item.text, provider_)) {
      counts_[c][w] += 1.0;
      totals_[c] += 1.0;
      vocab_.emplace(std::move(w), 0);
    }
  }
  log_prior_.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c)
    if (docs[c] > 0) log_prior_[c] = std::log(docs[c] / static_cast<double>(items.size()));
  trained_ = true;
}

std::vector<double> NaiveBayesClassifier::posterior(std::string_view text) const {
  if (!trained_) throw UntrainedClassifier();
  const auto k = labels_.size();
  const double v = static_cast<double>(vocab_.size());
  std::vector<double> score(log_prior_);
  for (const auto& w : bag_of_words(text, provider_)) {
    if (!vocab_.count(w)) continue;
    for (std::size_t c = 0; c < k; ++c) {
      if (std::isinf(score[c])) continue;
      auto it = counts_[c].find(w);
      const double n = it == counts_[c].end() ? 0.0 : it->second;
      score[c] += std::log((n + 1.0) / (totals_[c] + v));
    }
  }
  const double top = *std::max_element(score.begin(), score.end());
  std::vector<double> p(k, 0.0);
  double z = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    p[c] = std::isinf(score[c]) ? 0.0 : std::exp(score[c] - top);
    z += p[c];
  }
  for (auto& x : p) x /= z;
  return p;
}

Prediction NaiveBayesClassifier::predict(std::string_view text) const {
  auto p = posterior(text);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return {labels_[best], p[best]};
}

}  // namespace patvar
