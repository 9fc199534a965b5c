#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "patvar/annotation.hpp"

namespace patvar {

struct TrainingItem {
  std::string text;
  std::string label;

  bool operator==(const TrainingItem&) const = default;
};

struct Prediction {
  std::string label;
  double confidence = 0.0;  // in [0, 1]
};

/// Text classifier contract used by the simulation. Implementations must be
/// deterministic for identical training data.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void train(const std::vector<TrainingItem>& items) = 0;
  virtual Prediction predict(std::string_view text) const = 0;
  virtual bool trained() const = 0;
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>()>;

/// Bag-of-words features: lemmas of alphanumeric tokens when a provider is
/// given, otherwise lowercase alphanumeric runs.
std::vector<std::string> bag_of_words(std::string_view text, const AnnotationProvider* provider);

/// Multinomial naive Bayes with add-one smoothing. Tokens not seen in
/// training are ignored. Ties go to the earlier label in label_set;
/// confidence is the normalized posterior of the winner.
class NaiveBayesClassifier final : public Classifier {
 public:
  explicit NaiveBayesClassifier(std::vector<std::string> label_set,
                                const AnnotationProvider* provider = nullptr);

  void train(const std::vector<TrainingItem>& items) override;
  Prediction predict(std::string_view text) const override;
  bool trained() const override { return trained_; }

  /// Posterior over label_set in label_set order.
  std::vector<double> posterior(std::string_view text) const;

 private:
  std::vector<std::string> labels_;
  const AnnotationProvider* provider_;
  bool trained_ = false;
  std::vector<double> log_prior_;
  std::vector<std::map<std::string, double, std::less<>>> counts_;
  std::vector<double> totals_;
  std::map<std::string, int, std::less<>> vocab_;
};

}  // namespace patvar
