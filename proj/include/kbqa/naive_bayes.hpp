#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kbqa {

/// Multinomial naive Bayes over bags of string features with add-alpha
/// smoothing across the training vocabulary.
class MultinomialNB {
 public:
  MultinomialNB() = default;
  MultinomialNB(std::size_t classes, double alpha);

  void add(const std::vector<std::string>& features, std::size_t label);

  std::size_t classes() const { return class_docs_.size(); }
  std::size_t documents() const;
  double alpha() const { return alpha_; }

  /// Log prior plus summed log likelihoods, one score per class.
  std::vector<double> log_scores(const std::vector<std::string>& features) const;
  /// Highest scoring class (lowest index on ties) and its log score.
  std::pair<std::size_t, double> predict(const std::vector<std::string>& features) const;

  void write(std::ostream& out) const;
  static MultinomialNB read(std::istream& in);

  friend bool operator==(const MultinomialNB&, const MultinomialNB&) = default;

 private:
  double alpha_ = 1.0;
  std::vector<std::size_t> class_docs_;
  std::vector<std::size_t> class_tokens_;
  std::map<std::string, std::vector<std::size_t>> counts_;  // feature -> per-class count
};

}  // namespace kbqa
