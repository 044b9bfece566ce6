#include "kbqa/naive_bayes.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "kbqa/error.hpp"

namespace kbqa {

MultinomialNB::MultinomialNB(std::size_t classes, double alpha)
    : alpha_(alpha), class_docs_(classes, 0), class_tokens_(classes, 0) {
  if (alpha <= 0.0) throw std::invalid_argument("naive Bayes smoothing must be positive");
  if (classes == 0) throw std::invalid_argument("naive Bayes needs at least one class");
}

void MultinomialNB::add(const std::vector<std::string>& features, std::size_t label) {
  if (label >= classes()) throw std::out_of_range("naive Bayes label out of range");
  ++class_docs_[label];
  for (const auto& f : features) {
    auto& row = counts_[f];
    if (row.empty()) row.assign(classes(), 0);
    ++row[label];
    ++class_tokens_[label];
  }
}

std::size_t MultinomialNB::documents() const {
  return std::accumulate(class_docs_.begin(), class_docs_.end(), std::size_t{0});
}

std::vector<double> MultinomialNB::log_scores(const std::vector<std::string>& features) const {
  const auto n_docs = documents();
  if (n_docs == 0) throw std::logic_error("naive Bayes model has no training documents");
  const auto vocab = static_cast<double>(counts_.size());
  std::vector<double> scores(classes());
  for (std::size_t c = 0; c < classes(); ++c) {
    if (class_docs_[c] == 0) {
      scores[c] = -INFINITY;
      continue;
    }
    const double denom = static_cast<double>(class_tokens_[c]) + alpha_ * vocab;
    double s = std::log(static_cast<double>(class_docs_[c]) / static_cast<double>(n_docs));
    for (const auto& f : features) {
      auto it = counts_.find(f);
      const double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second[c]);
      s += std::log((count + alpha_) / denom);
    }
    scores[c] = s;
  }
  return scores;
}

std::pair<std::size_t, double> MultinomialNB::predict(const std::vector<std::string>& features) const {
  const auto scores = log_scores(features);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return {best, scores[best]};
}

void MultinomialNB::write(std::ostream& out) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", alpha_);
  out << "nb " << classes() << ' ' << buf << ' ' << counts_.size() << '\n';
  for (auto v : class_docs_) out << v << ' ';
  out << '\n';
  for (auto v : class_tokens_) out << v << ' ';
  out << '\n';
  for (const auto& [feature, row] : counts_) {
    out << feature;
    for (auto v : row) out << ' ' << v;
    out << '\n';
  }
}

MultinomialNB MultinomialNB::read(std::istream& in) {
  std::string tag;
  std::size_t classes = 0, features = 0;
  std::string alpha;
  if (!(in >> tag >> classes >> alpha >> features) || tag != "nb")
    throw DomainError("model file: expected naive Bayes section");
  MultinomialNB nb(classes, std::stod(alpha));
  for (auto& v : nb.class_docs_) in >> v;
  for (auto& v : nb.class_tokens_) in >> v;
  for (std::size_t i = 0; i < features; ++i) {
    std::string feature;
    in >> feature;
    auto& row = nb.counts_[feature];
    row.assign(classes, 0);
    for (auto& v : row) in >> v;
  }
  if (!in) throw DomainError("model file: truncated naive Bayes section");
  return nb;
}

}  // namespace kbqa
