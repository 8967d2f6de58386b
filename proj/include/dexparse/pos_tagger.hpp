#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dexparse/treebank_io.hpp"

namespace dexparse {

/// Greedy left-to-right averaged-perceptron tagger. Labels are complete
/// serialized extended tags, so POS and morphology are predicted jointly.
class TaggerModel {
 public:
  static constexpr int kVersion = 1;

  TaggerModel() = default;

  /// Parses the text checkpoint written by `save`.
  static TaggerModel load(std::string_view text);
  /// Header line, then "feature<TAB>tag<TAB>weight" sorted by feature and tag.
  std::string save() const;

  TaggedSentence tag(const std::vector<std::string>& tokens) const;

  const std::vector<std::string>& tag_inventory() const { return tags_; }
  /// Zero when the pair is unknown.
  double weight(const std::string& feature, const std::string& tag) const;
  std::size_t feature_count() const { return weights_.size(); }

 private:
  friend TaggerModel train_tagger(const std::vector<TaggedSentence>&, int, std::uint64_t);

  std::size_t predict(const std::vector<std::string>& features) const;

  std::vector<std::string> tags_;  // sorted
  // feature -> (tag index, weight), sorted by tag index
  std::unordered_map<std::string, std::vector<std::pair<int, double>>> weights_;
};

/// Per-token feature strings for position `i` given the previously
/// predicted tag.
std::vector<std::string> tagger_features(const std::vector<std::string>& tokens, std::size_t i,
                                         const std::string& previous_tag);

/// Throws Error on an empty corpus or epochs < 1.
TaggerModel train_tagger(const std::vector<TaggedSentence>& corpus, int epochs, std::uint64_t seed);

/// Fraction of tokens whose full extended tag matches.
double tagger_accuracy(const std::vector<TaggedSentence>& gold,
                       const std::vector<TaggedSentence>& pred);

}  // namespace dexparse
