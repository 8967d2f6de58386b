#include "dexparse/tag_map.hpp"

#include <spdlog/spdlog.h>

namespace dexparse {

ExtendedTag map_extended_tag(const ExtendedTag& tag, const TagMapTable& table,
                             char composite_separator) {
  // First non-empty part of a composite tag.
  std::string pos = tag.pos;
  std::size_t start = 0;
  while (start < tag.pos.size()) {
    std::size_t cut = tag.pos.find(composite_separator, start);
    if (cut == std::string::npos) cut = tag.pos.size();
    if (cut > start) {
      pos = tag.pos.substr(start, cut - start);
      break;
    }
    start = cut + 1;
  }

  ExtendedTag out;
  if (auto it = table.pos_map.find(pos); it != table.pos_map.end()) {
    out = it->second;
  } else {
    spdlog::debug("tag map: pos '{}' passes through", pos);
    out.pos = std::move(pos);
  }
  for (const auto& f : tag.features) {
    if (auto it = table.feature_map.find(f); it != table.feature_map.end()) {
      out.features.push_back(it->second);
    } else {
      out.features.push_back(f);
    }
  }
  return out;
}

TaggedSentence map_sentence(const TaggedSentence& sentence, const TagMapTable& table,
                            char composite_separator) {
  TaggedSentence out;
  out.tokens = sentence.tokens;
  out.tags.reserve(sentence.tags.size());
  for (const auto& t : sentence.tags)
    out.tags.push_back(map_extended_tag(t, table, composite_separator));
  return out;
}

TagMapTable default_tag_map() {
  TagMapTable table;
  table.pos_map = {
      {"CARDD", {"CARD", {}}}, {"DDA", {"PDAT", {}}},  {"DDART", {"ART", {}}},
      {"DIA", {"PIAT", {}}},   {"DIART", {"ART", {}}}, {"DID", {"PDAT", {}}},
      {"NA", {"NN", {}}},      {"VAPS", {"ADJD", {"Pos"}}},
  };
  return table;
}

}  // namespace dexparse
