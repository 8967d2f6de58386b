#pragma once

#include "dexparse/treebank_io.hpp"

namespace dexparse {

/// Maps a historical tag onto the modern inventory. A composite POS
/// ("APPR|NA") keeps only its first part. Features carried by the mapped POS
/// entry come first, followed by the (mapped) source features. Anything not
/// in the table passes through unchanged.
ExtendedTag map_extended_tag(const ExtendedTag& tag, const TagMapTable& table,
                             char composite_separator = '|');

TaggedSentence map_sentence(const TaggedSentence& sentence, const TagMapTable& table,
                            char composite_separator = '|');

/// The eight documented HiTS -> STTS pairs; features map to themselves.
TagMapTable default_tag_map();

}  // namespace dexparse
