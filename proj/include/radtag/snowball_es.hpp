#pragma once

#include <string>

namespace radtag {

// Snowball Spanish stemmer operating on lowercase, accent-folded input
// (the preprocessing pipeline folds accents before stemming, so the
// accented suffix variants of the published algorithm never occur here).
std::string stem_spanish(const std::string& word);

}  // namespace radtag
