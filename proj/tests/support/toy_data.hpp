#pragma once

// Contents of the files shipped under data/, generated from fixed seeds.

#include <string>
#include <utility>
#include <vector>

namespace dexparse::toy_data {

inline constexpr unsigned kToySeed = 7;
inline constexpr std::size_t kToyTrees = 50;

/// (file name, contents) pairs.
std::vector<std::pair<std::string, std::string>> bundle();

}  // namespace dexparse::toy_data
