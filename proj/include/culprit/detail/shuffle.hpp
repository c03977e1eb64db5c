#pragma once

#include <random>
#include <utility>
#include <vector>

namespace culprit::detail {

// Fisher-Yates with explicit uniform draws, so the permutation for a given
// seed does not depend on the standard library's std::shuffle.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
}

}  // namespace culprit::detail
