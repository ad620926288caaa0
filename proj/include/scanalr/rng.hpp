#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace scanalr {

using Engine = std::mt19937_64;

/// Engine for one stream of a seeded computation, e.g. (seed, replicate)
/// or (seed, study, replicate). Streams depend only on the ids, never on
/// which thread asks for them.
inline Engine make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (ids.size() + 1));
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto id : ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

/// A 64-bit seed for a nested seeded computation.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  return make_stream(seed, ids)();
}

/// Fills `chosen` with a uniformly random size-`count` subset of [0, total).
/// Uses a partial Fisher-Yates shuffle of `scratch` (resized to total).
inline void sample_subset(Engine& rng, std::size_t total, std::size_t count, std::vector<std::size_t>& scratch,
                          std::vector<std::size_t>& chosen) {
  scratch.resize(total);
  for (std::size_t i = 0; i < total; ++i) scratch[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(scratch[i], scratch[pick(rng)]);
  }
  chosen.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(count));
}

/// Multinomial counts with `trials` draws over categories with the given
/// probabilities (renormalized), by sequential conditional binomials.
inline void multinomial(Engine& rng, std::uint64_t trials, std::span<const double> probs, std::span<double> out) {
  double remaining_mass = 0.0;
  for (double p : probs) remaining_mass += p;
  std::uint64_t left = trials;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    std::uint64_t draw = 0;
    if (c + 1 == probs.size() || (probs[c] > 0.0 && probs[c] >= remaining_mass)) {
      draw = left;
    } else if (left > 0 && probs[c] > 0.0) {
      std::binomial_distribution<std::uint64_t> bin(left, probs[c] / remaining_mass);
      draw = bin(rng);
    }
    out[c] = static_cast<double>(draw);
    left -= draw;
    remaining_mass -= probs[c];
  }
}

}  // namespace scanalr
