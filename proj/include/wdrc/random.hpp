#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wdrc {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-trial and
/// per-rollout streams from one master seed.
std::uint64_t mix_seed(std::uint64_t x);

/// Folds the components into the master seed. Order matters.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

}  // namespace wdrc
