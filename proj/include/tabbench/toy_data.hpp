#pragma once

#include <cstddef>
#include <cstdint>

#include "tabbench/tabular.hpp"

namespace tabbench {

// Three correlated continuous columns and an imbalanced binary target (about
// one positive in four). corr(x1, x2) = 0.8 and corr(x1, x3) = -0.6 by
// construction; the target is a noisy threshold on x1.
Table make_toy_table(std::size_t rows, std::uint64_t seed);

}  // namespace tabbench
