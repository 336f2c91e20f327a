#pragma once

#include <string>

#include "decomposer/errors.hpp"

namespace decomposer {

template <typename A, typename B>
void require_same_extent(const A& a, const B& b, std::string_view what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionError(std::string(what) + ": extent mismatch (" + std::to_string(a.height()) +
                         "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                         "x" + std::to_string(b.width()) + ")");
  }
}

}  // namespace decomposer
