#pragma once

#include <cstdio>
#include <string>

#include "gecko/errors.hpp"

namespace gecko::detail {

/// 17 significant digits: the shortest fixed precision that reproduces any
/// IEEE double bit-exactly on parse. Shared by every text emitter so files
/// are byte-stable across reruns.
inline std::string fmt_real(double x) {
  if (!(x == x) || x - x != 0.0)
    throw InputError("cannot serialize non-finite real");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace gecko::detail
