#pragma once

#include <memory>

#include "geoprove/tool.hpp"

namespace geoprove {

/// Adds the primitive tools (constructions, exact and coexact predicates,
/// angle_compute, ...) to `registry`.
void register_builtins(Registry& registry);

/// Shared immutable registry holding only the primitive tools.
std::shared_ptr<const Registry> builtin_registry();

}  // namespace geoprove
