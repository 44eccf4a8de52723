#pragma once

// Geometric Hamiltonian formulation of finite-dimensional quantum mechanics:
// quantization and dequantization between operators and functions on complex
// projective space, Monte-Carlo Liouville integration with exact
// trace-integral oracles, and entanglement measures for bipartite systems.

#include "projqm/composite.hpp"
#include "projqm/entanglement.hpp"
#include "projqm/frame_function.hpp"
#include "projqm/json_io.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"
#include "projqm/random.hpp"
#include "projqm/requantize.hpp"
#include "projqm/rng.hpp"

namespace projqm {
inline constexpr const char* kVersion = "0.1.0";
}
