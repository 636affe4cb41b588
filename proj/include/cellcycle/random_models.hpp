#pragma once

#include "cellcycle/eigensolver.hpp"

#include <random>

namespace cellcycle {

/// psi_i in [1, 20], a_i in [0, 0.45], d_i in [0, 1], three phases.
ConstantCycle random_constant_cycle(std::mt19937_64& rng);

/// Three-phase cell cycle with period 1: K_i = psi_i(t) chi_[a_i, inf) where
/// psi_i is a positive trigonometric polynomial of one or two harmonics,
/// a_i in [0, 0.4], and d_i either zero, a trigonometric polynomial or a
/// shifted cos^p pulse.
PhaseModel random_periodic_cycle(std::mt19937_64& rng);

}  // namespace cellcycle
