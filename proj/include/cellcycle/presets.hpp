#pragma once

#include "cellcycle/phase_model.hpp"

namespace cellcycle::presets {

/// Three-phase cell cycle with period 1:
///   a = (10/24, 10/24, 2/24),
///   psi_1 = 10 (1 + 0.8 cos 2 pi t), psi_2 = 10 (1 - 0.8 cos 2 pi t), psi_3 = 10,
///   d_1 = d_3 = 0, d_2 = cos^6(pi t),
/// with K_i = psi_i chi_[a_i, inf).
PhaseModel table3();

/// psi_1 = 10 (1 + A cos 2 pi t), psi_2 = 10 (1 - A cos 2 pi t), psi_3 = 10, no deaths.
PhaseModel antiphase(double amplitude, double a1, double a2, double a3);

}  // namespace cellcycle::presets
