#pragma once

#include "cellcycle/eigensolver.hpp"
#include "cellcycle/report.hpp"

#include <span>
#include <vector>

namespace cellcycle {

/// Periodic solution of the discrete adjoint problem
///   phi_m = exp(-lambda dt) S_m^T phi_{m+1},  phi_steps = phi_0,
/// where S_m is the forward step. Normalized so that dt * <N(0), phi(0)> = 1.
struct DualEigenfunction {
    double lambda = 0.0;               // forward eigenvalue used for compensation
    double adjoint_lambda = 0.0;       // log(adjoint growth per period) / T
    GridSpec grid;
    std::size_t phases = 0;
    std::vector<double> samples;       // phi at t = m * dt, m = 0 .. steps-1
    std::size_t iterations = 0;
    bool converged = false;

    std::span<const double> sample(std::size_t m) const;
};

struct DualOptions {
    double tol = 1e-10;
    std::size_t max_periods = 4000;
    bool strict = false;
};

/// Backward power iteration on the adjoint period map. `forward` must carry
/// eigenfunction samples computed on `grid`.
DualEigenfunction adjoint_eigenfunction(const PhaseModel& model, const GridSpec& grid,
                                        const EigenResult& forward, const DualOptions& options = {});

/// Relative drift of W_k = dt <phi_0, n(kT)> exp(-lambda k T) across `periods`
/// periods started from `initial`. max_violation is the largest
/// |W_k - W_{k-1}| / W_{k-1}.
ResidualReport check_conservation(const PhaseModel& model, const GridSpec& grid, double lambda,
                                  const PopulationState& initial, const DualEigenfunction& phi,
                                  std::size_t periods, double tolerance);

/// Discrete residual of the subeigenfunction inequality
///   r_m[k] = (1 - exp(-mu dt) (S_m^T phi_{m+1})[k] / phi_m[k]) / dt >= 0,
/// which is phi^-1 (-d_t phi - d_x phi + (loss + mu) phi - B phi(t, 0)) on
/// the grid. max_violation is max(-r).
ResidualReport check_subeigen_inequality(const PhaseModel& model, const GridSpec& grid, double mu,
                                         std::span<const double> phi, double tolerance);
ResidualReport check_subeigen_inequality(const PhaseModel& model, const GridSpec& grid, double mu,
                                         const DualEigenfunction& phi, double tolerance);

struct LemmaInputs {
    EigenResult forward;
    DualEigenfunction dual;
};

/// Eigenvalue and adjoint eigenfunction of a model on a grid.
LemmaInputs dual_pair(const PhaseModel& model, const GridSpec& grid,
                      const EigenOptions& eigen = {}, const DualOptions& dual = {});

/// Checks that phi^theta = phi1^theta phi2^(1-theta) is a subeigenfunction
/// of blend_models(m1, m2, theta) for mu = theta lambda1 + (1-theta) lambda2.
ResidualReport check_lemma_blend(const PhaseModel& m1, const PhaseModel& m2, double theta,
                                 const GridSpec& grid, double tolerance = 1e-6);
ResidualReport check_lemma_blend(const PhaseModel& m1, const LemmaInputs& p1,
                                 const PhaseModel& m2, const LemmaInputs& p2, double theta,
                                 const GridSpec& grid, double tolerance = 1e-6);

}  // namespace cellcycle
