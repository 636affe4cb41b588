#pragma once

#include "cellcycle/report.hpp"
#include "cellcycle/transport.hpp"

#include <Eigen/Dense>

namespace cellcycle {

/// Dense square matrix with nonnegative entries.
class NonnegMatrix {
public:
    explicit NonnegMatrix(Eigen::MatrixXd values);

    Eigen::Index size() const { return values_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
    const Eigen::MatrixXd& values() const { return values_; }

private:
    Eigen::MatrixXd values_;
};

/// Dominant eigenvalue by power iteration with l1 normalization; converged
/// when successive estimates agree to `tol` relative.
double perron_root(const NonnegMatrix& a, double tol = 1e-12, std::size_t max_iterations = 1000000);

enum class KingmanMode {
    EntrywiseGeometric,    // C = A^theta B^(1-theta) entrywise
    DiagArithOffdiagGeom,  // arithmetic on the diagonal, geometric off it
};

/// Reports max_violation = log rho(C) - theta log rho(A) - (1-theta) log rho(B).
ResidualReport kingman_blend_check(const NonnegMatrix& a, const NonnegMatrix& b, double theta,
                                   KingmanMode mode, double tolerance = 1e-10);

inline constexpr std::size_t max_monodromy_dimension = 4096;

/// One-period map as a dense matrix: column j is the image of basis state j.
NonnegMatrix assemble_monodromy(const PhaseModel& model, const GridSpec& grid);

}  // namespace cellcycle
