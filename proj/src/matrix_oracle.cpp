#include "cellcycle/matrix_oracle.hpp"

#include "cellcycle/error.hpp"

#include <cmath>
#include <sstream>

namespace cellcycle {

NonnegMatrix::NonnegMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
    if (values_.rows() < 1 || values_.rows() != values_.cols())
        throw ValidationError("nonnegative matrix must be square with n >= 1");
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
        for (Eigen::Index i = 0; i < values_.rows(); ++i)
            if (!(values_(i, j) >= 0.0) || !std::isfinite(values_(i, j)))
                throw ValidationError("matrix entries must be finite and nonnegative");
}

double perron_root(const NonnegMatrix& a, double tol, std::size_t max_iterations)
{
    const Eigen::MatrixXd& m = a.values();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(m.rows(), 1.0 / static_cast<double>(m.rows()));
    double previous = -1.0;
    std::size_t streak = 0;
    for (std::size_t k = 0; k < max_iterations; ++k) {
        Eigen::VectorXd w = m * v;
        const double rho = w.sum();  // v has unit l1 norm and both are nonnegative
        if (rho == 0.0) return 0.0;
        const double change = (w / rho - v).lpNorm<1>();
        v = w / rho;
        streak = (std::abs(rho - previous) <= tol * rho && change <= std::sqrt(tol)) ? streak + 1 : 0;
        previous = rho;
        if (streak >= 3) return rho;
    }
    std::ostringstream os;
    os << "Perron power iteration did not converge in " << max_iterations
       << " iterations; the matrix may be reducible or periodic, add a small positive "
          "perturbation to every entry";
    throw ConvergenceError(os.str());
}

ResidualReport kingman_blend_check(const NonnegMatrix& a, const NonnegMatrix& b, double theta,
                                   KingmanMode mode, double tolerance)
{
    if (a.size() != b.size()) throw StructuralError("blended matrices differ in dimension");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("blend theta must lie in [0, 1]");
    ResidualReport report;
    report.check = mode == KingmanMode::EntrywiseGeometric ? "kingman_entrywise_geometric"
                                                           : "kingman_diag_arith_offdiag_geom";
    report.tolerance = tolerance;
    const Eigen::Index n = a.size();
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = a(i, j);
            const double y = b(i, j);
            if (mode == KingmanMode::DiagArithOffdiagGeom && i == j) {
                c(i, j) = theta * x + (1.0 - theta) * y;
            } else if ((x == 0.0 && theta > 0.0) || (y == 0.0 && theta < 1.0)) {
                c(i, j) = 0.0;
                std::ostringstream os;
                os << "zero entry (" << i << ", " << j << ") under geometric blending";
                report.warnings.push_back(os.str());
            } else {
                c(i, j) = std::pow(x, theta) * std::pow(y, 1.0 - theta);
            }
        }
    }
    const double la = std::log(perron_root(a));
    const double lb = std::log(perron_root(b));
    const double lc = std::log(perron_root(NonnegMatrix(std::move(c))));
    report.max_violation = lc - (theta * la + (1.0 - theta) * lb);
    report.integrated_violation = std::max(report.max_violation, 0.0);
    report.pass = report.max_violation <= tolerance;
    return report;
}

NonnegMatrix assemble_monodromy(const PhaseModel& model, const GridSpec& grid)
{
    const PeriodMap map(model, grid);
    const std::size_t n = map.size();
    if (n > max_monodromy_dimension) {
        std::ostringstream os;
        os << "state dimension " << n << " exceeds the dense assembly cap of "
           << max_monodromy_dimension;
        throw ValidationError(os.str());
    }
    Eigen::MatrixXd m(n, n);
    std::vector<double> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(a.begin(), a.end(), 0.0);
        a[j] = 1.0;
        double spill = 0.0;
        for (std::size_t s = 0; s < map.steps(); ++s) {
            map.step(s, a, b, spill);
            std::swap(a, b);
        }
        for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i];
    }
    return NonnegMatrix(std::move(m));
}

}  // namespace cellcycle
