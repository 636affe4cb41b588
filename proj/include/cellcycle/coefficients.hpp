#pragma once

// Declarative, exactly evaluable T-periodic rate coefficients c(t, x).
//
// A Coefficient is an immutable tree of descriptor nodes. Time-dependent
// leaves carry the period they were built for; time-independent subtrees
// (constants, age indicators, frozen averages) report period() == 0 and may
// be combined with anything. Age dependence only ever enters through
// AgeIndicator leaves, so every coefficient is piecewise constant in age with
// breakpoints at the indicator thresholds; the solver relies on that to
// compute exact cell averages.

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cellcycle {

enum class AverageMode { Arithmetic, Geometric };

struct TrigTerm {
    double amplitude = 0.0;
    int harmonic = 1;
    double phase = 0.0;  // time offset: cos(2*pi*k*(t + phase)/T)
};

class Coefficient {
public:
    struct Node;

    /// Identically zero rate.
    Coefficient();

    static Coefficient constant(double value);
    static Coefficient trig_poly(double period, double base, std::vector<TrigTerm> terms);
    static Coefficient cos_power(double period, double scale, int power,
                                 double angular_frequency, double phase);
    static Coefficient age_indicator(double threshold);
    static Coefficient piecewise_time(double period,
                                      std::vector<std::pair<double, double>> breakpoints);
    static Coefficient product(std::vector<Coefficient> factors);
    static Coefficient sum(std::vector<std::pair<double, Coefficient>> terms);

    double operator()(double t, double x) const;

    /// 0 for coefficients that do not depend on time.
    double period() const { return period_; }
    bool time_independent() const { return period_ == 0.0; }

    /// Sorted, unique AgeIndicator thresholds appearing in the tree.
    std::vector<double> age_breakpoints() const;

    /// True when the tree is structurally the constant 0.
    bool is_structural_zero() const;

    /// Diagnostics recorded by frozen geometric averages (zero birth values).
    std::vector<std::string> warnings() const;

    /// Short human-readable description used in error messages.
    std::string describe() const;

    const Node& node() const { return *node_; }

    friend bool operator==(const Coefficient& a, const Coefficient& b);

private:
    Coefficient(std::shared_ptr<const Node> node, double period);

    std::shared_ptr<const Node> node_;
    double period_ = 0.0;

    friend Coefficient phase_shift(const Coefficient& spec, double offset);
    friend Coefficient time_average(const Coefficient& spec, AverageMode mode,
                                    int quadrature_points);
    friend Coefficient arithmetic_blend(const Coefficient& a, const Coefficient& b,
                                        double theta);
    friend Coefficient geometric_blend(const Coefficient& a, const Coefficient& b,
                                       double theta);
};

namespace node {

struct Constant {
    double value;
};

struct TrigPoly {
    double base;
    std::vector<TrigTerm> terms;
};

/// scale * cos^power(angular_frequency * t + phase); power is even.
struct CosPower {
    double scale;
    int power;
    double angular_frequency;
    double phase;
};

/// chi_[threshold, inf)(x)
struct AgeIndicator {
    double threshold;
};

/// Periodic step function; breakpoints sorted by time within [0, T). The
/// value before the first breakpoint wraps around from the last one.
struct PiecewiseTime {
    std::vector<std::pair<double, double>> breakpoints;
};

struct Product {
    std::vector<Coefficient> factors;
};

/// Nonnegative linear combination; realizes d + K, 2K and arithmetic blends.
struct Sum {
    std::vector<std::pair<double, Coefficient>> terms;
};

struct Shifted {
    Coefficient inner;
    double offset;
};

/// Time average of `inner`, tabulated per age piece at construction.
struct Frozen {
    Coefficient inner;
    AverageMode mode;
    int quadrature_points;
    std::vector<double> breakpoints;  // pieces (-inf,b0), [b0,b1), ..., [bn-1,inf)
    std::vector<double> values;       // one per piece
    std::vector<std::string> warnings;
};

/// first^theta * second^(1 - theta)
struct GeometricBlend {
    Coefficient first;
    Coefficient second;
    double theta;
};

}  // namespace node

struct Coefficient::Node {
    std::variant<node::Constant, node::TrigPoly, node::CosPower, node::AgeIndicator,
                 node::PiecewiseTime, node::Product, node::Sum, node::Shifted, node::Frozen,
                 node::GeometricBlend>
        data;
};

inline double eval(const Coefficient& spec, double t, double x) { return spec(t, x); }

/// Time of the q-th midpoint quadrature node over one period. The solver
/// samples step m at exactly this time, so a frozen average sampled by the
/// solver is the discrete average of the original's samples.
inline double midpoint_time(std::size_t index, std::size_t points, double period)
{
    return (static_cast<double>(index) + 0.5) * (period / static_cast<double>(points));
}

Coefficient time_average(const Coefficient& spec, AverageMode mode, int quadrature_points);

inline Coefficient arithmetic_time_average(const Coefficient& spec, int quadrature_points)
{
    return time_average(spec, AverageMode::Arithmetic, quadrature_points);
}

/// exp(T^-1 int log c dt) per age. Ages where some quadrature node is zero
/// map to 0 and record a warning.
inline Coefficient geometric_time_average(const Coefficient& spec, int quadrature_points)
{
    return time_average(spec, AverageMode::Geometric, quadrature_points);
}

/// eval(result, t, x) == eval(spec, t + offset, x). Offsets outside [0, T)
/// are reduced modulo T.
Coefficient phase_shift(const Coefficient& spec, double offset);

/// theta * a + (1 - theta) * b; returns a or b unchanged at theta in {0, 1}
/// and when a == b.
Coefficient arithmetic_blend(const Coefficient& a, const Coefficient& b, double theta);

/// a^theta * b^(1 - theta); same exactness guarantees as arithmetic_blend.
Coefficient geometric_blend(const Coefficient& a, const Coefficient& b, double theta);

}  // namespace cellcycle
