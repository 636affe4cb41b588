#include "cellcycle/coefficients.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cellcycle {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double wrap_time(double t, double period)
{
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    if (r >= period) r = 0.0;
    return r;
}

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

void require_nonnegative(double v, const char* what)
{
    require_finite(v, what);
    if (v < 0.0) {
        std::ostringstream os;
        os << what << " must be nonnegative (got " << v << ")";
        throw ValidationError(os.str());
    }
}

void require_period(double period)
{
    if (!(period > 0.0) || !std::isfinite(period))
        throw ValidationError("period must be positive and finite");
}

bool same_period(double a, double b)
{
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

double common_period(double acc, double p)
{
    if (p == 0.0) return acc;
    if (acc == 0.0) return p;
    if (!same_period(acc, p)) {
        std::ostringstream os;
        os << "cannot combine coefficients with periods " << acc << " and " << p;
        throw StructuralError(os.str());
    }
    return acc;
}

double int_pow(double base, int power)
{
    double r = 1.0;
    for (int i = 0; i < power; ++i) r *= base;
    return r;
}

// Representative ages for the pieces of a piecewise-constant age profile.
std::vector<double> piece_representatives(const std::vector<double>& breakpoints)
{
    std::vector<double> xs;
    if (breakpoints.empty()) {
        xs.push_back(0.0);
        return xs;
    }
    xs.push_back(breakpoints.front() > 0.0 ? 0.5 * breakpoints.front() : breakpoints.front() - 1.0);
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        xs.push_back(0.5 * (breakpoints[i - 1] + breakpoints[i]));
    xs.push_back(breakpoints.back() + 1.0);
    return xs;
}

}  // namespace

Coefficient::Coefficient() : Coefficient(std::make_shared<Node>(Node{node::Constant{0.0}}), 0.0) {}

Coefficient::Coefficient(std::shared_ptr<const Node> node, double period)
    : node_(std::move(node)), period_(period)
{
}

Coefficient Coefficient::constant(double value)
{
    require_nonnegative(value, "constant rate");
    return Coefficient(std::make_shared<Node>(Node{node::Constant{value}}), 0.0);
}

Coefficient Coefficient::trig_poly(double period, double base, std::vector<TrigTerm> terms)
{
    require_period(period);
    require_finite(base, "trig_poly base");
    double bound = 0.0;
    for (const auto& term : terms) {
        require_finite(term.amplitude, "trig_poly amplitude");
        require_finite(term.phase, "trig_poly phase");
        if (term.harmonic < 1) throw ValidationError("trig_poly harmonic must be a positive integer");
        bound += std::abs(term.amplitude);
    }
    const double effective_period = terms.empty() ? 0.0 : period;
    Coefficient c(std::make_shared<Node>(Node{node::TrigPoly{base, std::move(terms)}}),
                  effective_period);
    const auto& stored = std::get<node::TrigPoly>(c.node().data);
    if (base < bound) {
        // Not obviously nonnegative: sample densely.
        int max_harmonic = 1;
        for (const auto& term : stored.terms) max_harmonic = std::max(max_harmonic, term.harmonic);
        const int samples = 4096 * max_harmonic;
        for (int i = 0; i < samples; ++i) {
            const double t = period * i / samples;
            double v = base;
            for (const auto& term : stored.terms)
                v += term.amplitude *
                     std::cos(2.0 * std::numbers::pi * term.harmonic * (t + term.phase) / period);
            if (v < -1e-12 * (std::abs(base) + bound)) {
                std::ostringstream os;
                os << "trig_poly(base=" << base << ") evaluates negative (" << v << ") at t=" << t;
                throw ValidationError(os.str());
            }
        }
    }
    return c;
}

Coefficient Coefficient::cos_power(double period, double scale, int power,
                                   double angular_frequency, double phase)
{
    require_period(period);
    require_nonnegative(scale, "cos_power scale");
    require_finite(angular_frequency, "cos_power angular_frequency");
    require_finite(phase, "cos_power phase");
    if (power < 2 || power % 2 != 0)
        throw ValidationError("cos_power power must be a positive even integer");
    const double cycles = angular_frequency * period / std::numbers::pi;
    if (std::abs(cycles - std::round(cycles)) > 1e-9) {
        std::ostringstream os;
        os << "cos_power(angular_frequency=" << angular_frequency
           << ") is not periodic with period " << period;
        throw ValidationError(os.str());
    }
    const double p = std::round(cycles) == 0.0 ? 0.0 : period;
    return Coefficient(
        std::make_shared<Node>(Node{node::CosPower{scale, power, angular_frequency, phase}}), p);
}

Coefficient Coefficient::age_indicator(double threshold)
{
    require_nonnegative(threshold, "age_indicator threshold");
    return Coefficient(std::make_shared<Node>(Node{node::AgeIndicator{threshold}}), 0.0);
}

Coefficient Coefficient::piecewise_time(double period,
                                        std::vector<std::pair<double, double>> breakpoints)
{
    require_period(period);
    if (breakpoints.empty()) throw ValidationError("piecewise_time needs at least one breakpoint");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        const auto [t, rate] = breakpoints[i];
        require_finite(t, "piecewise_time breakpoint time");
        require_nonnegative(rate, "piecewise_time rate");
        if (t < 0.0 || t >= period)
            throw ValidationError("piecewise_time breakpoint times must lie in [0, T)");
        if (i > 0 && !(t > breakpoints[i - 1].first))
            throw ValidationError("piecewise_time breakpoint times must be strictly increasing");
    }
    return Coefficient(std::make_shared<Node>(Node{node::PiecewiseTime{std::move(breakpoints)}}),
                       period);
}

Coefficient Coefficient::product(std::vector<Coefficient> factors)
{
    if (factors.empty()) throw ValidationError("product needs at least one factor");
    if (factors.size() == 1) return factors.front();
    double period = 0.0;
    for (const auto& f : factors) period = common_period(period, f.period());
    return Coefficient(std::make_shared<Node>(Node{node::Product{std::move(factors)}}), period);
}

Coefficient Coefficient::sum(std::vector<std::pair<double, Coefficient>> terms)
{
    if (terms.empty()) return Coefficient();
    double period = 0.0;
    for (const auto& [w, c] : terms) {
        require_nonnegative(w, "sum weight");
        period = common_period(period, c.period());
    }
    if (terms.size() == 1 && terms.front().first == 1.0) return terms.front().second;
    return Coefficient(std::make_shared<Node>(Node{node::Sum{std::move(terms)}}), period);
}

double Coefficient::operator()(double t, double x) const
{
    const double period = period_;
    return std::visit(
        Overloaded{
            [](const node::Constant& n) { return n.value; },
            [&](const node::TrigPoly& n) {
                const double tau = wrap_time(t, period);
                double v = n.base;
                for (const auto& term : n.terms)
                    v += term.amplitude * std::cos(2.0 * std::numbers::pi * term.harmonic *
                                                   (tau + term.phase) / period);
                return std::max(v, 0.0);
            },
            [&](const node::CosPower& n) {
                const double tau = period > 0.0 ? wrap_time(t, period) : t;
                return n.scale * int_pow(std::cos(n.angular_frequency * tau + n.phase), n.power);
            },
            [&](const node::AgeIndicator& n) { return x >= n.threshold ? 1.0 : 0.0; },
            [&](const node::PiecewiseTime& n) {
                const double tau = wrap_time(t, period);
                auto it = std::upper_bound(
                    n.breakpoints.begin(), n.breakpoints.end(), tau,
                    [](double value, const auto& bp) { return value < bp.first; });
                if (it == n.breakpoints.begin()) return n.breakpoints.back().second;
                return std::prev(it)->second;
            },
            [&](const node::Product& n) {
                double v = 1.0;
                for (const auto& f : n.factors) v *= f(t, x);
                return v;
            },
            [&](const node::Sum& n) {
                double v = 0.0;
                for (const auto& [w, c] : n.terms) v += w * c(t, x);
                return v;
            },
            [&](const node::Shifted& n) { return n.inner(t + n.offset, x); },
            [&](const node::Frozen& n) {
                const auto it = std::upper_bound(n.breakpoints.begin(), n.breakpoints.end(), x);
                return n.values[static_cast<std::size_t>(it - n.breakpoints.begin())];
            },
            [&](const node::GeometricBlend& n) {
                return std::pow(n.first(t, x), n.theta) * std::pow(n.second(t, x), 1.0 - n.theta);
            },
        },
        node_->data);
}

std::vector<double> Coefficient::age_breakpoints() const
{
    std::vector<double> out;
    auto append = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
    std::visit(Overloaded{
                   [&](const node::AgeIndicator& n) { out.push_back(n.threshold); },
                   [&](const node::Product& n) {
                       for (const auto& f : n.factors) append(f.age_breakpoints());
                   },
                   [&](const node::Sum& n) {
                       for (const auto& [w, c] : n.terms) append(c.age_breakpoints());
                   },
                   [&](const node::Shifted& n) { append(n.inner.age_breakpoints()); },
                   [&](const node::Frozen& n) { append(n.breakpoints); },
                   [&](const node::GeometricBlend& n) {
                       append(n.first.age_breakpoints());
                       append(n.second.age_breakpoints());
                   },
                   [](const auto&) {},
               },
               node_->data);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Coefficient::is_structural_zero() const
{
    return std::visit(
        Overloaded{
            [](const node::Constant& n) { return n.value == 0.0; },
            [](const node::TrigPoly& n) { return n.base == 0.0 && n.terms.empty(); },
            [](const node::CosPower& n) { return n.scale == 0.0; },
            [](const node::AgeIndicator&) { return false; },
            [](const node::PiecewiseTime& n) {
                return std::all_of(n.breakpoints.begin(), n.breakpoints.end(),
                                   [](const auto& bp) { return bp.second == 0.0; });
            },
            [](const node::Product& n) {
                return std::any_of(n.factors.begin(), n.factors.end(),
                                   [](const Coefficient& f) { return f.is_structural_zero(); });
            },
            [](const node::Sum& n) {
                return std::all_of(n.terms.begin(), n.terms.end(), [](const auto& term) {
                    return term.first == 0.0 || term.second.is_structural_zero();
                });
            },
            [](const node::Shifted& n) { return n.inner.is_structural_zero(); },
            [](const node::Frozen& n) {
                return std::all_of(n.values.begin(), n.values.end(),
                                   [](double v) { return v == 0.0; });
            },
            [](const node::GeometricBlend& n) {
                return (n.theta > 0.0 && n.first.is_structural_zero()) ||
                       (n.theta < 1.0 && n.second.is_structural_zero());
            },
        },
        node_->data);
}

std::vector<std::string> Coefficient::warnings() const
{
    std::vector<std::string> out;
    auto append = [&out](const std::vector<std::string>& v) {
        out.insert(out.end(), v.begin(), v.end());
    };
    std::visit(Overloaded{
                   [&](const node::Product& n) {
                       for (const auto& f : n.factors) append(f.warnings());
                   },
                   [&](const node::Sum& n) {
                       for (const auto& [w, c] : n.terms) append(c.warnings());
                   },
                   [&](const node::Shifted& n) { append(n.inner.warnings()); },
                   [&](const node::Frozen& n) {
                       append(n.warnings);
                       append(n.inner.warnings());
                   },
                   [&](const node::GeometricBlend& n) {
                       append(n.first.warnings());
                       append(n.second.warnings());
                   },
                   [](const auto&) {},
               },
               node_->data);
    return out;
}

std::string Coefficient::describe() const
{
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const node::Constant& n) { os << "constant(" << n.value << ")"; },
                   [&](const node::TrigPoly& n) {
                       os << "trig_poly(base=" << n.base;
                       for (const auto& term : n.terms)
                           os << ", " << term.amplitude << "*cos[k=" << term.harmonic
                              << ", phase=" << term.phase << "]";
                       os << ")";
                   },
                   [&](const node::CosPower& n) {
                       os << "cos_power(scale=" << n.scale << ", power=" << n.power
                          << ", omega=" << n.angular_frequency << ", phase=" << n.phase << ")";
                   },
                   [&](const node::AgeIndicator& n) { os << "age_indicator(" << n.threshold << ")"; },
                   [&](const node::PiecewiseTime& n) {
                       os << "piecewise_time(" << n.breakpoints.size() << " breakpoints)";
                   },
                   [&](const node::Product& n) {
                       os << "product(";
                       for (std::size_t i = 0; i < n.factors.size(); ++i)
                           os << (i ? ", " : "") << n.factors[i].describe();
                       os << ")";
                   },
                   [&](const node::Sum& n) {
                       os << "sum(";
                       for (std::size_t i = 0; i < n.terms.size(); ++i)
                           os << (i ? ", " : "") << n.terms[i].first << "*"
                              << n.terms[i].second.describe();
                       os << ")";
                   },
                   [&](const node::Shifted& n) {
                       os << "shifted(" << n.inner.describe() << ", " << n.offset << ")";
                   },
                   [&](const node::Frozen& n) {
                       os << (n.mode == AverageMode::Arithmetic ? "arithmetic" : "geometric")
                          << "_average(" << n.inner.describe() << ")";
                   },
                   [&](const node::GeometricBlend& n) {
                       os << "geometric_blend(" << n.first.describe() << ", "
                          << n.second.describe() << ", " << n.theta << ")";
                   },
               },
               node_->data);
    return os.str();
}

bool operator==(const Coefficient& a, const Coefficient& b)
{
    if (a.node_ == b.node_) return a.period_ == b.period_;
    if (a.period_ != b.period_ || a.node_->data.index() != b.node_->data.index()) return false;
    const auto& bd = b.node_->data;
    return std::visit(
        Overloaded{
            [&](const node::Constant& n) { return n.value == std::get<node::Constant>(bd).value; },
            [&](const node::TrigPoly& n) {
                const auto& m = std::get<node::TrigPoly>(bd);
                if (n.base != m.base || n.terms.size() != m.terms.size()) return false;
                for (std::size_t i = 0; i < n.terms.size(); ++i) {
                    if (n.terms[i].amplitude != m.terms[i].amplitude ||
                        n.terms[i].harmonic != m.terms[i].harmonic ||
                        n.terms[i].phase != m.terms[i].phase)
                        return false;
                }
                return true;
            },
            [&](const node::CosPower& n) {
                const auto& m = std::get<node::CosPower>(bd);
                return n.scale == m.scale && n.power == m.power &&
                       n.angular_frequency == m.angular_frequency && n.phase == m.phase;
            },
            [&](const node::AgeIndicator& n) {
                return n.threshold == std::get<node::AgeIndicator>(bd).threshold;
            },
            [&](const node::PiecewiseTime& n) {
                return n.breakpoints == std::get<node::PiecewiseTime>(bd).breakpoints;
            },
            [&](const node::Product& n) {
                return n.factors == std::get<node::Product>(bd).factors;
            },
            [&](const node::Sum& n) { return n.terms == std::get<node::Sum>(bd).terms; },
            [&](const node::Shifted& n) {
                const auto& m = std::get<node::Shifted>(bd);
                return n.offset == m.offset && n.inner == m.inner;
            },
            [&](const node::Frozen& n) {
                const auto& m = std::get<node::Frozen>(bd);
                return n.mode == m.mode && n.quadrature_points == m.quadrature_points &&
                       n.inner == m.inner;
            },
            [&](const node::GeometricBlend& n) {
                const auto& m = std::get<node::GeometricBlend>(bd);
                return n.theta == m.theta && n.first == m.first && n.second == m.second;
            },
        },
        a.node_->data);
}

Coefficient time_average(const Coefficient& spec, AverageMode mode, int quadrature_points)
{
    if (quadrature_points < 2) throw ValidationError("quadrature_points must be at least 2");
    if (spec.time_independent()) return spec;

    const double period = spec.period();
    const auto points = static_cast<std::size_t>(quadrature_points);
    node::Frozen frozen{spec, mode, quadrature_points, spec.age_breakpoints(), {}, {}};
    const auto xs = piece_representatives(frozen.breakpoints);
    for (std::size_t p = 0; p < xs.size(); ++p) {
        double acc = 0.0;
        bool zero = false;
        bool positive = false;
        for (std::size_t q = 0; q < points; ++q) {
            const double v = spec(midpoint_time(q, points, period), xs[p]);
            if (mode == AverageMode::Arithmetic) {
                acc += v;
            } else if (v > 0.0) {
                acc += std::log(v);
                positive = true;
            } else {
                zero = true;
            }
        }
        acc /= static_cast<double>(points);
        if (mode == AverageMode::Geometric) {
            if (zero && positive) {
                std::ostringstream os;
                os << "geometric average of " << spec.describe() << " is 0 on age piece " << p
                   << " (rate vanishes at some quadrature node)";
                frozen.warnings.push_back(os.str());
                acc = 0.0;
            } else if (zero) {
                acc = 0.0;
            } else {
                acc = std::exp(acc);
            }
        }
        frozen.values.push_back(acc);
    }
    return Coefficient(std::make_shared<Coefficient::Node>(Coefficient::Node{std::move(frozen)}),
                       0.0);
}

Coefficient phase_shift(const Coefficient& spec, double offset)
{
    require_finite(offset, "phase offset");
    if (spec.time_independent()) return spec;
    const double period = spec.period();
    if (const auto* shifted = std::get_if<node::Shifted>(&spec.node().data)) {
        const double total = wrap_time(shifted->offset + offset, period);
        if (total == 0.0) return shifted->inner;
        return Coefficient(
            std::make_shared<Coefficient::Node>(Coefficient::Node{node::Shifted{shifted->inner, total}}),
            period);
    }
    const double reduced = wrap_time(offset, period);
    if (reduced == 0.0) return spec;
    return Coefficient(
        std::make_shared<Coefficient::Node>(Coefficient::Node{node::Shifted{spec, reduced}}), period);
}

Coefficient arithmetic_blend(const Coefficient& a, const Coefficient& b, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("blend theta must lie in [0, 1]");
    if (theta == 1.0 || a == b) return a;
    if (theta == 0.0) return b;
    return Coefficient::sum({{theta, a}, {1.0 - theta, b}});
}

Coefficient geometric_blend(const Coefficient& a, const Coefficient& b, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("blend theta must lie in [0, 1]");
    if (theta == 1.0 || a == b) return a;
    if (theta == 0.0) return b;
    const double period = common_period(a.period(), b.period());
    return Coefficient(
        std::make_shared<Coefficient::Node>(Coefficient::Node{node::GeometricBlend{a, b, theta}}),
        period);
}

}  // namespace cellcycle
