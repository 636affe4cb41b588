#pragma once

#include "cellcycle/coefficients.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace cellcycle {

/// Birth entry B_{source -> target}; newborns of `target` come from `source`.
struct BirthKey {
    std::size_t target;
    std::size_t source;
    friend auto operator<=>(const BirthKey&, const BirthKey&) = default;
};

using BirthMap = std::map<BirthKey, Coefficient>;

enum class ModelKind { General, CellCycle };

/// Renewal system in birth/death form:
///
///   d_t n_i + d_x n_i + (d_i + k_i) n_i = 0,
///   n_i(t, 0) = sum_j int B_{j->i}(t, x) n_j(t, x) dx.
///
/// `deaths` holds d_i and `outflows` holds the transition losses k_i, kept
/// apart so a treatment can act on d_i alone. For general models the
/// outflows are zero. The cell-cycle constructor sets k_i = K_{i->i+1},
/// B_{i->i+1} = K_{i->i+1} and B_{I->1} = 2 K_{I->1}.
class PhaseModel {
public:
    static PhaseModel general(double period, std::vector<Coefficient> deaths, BirthMap births,
                              std::vector<Coefficient> outflows = {});

    static PhaseModel cell_cycle(double period, std::vector<Coefficient> deaths,
                                 std::vector<Coefficient> transitions);

    std::size_t phases() const { return deaths_.size(); }
    double period() const { return period_; }
    ModelKind kind() const { return kind_; }

    const std::vector<Coefficient>& deaths() const { return deaths_; }
    const std::vector<Coefficient>& outflows() const { return outflows_; }
    const BirthMap& births() const { return births_; }

    /// Transition rates as passed to cell_cycle(); empty for general models.
    const std::vector<Coefficient>& transitions() const { return transitions_; }

    /// d_i + k_i.
    Coefficient loss(std::size_t phase) const;

    /// Largest AgeIndicator threshold over every coefficient.
    double max_age_threshold() const;

    std::vector<std::string> warnings() const;

    PhaseModel with_deaths(std::vector<Coefficient> deaths) const;

private:
    PhaseModel() = default;
    void validate() const;

    double period_ = 0.0;
    ModelKind kind_ = ModelKind::General;
    std::vector<Coefficient> deaths_;
    std::vector<Coefficient> outflows_;
    std::vector<Coefficient> transitions_;
    BirthMap births_;
};

/// d^theta = theta d1 + (1 - theta) d2 (deaths and outflows),
/// B^theta = B1^theta B2^(1 - theta). For cell-cycle models the transition
/// enters the loss arithmetically and the boundary term geometrically.
PhaseModel blend_models(const PhaseModel& m1, const PhaseModel& m2, double theta);

/// Every coefficient replaced by its arithmetic time average.
PhaseModel perron_averaged(const PhaseModel& model, int quadrature_points);

/// Deaths and outflows arithmetically, births geometrically averaged.
PhaseModel mixed_averaged(const PhaseModel& model, int quadrature_points);

/// Only the deaths arithmetically averaged (uniform drug delivery).
PhaseModel deaths_averaged(const PhaseModel& model, int quadrature_points);

/// Deaths shifted by `offset`; transitions and births untouched.
PhaseModel shift_deaths(const PhaseModel& model, double offset);

/// Every coefficient shifted by `offset`.
PhaseModel shift_all(const PhaseModel& model, double offset);

}  // namespace cellcycle
