#pragma once

#include "cellcycle/phase_model.hpp"

#include "json.hpp"

namespace cellcycle {

using Json = nlohmann::json;

/// Descriptor trees as {"type": ..., ...} objects. Types: constant,
/// trig_poly, cos_power, age_indicator, piecewise_time, product, sum,
/// shifted, frozen, geometric_blend. Unknown fields are rejected.
Coefficient coefficient_from_json(const Json& j);
Json to_json(const Coefficient& c);

/// {"period": T, "phases": I, "deaths": [...], "transitions": [...]} for
/// cell-cycle models, or "births": [[...]] (births[target][source], null
/// where absent) plus optional "outflows" for general models.
PhaseModel model_from_json(const Json& j);
Json to_json(const PhaseModel& m);

}  // namespace cellcycle
