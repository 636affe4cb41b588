#include "cellcycle/report.hpp"

#include "json.hpp"

namespace cellcycle {

std::string ResidualReport::to_json() const
{
    const nlohmann::json j = {
        {"check", check},
        {"max_violation", max_violation},
        {"location", {{"step", step}, {"phase", phase}, {"cell", cell}}},
        {"integrated_violation", integrated_violation},
        {"tolerance", tolerance},
        {"pass", pass},
        {"warnings", warnings},
    };
    return j.dump(2);
}

}  // namespace cellcycle
