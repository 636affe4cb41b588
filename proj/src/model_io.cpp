#include "cellcycle/model_io.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

namespace cellcycle {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ValidationError("unknown field '" + key + "' in " + what);
    }
}

template <class T>
T field(const Json& j, const char* key, const std::string& what)
{
    if (!j.contains(key)) throw ValidationError(what + " is missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(what + ": field '" + key + "' has the wrong type");
    }
}

double period_of(const Json& j, double fallback, const std::string& what)
{
    const double p = j.contains("period") ? field<double>(j, "period", what) : 0.0;
    return p > 0.0 ? p : fallback;
}

Coefficient parse(const Json& j, double period)
{
    if (!j.is_object() || !j.contains("type"))
        throw ValidationError("coefficient must be an object with a 'type' field");
    const auto type = field<std::string>(j, "type", "coefficient");
    const std::string what = "coefficient '" + type + "'";
    if (type == "constant") {
        require_keys(j, {"type", "value"}, what);
        return Coefficient::constant(field<double>(j, "value", what));
    }
    if (type == "trig_poly") {
        require_keys(j, {"type", "period", "base", "terms"}, what);
        std::vector<TrigTerm> terms;
        for (const auto& t : j.value("terms", Json::array())) {
            require_keys(t, {"amplitude", "harmonic", "phase"}, "trig_poly term");
            terms.push_back({field<double>(t, "amplitude", "trig_poly term"),
                             field<int>(t, "harmonic", "trig_poly term"),
                             t.value("phase", 0.0)});
        }
        return Coefficient::trig_poly(period_of(j, period, what), field<double>(j, "base", what),
                                      std::move(terms));
    }
    if (type == "cos_power") {
        require_keys(j, {"type", "period", "scale", "power", "angular_frequency", "phase"}, what);
        return Coefficient::cos_power(period_of(j, period, what), field<double>(j, "scale", what),
                                      field<int>(j, "power", what),
                                      field<double>(j, "angular_frequency", what),
                                      j.value("phase", 0.0));
    }
    if (type == "age_indicator") {
        require_keys(j, {"type", "threshold"}, what);
        return Coefficient::age_indicator(field<double>(j, "threshold", what));
    }
    if (type == "piecewise_time") {
        require_keys(j, {"type", "period", "breakpoints"}, what);
        std::vector<std::pair<double, double>> bps;
        for (const auto& b : field<Json>(j, "breakpoints", what)) {
            if (!b.is_array() || b.size() != 2)
                throw ValidationError("piecewise_time breakpoints are [time, rate] pairs");
            bps.emplace_back(b[0].get<double>(), b[1].get<double>());
        }
        return Coefficient::piecewise_time(period_of(j, period, what), std::move(bps));
    }
    if (type == "product") {
        require_keys(j, {"type", "factors"}, what);
        std::vector<Coefficient> factors;
        for (const auto& f : field<Json>(j, "factors", what)) factors.push_back(parse(f, period));
        return Coefficient::product(std::move(factors));
    }
    if (type == "sum") {
        require_keys(j, {"type", "terms"}, what);
        std::vector<std::pair<double, Coefficient>> terms;
        for (const auto& t : field<Json>(j, "terms", what)) {
            require_keys(t, {"weight", "rate"}, "sum term");
            terms.emplace_back(field<double>(t, "weight", "sum term"),
                               parse(field<Json>(t, "rate", "sum term"), period));
        }
        return Coefficient::sum(std::move(terms));
    }
    if (type == "shifted") {
        require_keys(j, {"type", "inner", "offset"}, what);
        return phase_shift(parse(field<Json>(j, "inner", what), period),
                           field<double>(j, "offset", what));
    }
    if (type == "frozen") {
        require_keys(j, {"type", "inner", "mode", "quadrature_points"}, what);
        const auto mode = field<std::string>(j, "mode", what);
        if (mode != "arithmetic" && mode != "geometric")
            throw ValidationError("frozen mode must be 'arithmetic' or 'geometric'");
        return time_average(parse(field<Json>(j, "inner", what), period),
                            mode == "arithmetic" ? AverageMode::Arithmetic : AverageMode::Geometric,
                            field<int>(j, "quadrature_points", what));
    }
    if (type == "geometric_blend") {
        require_keys(j, {"type", "first", "second", "theta"}, what);
        return geometric_blend(parse(field<Json>(j, "first", what), period),
                               parse(field<Json>(j, "second", what), period),
                               field<double>(j, "theta", what));
    }
    throw ValidationError("unknown coefficient type '" + type + "'");
}

std::vector<Coefficient> parse_list(const Json& j, const char* key, double period)
{
    std::vector<Coefficient> out;
    for (const auto& c : field<Json>(j, key, "model")) out.push_back(parse(c, period));
    return out;
}

}  // namespace

Coefficient coefficient_from_json(const Json& j) { return parse(j, 0.0); }

Json to_json(const Coefficient& c)
{
    const double period = c.period();
    return std::visit(
        Overloaded{
            [](const node::Constant& n) { return Json{{"type", "constant"}, {"value", n.value}}; },
            [&](const node::TrigPoly& n) {
                Json terms = Json::array();
                for (const auto& t : n.terms)
                    terms.push_back(
                        {{"amplitude", t.amplitude}, {"harmonic", t.harmonic}, {"phase", t.phase}});
                return Json{{"type", "trig_poly"}, {"period", period}, {"base", n.base},
                            {"terms", terms}};
            },
            [&](const node::CosPower& n) {
                return Json{{"type", "cos_power"},     {"period", period},
                            {"scale", n.scale},        {"power", n.power},
                            {"angular_frequency", n.angular_frequency}, {"phase", n.phase}};
            },
            [](const node::AgeIndicator& n) {
                return Json{{"type", "age_indicator"}, {"threshold", n.threshold}};
            },
            [&](const node::PiecewiseTime& n) {
                Json bps = Json::array();
                for (const auto& [t, v] : n.breakpoints) bps.push_back({t, v});
                return Json{{"type", "piecewise_time"}, {"period", period}, {"breakpoints", bps}};
            },
            [](const node::Product& n) {
                Json factors = Json::array();
                for (const auto& f : n.factors) factors.push_back(to_json(f));
                return Json{{"type", "product"}, {"factors", factors}};
            },
            [](const node::Sum& n) {
                Json terms = Json::array();
                for (const auto& [w, r] : n.terms) terms.push_back({{"weight", w}, {"rate", to_json(r)}});
                return Json{{"type", "sum"}, {"terms", terms}};
            },
            [](const node::Shifted& n) {
                return Json{{"type", "shifted"}, {"inner", to_json(n.inner)}, {"offset", n.offset}};
            },
            [](const node::Frozen& n) {
                return Json{{"type", "frozen"},
                            {"inner", to_json(n.inner)},
                            {"mode", n.mode == AverageMode::Arithmetic ? "arithmetic" : "geometric"},
                            {"quadrature_points", n.quadrature_points}};
            },
            [](const node::GeometricBlend& n) {
                return Json{{"type", "geometric_blend"},
                            {"first", to_json(n.first)},
                            {"second", to_json(n.second)},
                            {"theta", n.theta}};
            },
        },
        c.node().data);
}

PhaseModel model_from_json(const Json& j)
{
    require_keys(j, {"period", "phases", "deaths", "transitions", "births", "outflows"}, "model");
    const double period = field<double>(j, "period", "model");
    if (!(period > 0.0)) throw ValidationError("model period must be positive");
    std::vector<Coefficient> deaths = parse_list(j, "deaths", period);
    if (j.contains("phases") && field<std::size_t>(j, "phases", "model") != deaths.size())
        throw ValidationError("model 'phases' does not match the number of death rates");
    const bool cycle = j.contains("transitions");
    if (cycle == j.contains("births"))
        throw ValidationError("model needs exactly one of 'transitions' or 'births'");
    if (cycle) {
        if (j.contains("outflows"))
            throw ValidationError("cell-cycle models derive their outflows from 'transitions'");
        return PhaseModel::cell_cycle(period, std::move(deaths), parse_list(j, "transitions", period));
    }
    BirthMap births;
    const Json& rows = j.at("births");
    if (!rows.is_array() || rows.size() != deaths.size())
        throw ValidationError("'births' must be a phases x phases array");
    for (std::size_t target = 0; target < rows.size(); ++target) {
        if (!rows[target].is_array() || rows[target].size() != deaths.size())
            throw ValidationError("'births' must be a phases x phases array");
        for (std::size_t source = 0; source < deaths.size(); ++source) {
            const Json& entry = rows[target][source];
            if (!entry.is_null()) births.emplace(BirthKey{target, source}, parse(entry, period));
        }
    }
    std::vector<Coefficient> outflows;
    if (j.contains("outflows")) outflows = parse_list(j, "outflows", period);
    return PhaseModel::general(period, std::move(deaths), std::move(births), std::move(outflows));
}

Json to_json(const PhaseModel& m)
{
    Json j;
    j["period"] = m.period();
    j["phases"] = m.phases();
    Json deaths = Json::array();
    for (const auto& d : m.deaths()) deaths.push_back(to_json(d));
    j["deaths"] = deaths;
    if (m.kind() == ModelKind::CellCycle) {
        Json transitions = Json::array();
        for (const auto& k : m.transitions()) transitions.push_back(to_json(k));
        j["transitions"] = transitions;
        return j;
    }
    Json births = Json::array();
    for (std::size_t target = 0; target < m.phases(); ++target) {
        Json row = Json::array();
        for (std::size_t source = 0; source < m.phases(); ++source) {
            const auto it = m.births().find(BirthKey{target, source});
            row.push_back(it == m.births().end() ? Json(nullptr) : to_json(it->second));
        }
        births.push_back(row);
    }
    j["births"] = births;
    Json outflows = Json::array();
    for (const auto& k : m.outflows()) outflows.push_back(to_json(k));
    j["outflows"] = outflows;
    return j;
}

}  // namespace cellcycle
