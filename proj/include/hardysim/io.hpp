// io.hpp
// JSON encoding of every report type and number formatting shared by the CLI.
// Probabilities and weights are written as decimal strings with 17
// significant digits, which parse back to the identical double.

#pragma once

#include "hardysim/bell.hpp"
#include "hardysim/bohm.hpp"
#include "hardysim/epistemic.hpp"
#include "hardysim/hardy.hpp"
#include "hardysim/memory.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace hardysim::io {

using Json = nlohmann::ordered_json;

inline std::string decimal(double x) {
    if (x == 0.0) x = 0.0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_decimal(const Json& j) {
    if (j.is_number()) return j.get<double>();
    return std::stod(j.get<std::string>());
}

/// Nearest p/q with q <= 144 when it lies within 1e-12 of x.
inline std::optional<std::string> rational(double x) {
    for (long q = 1; q <= 144; ++q) {
        const double p = std::round(x * static_cast<double>(q));
        if (std::fabs(p / static_cast<double>(q) - x) < 1e-12) {
            if (q == 1) return std::to_string(static_cast<long>(p));
            return std::to_string(static_cast<long>(p)) + "/" + std::to_string(q);
        }
    }
    return std::nullopt;
}

/// "0.0833333333333333 (1/12)" style, 15 significant digits.
inline std::string pretty(double x) {
    if (std::fabs(x) < 1e-15) x = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    std::string s = buf;
    if (auto r = rational(x)) s += " (" + *r + ")";
    return s;
}

// ---- bases, labels, contexts ----

inline std::string basis_json_name(const qcore::Basis& b) {
    if (b.kind() == qcore::BasisKind::Angle) return "A(" + decimal(b.angle()) + ")";
    return b.name();
}

inline qcore::Basis parse_basis(const std::string& s) {
    if (s == "Zbar") return qcore::Basis::zbar();
    if (s == "Wbar") return qcore::Basis::wbar();
    if (s == "Z") return qcore::Basis::z();
    if (s == "W") return qcore::Basis::w();
    if (s.size() > 3 && s.rfind("A(", 0) == 0 && s.back() == ')')
        return qcore::Basis::angled(std::stod(s.substr(2, s.size() - 3)));
    throw Error("unknown basis " + s);
}

inline qcore::BasisLabel parse_label(const std::string& s) {
    if (auto l = qcore::parse_label(s)) return *l;
    throw Error("unknown label " + s);
}

inline hardy::MeasurementContext parse_context(const std::string& s) {
    for (const auto& c : hardy::all_contexts())
        if (c.name() == s) return c;
    throw Error("unknown context " + s);
}

// ---- OutcomeDistribution ----

inline Json to_json(const qcore::OutcomeDistribution& d) {
    Json j;
    j["systems"] = Json::array();
    for (auto s : d.systems()) j["systems"].push_back(qcore::to_string(s));
    j["context"] = Json::array();
    for (const auto& b : d.context()) j["context"].push_back(basis_json_name(b));
    j["probabilities"] = Json::object();
    for (std::size_t i = 0; i < d.size(); ++i) j["probabilities"][d.key(i)] = decimal(d[i]);
    return j;
}

inline qcore::OutcomeDistribution distribution_from_json(const Json& j) {
    std::vector<qcore::System> systems;
    for (const auto& s : j.at("systems"))
        systems.push_back(s.get<std::string>() == "coin" ? qcore::System::Coin : qcore::System::Spin);
    qcore::Context ctx;
    for (const auto& b : j.at("context")) ctx.push_back(parse_basis(b.get<std::string>()));
    std::vector<double> probs(std::size_t{1} << ctx.size(), 0.0);
    qcore::OutcomeDistribution layout(systems, ctx, probs);
    for (std::size_t i = 0; i < layout.size(); ++i)
        probs[i] = parse_decimal(j.at("probabilities").at(layout.key(i)));
    return qcore::OutcomeDistribution(std::move(systems), std::move(ctx), std::move(probs));
}

inline bool same(const qcore::OutcomeDistribution& a, const qcore::OutcomeDistribution& b) {
    return a.systems() == b.systems() && a.context() == b.context() &&
           a.probabilities() == b.probabilities();
}

// ---- TrajectorySet ----

inline Json to_json(const bohm::HiddenConfig& c) {
    return Json{{"coin", c.coin.str()}, {"spin", c.spin.str()}};
}

inline bohm::HiddenConfig config_from_json(const Json& j) {
    return {parse_label(j.at("coin").get<std::string>()), parse_label(j.at("spin").get<std::string>())};
}

inline Json to_json(const bohm::TrajectorySet& set) {
    Json j;
    j["foliation"] = bohm::to_string(set.foliation);
    j["coupling"] = bohm::to_string(set.coupling);
    j["context"] = set.context.name();
    j["paths"] = Json::array();
    for (const auto& p : set.paths) {
        Json events = Json::array();
        for (const auto& e : p.events)
            events.push_back(
                {{"system", qcore::to_string(e.system)}, {"from", e.from.str()}, {"to", e.to.str()}});
        j["paths"].push_back({{"initial", to_json(p.initial)},
                              {"events", events},
                              {"final", to_json(p.final)},
                              {"weight", decimal(p.weight)}});
    }
    return j;
}

inline bohm::Foliation parse_foliation(const std::string& s) {
    if (s == "F") return bohm::Foliation::F;
    if (s == "Fprime") return bohm::Foliation::Fprime;
    throw Error("unknown foliation " + s);
}

inline bohm::CouplingKind parse_coupling(const std::string& s) {
    if (s == "monotone") return bohm::CouplingKind::Monotone;
    if (s == "independent") return bohm::CouplingKind::Independent;
    throw Error("unknown coupling " + s);
}

inline bohm::TrajectorySet trajectory_set_from_json(const Json& j) {
    bohm::TrajectorySet set;
    set.foliation = parse_foliation(j.at("foliation").get<std::string>());
    set.coupling = parse_coupling(j.at("coupling").get<std::string>());
    set.context = parse_context(j.at("context").get<std::string>());
    for (const auto& pj : j.at("paths")) {
        bohm::Path p;
        p.initial = config_from_json(pj.at("initial"));
        p.final = config_from_json(pj.at("final"));
        p.weight = parse_decimal(pj.at("weight"));
        for (const auto& e : pj.at("events"))
            p.events.push_back({e.at("system").get<std::string>() == "coin" ? qcore::System::Coin
                                                                           : qcore::System::Spin,
                                parse_label(e.at("from").get<std::string>()),
                                parse_label(e.at("to").get<std::string>())});
        set.paths.push_back(std::move(p));
    }
    return set;
}

inline bool same(const bohm::TrajectorySet& a, const bohm::TrajectorySet& b) {
    if (a.foliation != b.foliation || a.coupling != b.coupling || !(a.context == b.context) ||
        a.paths.size() != b.paths.size())
        return false;
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        const auto &p = a.paths[i], &q = b.paths[i];
        if (!(p.initial == q.initial) || !(p.final == q.final) || p.weight != q.weight ||
            p.events.size() != q.events.size())
            return false;
        for (std::size_t k = 0; k < p.events.size(); ++k)
            if (p.events[k].system != q.events[k].system || !(p.events[k].from == q.events[k].from) ||
                !(p.events[k].to == q.events[k].to))
                return false;
    }
    return true;
}

// ---- FoliationReport ----

inline Json to_json(const bohm::ConfigDistribution& d) {
    Json j = Json::object();
    for (const auto& [cfg, p] : d) j[cfg.str()] = decimal(p);
    return j;
}

inline bohm::ConfigDistribution config_distribution_from_json(const Json& j) {
    bohm::ConfigDistribution d;
    for (const auto& [key, value] : j.items()) {
        // "(coin,spin)"
        const auto comma = key.find(',');
        if (key.size() < 5 || key.front() != '(' || key.back() != ')' || comma == std::string::npos)
            throw Error("bad configuration key " + key);
        d.emplace_back(bohm::HiddenConfig{parse_label(key.substr(1, comma - 1)),
                                          parse_label(key.substr(comma + 1, key.size() - comma - 2))},
                       parse_decimal(value));
    }
    return d;
}

inline Json to_json(const bohm::FoliationReport& r) {
    Json j;
    j["coupling"] = bohm::to_string(r.coupling);
    j["marginals_identical"] = r.marginals_identical;
    j["max_marginal_gap"] = decimal(r.max_marginal_gap);
    j["max_born_gap"] = decimal(r.max_born_gap);
    j["outcomes"] = Json::array();
    for (const auto& c : r.outcomes)
        j["outcomes"].push_back({{"outcome", to_json(c.outcome)},
                                 {"probability", decimal(c.probability)},
                                 {"origin_F", to_json(c.origin_F)},
                                 {"origin_Fprime", to_json(c.origin_Fprime)},
                                 {"differs", c.differs}});
    return j;
}

inline bohm::FoliationReport foliation_report_from_json(const Json& j) {
    bohm::FoliationReport r;
    r.coupling = parse_coupling(j.at("coupling").get<std::string>());
    r.marginals_identical = j.at("marginals_identical").get<bool>();
    r.max_marginal_gap = parse_decimal(j.at("max_marginal_gap"));
    r.max_born_gap = parse_decimal(j.at("max_born_gap"));
    for (const auto& cj : j.at("outcomes"))
        r.outcomes.push_back({config_from_json(cj.at("outcome")), parse_decimal(cj.at("probability")),
                              config_distribution_from_json(cj.at("origin_F")),
                              config_distribution_from_json(cj.at("origin_Fprime")),
                              cj.at("differs").get<bool>()});
    return r;
}

// ---- ProtocolRun ----

/// The serialized view of a memory protocol run.
struct RunSummary {
    std::vector<std::string> agents;
    std::vector<std::string> erased;
    bool coherent = true;
    std::vector<std::pair<std::string, qcore::OutcomeDistribution>> tables;
};

inline RunSummary summarize(const memory::ProtocolRun& run) {
    RunSummary s;
    for (auto a : run.agents) s.agents.push_back(memory::to_string(a));
    for (auto a : run.erased) s.erased.push_back(memory::to_string(a));
    s.coherent = run.coherent();
    for (const auto& c : hardy::all_contexts()) s.tables.emplace_back(c.name(), run.table(c.bases()));
    return s;
}

inline Json to_json(const RunSummary& s) {
    Json j;
    j["agents"] = s.agents;
    j["erased"] = s.erased;
    j["state"] = s.coherent ? "coherent" : "decohered";
    j["tables"] = Json::object();
    for (const auto& [name, d] : s.tables) j["tables"][name] = to_json(d);
    return j;
}

inline RunSummary run_summary_from_json(const Json& j) {
    RunSummary s;
    s.agents = j.at("agents").get<std::vector<std::string>>();
    s.erased = j.at("erased").get<std::vector<std::string>>();
    const auto state = j.at("state").get<std::string>();
    if (state != "coherent" && state != "decohered") throw Error("bad run state " + state);
    s.coherent = state == "coherent";
    for (const auto& [name, d] : j.at("tables").items())
        s.tables.emplace_back(name, distribution_from_json(d));
    return s;
}

inline bool same(const RunSummary& a, const RunSummary& b) {
    if (a.agents != b.agents || a.erased != b.erased || a.coherent != b.coherent ||
        a.tables.size() != b.tables.size())
        return false;
    for (std::size_t i = 0; i < a.tables.size(); ++i)
        if (a.tables[i].first != b.tables[i].first || !same(a.tables[i].second, b.tables[i].second))
            return false;
    return true;
}

// ---- TraceReport ----

inline epistemic::Classification parse_classification(const std::string& s) {
    using epistemic::Classification;
    for (auto c : {Classification::ContextValid, Classification::Counterfactual,
                   Classification::CounterfactualDerived})
        if (epistemic::to_string(c) == s) return c;
    throw Error("unknown classification " + s);
}

inline Json to_json(const epistemic::TraceReport& r) {
    Json j;
    j["axioms"] = {{"Q", r.axioms.Q}, {"C", r.axioms.C}, {"S", r.axioms.S}};
    j["allow_counterfactual_composition"] = r.allow_counterfactual_composition;
    j["statements"] = Json::array();
    for (const auto& s : r.statements)
        j["statements"].push_back({{"id", s.id},
                                   {"author", s.author},
                                   {"proposition", s.proposition},
                                   {"assumed_context", s.assumed_context},
                                   {"actual_context", s.actual_context},
                                   {"classification", epistemic::to_string(s.classification)},
                                   {"derived", s.derived},
                                   {"backing", s.backing ? Json(decimal(*s.backing)) : Json(nullptr)}});
    j["edges"] = Json::array();
    for (const auto& e : r.edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}});
    if (r.contradiction)
        j["contradiction"] = {{"statement", r.contradiction->statement},
                              {"composed", decimal(r.contradiction->composed)},
                              {"actual", decimal(r.contradiction->actual)}};
    else
        j["contradiction"] = nullptr;
    j["counterfactual_set"] = r.counterfactual_set;
    return j;
}

inline epistemic::TraceReport trace_report_from_json(const Json& j) {
    epistemic::TraceReport r;
    r.axioms = {j.at("axioms").at("Q").get<bool>(), j.at("axioms").at("C").get<bool>(),
                j.at("axioms").at("S").get<bool>()};
    r.allow_counterfactual_composition = j.at("allow_counterfactual_composition").get<bool>();
    for (const auto& s : j.at("statements")) {
        epistemic::TraceEntry e;
        e.id = s.at("id").get<std::string>();
        e.author = s.at("author").get<std::string>();
        e.proposition = s.at("proposition").get<std::string>();
        e.assumed_context = s.at("assumed_context").get<std::string>();
        e.actual_context = s.at("actual_context").get<std::string>();
        e.classification = parse_classification(s.at("classification").get<std::string>());
        e.derived = s.at("derived").get<bool>();
        if (!s.at("backing").is_null()) e.backing = parse_decimal(s.at("backing"));
        r.statements.push_back(std::move(e));
    }
    for (const auto& e : j.at("edges"))
        r.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>()});
    if (!j.at("contradiction").is_null()) {
        const auto& c = j.at("contradiction");
        r.contradiction = epistemic::ContradictionWitness{c.at("statement").get<std::string>(),
                                                          parse_decimal(c.at("composed")),
                                                          parse_decimal(c.at("actual"))};
    }
    r.counterfactual_set = j.at("counterfactual_set").get<std::vector<std::string>>();
    return r;
}

inline bool same(const epistemic::TraceReport& a, const epistemic::TraceReport& b) {
    auto same_axioms = [](const epistemic::AxiomSet& x, const epistemic::AxiomSet& y) {
        return x.Q == y.Q && x.C == y.C && x.S == y.S;
    };
    if (!same_axioms(a.axioms, b.axioms) ||
        a.allow_counterfactual_composition != b.allow_counterfactual_composition ||
        a.statements.size() != b.statements.size() || a.edges.size() != b.edges.size() ||
        a.counterfactual_set != b.counterfactual_set ||
        a.contradiction.has_value() != b.contradiction.has_value())
        return false;
    for (std::size_t i = 0; i < a.statements.size(); ++i) {
        const auto &x = a.statements[i], &y = b.statements[i];
        if (x.id != y.id || x.author != y.author || x.proposition != y.proposition ||
            x.assumed_context != y.assumed_context || x.actual_context != y.actual_context ||
            x.classification != y.classification || x.derived != y.derived || x.backing != y.backing)
            return false;
    }
    for (std::size_t i = 0; i < a.edges.size(); ++i)
        if (a.edges[i].from != b.edges[i].from || a.edges[i].to != b.edges[i].to) return false;
    if (a.contradiction) {
        const auto &x = *a.contradiction, &y = *b.contradiction;
        if (x.statement != y.statement || x.composed != y.composed || x.actual != y.actual)
            return false;
    }
    return true;
}

// ---- CHSH ----

inline Json to_json(const bell::AngleQuad& q) {
    return Json{{"a", q.a}, {"a_prime", q.a_prime}, {"b", q.b}, {"b_prime", q.b_prime}};
}

inline bell::AngleQuad quad_from_json(const Json& j) {
    return {j.at("a").get<double>(), j.at("a_prime").get<double>(), j.at("b").get<double>(),
            j.at("b_prime").get<double>()};
}

inline bool same(const bell::AngleQuad& x, const bell::AngleQuad& y) {
    return x.a == y.a && x.a_prime == y.a_prime && x.b == y.b && x.b_prime == y.b_prime;
}

inline Json to_json(const bell::ChshReport& r) {
    return Json{{"quad", to_json(r.quad)},
                {"S_quantum", r.S_quantum},
                {"S_lhv", r.S_lhv},
                {"S_lhv_max", r.S_lhv_max},
                {"argmax_quad", to_json(r.argmax_quad)},
                {"grid_resolution", r.grid_resolution}};
}

inline bell::ChshReport chsh_report_from_json(const Json& j) {
    return {quad_from_json(j.at("quad")),         j.at("S_quantum").get<double>(),
            j.at("S_lhv").get<double>(),          j.at("S_lhv_max").get<double>(),
            quad_from_json(j.at("argmax_quad")), j.at("grid_resolution").get<std::size_t>()};
}

inline bool same(const bell::ChshReport& a, const bell::ChshReport& b) {
    return same(a.quad, b.quad) && a.S_quantum == b.S_quantum && a.S_lhv == b.S_lhv &&
           a.S_lhv_max == b.S_lhv_max && same(a.argmax_quad, b.argmax_quad) &&
           a.grid_resolution == b.grid_resolution;
}

inline Json to_json(const bell::ErasedVsKept& r) {
    return Json{{"quad", to_json(r.quad)},
                {"S_erased", r.S_erased},
                {"S_kept_max", r.S_kept_max},
                {"kept_argmax", to_json(r.kept_argmax)},
                {"kept_vs_lhv_gap", r.kept_vs_lhv_gap},
                {"kept_aligned", r.kept_aligned}};
}

inline bell::ErasedVsKept erased_vs_kept_from_json(const Json& j) {
    return {quad_from_json(j.at("quad")),        j.at("S_erased").get<double>(),
            j.at("S_kept_max").get<double>(),    quad_from_json(j.at("kept_argmax")),
            j.at("kept_vs_lhv_gap").get<double>(), j.at("kept_aligned").get<double>()};
}

inline bool same(const bell::ErasedVsKept& a, const bell::ErasedVsKept& b) {
    return same(a.quad, b.quad) && a.S_erased == b.S_erased && a.S_kept_max == b.S_kept_max &&
           same(a.kept_argmax, b.kept_argmax) && a.kept_vs_lhv_gap == b.kept_vs_lhv_gap &&
           a.kept_aligned == b.kept_aligned;
}

}  // namespace hardysim::io
