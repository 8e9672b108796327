// epistemic.hpp
// The agents' statements in the four-observer run, their classification by
// measurement context and a replay of the derivation that ends in the
// contradiction.

#pragma once

#include "hardysim/hardy.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hardysim::epistemic {

using hardy::MeasurementContext;
using qcore::BasisLabel;

enum class Agent : std::uint8_t { F, Fbar, W, Wbar };
enum class Level : std::uint8_t { Friend, SuperObserver };

inline Level level_of(Agent a) {
    return (a == Agent::F || a == Agent::Fbar) ? Level::Friend : Level::SuperObserver;
}

inline std::string to_string(Agent a) {
    switch (a) {
        case Agent::F: return "F";
        case Agent::Fbar: return "Fbar";
        case Agent::W: return "W";
        case Agent::Wbar: return "Wbar";
    }
    return "?";
}

/// `observer` sees `outcome` at `time`.
struct OutcomeClaim {
    Agent observer;
    BasisLabel outcome;
    std::string time;

    std::string str() const {
        using qcore::Outcome;
        std::string what;
        switch (outcome.name) {
            case Outcome::up: what = "z=+1/2"; break;
            case Outcome::down: what = "z=-1/2"; break;
            case Outcome::h: what = "r=heads"; break;
            case Outcome::t: what = "r=tails"; break;
            default: what = outcome.str();
        }
        if (observer == Agent::W || observer == Agent::Wbar)
            return to_string(observer) + " observes " + what + " at " + time;
        return to_string(observer) + " knows " + what + " at " + time;
    }
};

/// An outcome claim, optionally wrapped once in "<holder> is certain that".
class Proposition {
public:
    explicit Proposition(OutcomeClaim claim) : claim_(std::move(claim)) {}

    /// Wraps a bare claim; a second level of nesting is rejected.
    static Proposition certain_that(Agent holder, const Proposition& inner) {
        if (inner.holder_) throw Error("nesting too deep");
        Proposition p(inner.claim_);
        p.holder_ = holder;
        return p;
    }

    const OutcomeClaim& claim() const { return claim_; }
    const std::optional<Agent>& holder() const { return holder_; }

    std::string str() const {
        if (holder_) return to_string(*holder_) + " is certain that " + claim_.str();
        return claim_.str();
    }

private:
    OutcomeClaim claim_;
    std::optional<Agent> holder_;
};

enum class Classification : std::uint8_t { ContextValid, Counterfactual, CounterfactualDerived };

inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::ContextValid: return "ContextValid";
        case Classification::Counterfactual: return "Counterfactual";
        case Classification::CounterfactualDerived: return "Counterfactual-derived";
    }
    return "?";
}

struct EpistemicStatement {
    std::string id;
    Agent author;
    Proposition proposition;
    MeasurementContext assumed_context;
    MeasurementContext actual_context;
    std::vector<std::string> premises;     // ids of statements this one is derived from
    std::optional<hardy::InferenceRule> rule;  // the single-context rule behind a base statement
    bool adopts_other_agent = false;       // unwraps another agent's certainty, needs (C)
    std::optional<std::string> equivalent_to;
    std::string note;
};

/// Context-valid iff the statement is used in the context it was derived in.
inline Classification classify(const EpistemicStatement& s) {
    if (s.assumed_context == s.actual_context) return Classification::ContextValid;
    return s.premises.empty() ? Classification::Counterfactual
                              : Classification::CounterfactualDerived;
}

/// Born probability of the zero behind a base statement's rule (P of premise
/// without conclusion in the assumed context); nullopt when no rule applies.
inline std::optional<double> backing_probability(const EpistemicStatement& s) {
    if (!s.rule) return std::nullopt;
    return hardy::violation_probability(*s.rule);
}

/// The ten statements of the run, with the contexts in which they are
/// derived and the (Wbar,W) context in which they are used.
inline std::vector<EpistemicStatement> builtin_statements() {
    using namespace qcore::label;
    using hardy::kWbarW;
    using hardy::kWbarZ;
    using hardy::kZbarW;
    using hardy::kZbarZ;

    const OutcomeClaim w_fail{Agent::W, fail, "n:31"};
    const Proposition w_fails(w_fail);

    std::vector<EpistemicStatement> s;
    s.push_back({"Fbar_n02", Agent::Fbar, w_fails, kZbarW, kWbarW, {}, hardy::rule_t_fail(), false,
                 std::nullopt, "from r=tails via P(t,ok)=0, a zero of (Zbar,W)"});
    s.push_back({"F_n12", Agent::F, Proposition(OutcomeClaim{Agent::Fbar, up, "n:02"}), kZbarZ,
                 kZbarZ, {}, hardy::rule_up_t(), false, std::nullopt,
                 "deduction while memories are intact and the context unchanged"});
    s.push_back({"F_n13", Agent::F, Proposition::certain_that(Agent::Fbar, w_fails), kZbarW,
                 kWbarW, {"F_n12", "Fbar_n02"}, std::nullopt, true, std::nullopt,
                 "inherits Fbar_n02"});
    s.push_back({"F_n14", Agent::F, w_fails, kZbarW, kWbarW, {"F_n13"}, std::nullopt, true,
                 std::nullopt, "inherits Fbar_n02"});
    s.push_back({"Wbar_n22", Agent::Wbar, Proposition(OutcomeClaim{Agent::F, up, "n:11"}), kWbarZ,
                 kWbarW, {}, hardy::rule_Ibar(), false, std::nullopt,
                 "from wbar=okbar via P(okbar,down)=0, a zero of (Wbar,Z)"});
    s.push_back({"Wbar_n23", Agent::Wbar, Proposition::certain_that(Agent::F, w_fails), kWbarZ,
                 kWbarW, {"Wbar_n22", "F_n14"}, std::nullopt, true, std::nullopt,
                 "inherits Wbar_n22 and F_n14"});
    s.push_back({"Wbar_n24", Agent::Wbar, w_fails, kWbarZ, kWbarW, {"Wbar_n23"}, std::nullopt, true,
                 std::nullopt, "the chain okbar->up->t->fail"});
    s.push_back({"W_n26", Agent::W, Proposition(OutcomeClaim{Agent::Wbar, okbar, "n:21"}), kWbarW,
                 kWbarW, {}, std::nullopt, false, std::nullopt,
                 "Wbar announces okbar to W"});
    s.push_back({"W_n27", Agent::W, Proposition::certain_that(Agent::Wbar, w_fails), kWbarZ,
                 kWbarW, {"W_n26", "Wbar_n24"}, std::nullopt, true, std::nullopt,
                 "valid only if the earlier mistakes are accepted"});
    s.push_back({"W_n28", Agent::W, w_fails, kWbarZ, kWbarW, {"W_n27"}, std::nullopt, true,
                 std::string("Wbar_n24"), "valid only if the earlier mistakes are accepted"});
    return s;
}

inline const EpistemicStatement& find(const std::vector<EpistemicStatement>& all,
                                      const std::string& id) {
    for (const auto& s : all)
        if (s.id == id) return s;
    throw Error("unknown statement " + id);
}

struct AxiomSet {
    bool Q = true;  // quantum theory applies
    bool C = true;  // agents adopt each other's certainties
    bool S = true;  // an agent's claims must not contradict observation
};

struct TraceOptions {
    bool allow_counterfactual_composition = true;
    /// Statements allowed into derivations; nullopt admits all of them.
    std::optional<std::set<std::string>> admitted;
};

struct DerivationEdge {
    std::string from;
    std::string to;
};

struct ContradictionWitness {
    std::string statement;  // the derived certainty that fails
    double composed = 0;    // non-contextual prediction for (okbar,ok)
    double actual = 0;      // Born probability of (okbar,ok) in (Wbar,W)
};

struct TraceEntry {
    std::string id;
    std::string author;
    std::string proposition;
    std::string assumed_context;
    std::string actual_context;
    Classification classification = Classification::ContextValid;
    bool derived = false;
    std::optional<double> backing;
};

struct TraceReport {
    AxiomSet axioms;
    bool allow_counterfactual_composition = true;
    std::vector<TraceEntry> statements;
    std::vector<DerivationEdge> edges;  // only between derived statements
    std::optional<ContradictionWitness> contradiction;
    std::vector<std::string> counterfactual_set;  // base counterfactuals behind the contradiction
};

namespace detail {

/// A certainty that W sees fail, held while Wbar's okbar is known.
inline bool predicts_fail_given_okbar(const EpistemicStatement& s) {
    const auto& p = s.proposition;
    if (p.holder() || p.claim().observer != Agent::W || !(p.claim().outcome == qcore::label::fail))
        return false;
    return s.author == Agent::Wbar || s.author == Agent::W;
}

inline void ancestors(const std::vector<EpistemicStatement>& all, const std::string& id,
                      std::set<std::string>& out) {
    if (!out.insert(id).second) return;
    for (const auto& p : find(all, id).premises) ancestors(all, p, out);
}

}  // namespace detail

/// Replays the derivation under the given axioms. A statement is derived when
/// (Q) holds, it is admitted, all its premises are derived, it does not unwrap
/// another agent's certainty without (C), and it is either context-valid or
/// counterfactual composition is allowed. Under (S), a derived certainty that
/// W sees fail after Wbar saw okbar contradicts P(okbar,ok) > 0.
inline TraceReport run_trace(const AxiomSet& axioms, const TraceOptions& options = {}) {
    const auto all = builtin_statements();
    TraceReport r;
    r.axioms = axioms;
    r.allow_counterfactual_composition = options.allow_counterfactual_composition;

    std::set<std::string> derived;
    if (axioms.Q) {
        // premises always precede their conclusions in builtin order
        for (const auto& s : all) {
            if (options.admitted && !options.admitted->count(s.id)) continue;
            if (classify(s) != Classification::ContextValid &&
                !options.allow_counterfactual_composition)
                continue;
            if (s.adopts_other_agent && !axioms.C) continue;
            bool ready = true;
            for (const auto& p : s.premises) ready = ready && derived.count(p) > 0;
            if (!ready) continue;
            derived.insert(s.id);
            for (const auto& p : s.premises) r.edges.push_back({p, s.id});
        }
    }

    for (const auto& s : all)
        r.statements.push_back({s.id, to_string(s.author), s.proposition.str(),
                                s.assumed_context.name(), s.actual_context.name(), classify(s),
                                derived.count(s.id) > 0, backing_probability(s)});

    if (!axioms.S) return r;
    for (const auto& s : all) {
        if (!derived.count(s.id) || !detail::predicts_fail_given_okbar(s)) continue;
        const auto cert = hardy::chain_prediction(hardy::hardy_chain());
        r.contradiction = ContradictionWitness{s.id, cert.composed_prediction, cert.actual};
        std::set<std::string> chain;
        detail::ancestors(all, s.id, chain);
        for (const auto& id : chain)
            if (classify(find(all, id)) == Classification::Counterfactual)
                r.counterfactual_set.push_back(id);
        std::sort(r.counterfactual_set.begin(), r.counterfactual_set.end());
        break;
    }
    return r;
}

}  // namespace hardysim::epistemic
