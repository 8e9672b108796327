// memory.hpp
// Quantum memories of the two friends. A friend records its system in the
// computational basis; the record is either uncomputed (keeping only the fact
// that some definite outcome was seen) or kept, which decoheres the branches.

#pragma once

#include "hardysim/hardy.hpp"
#include "hardysim/qcore.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hardysim::memory {

using qcore::Basis;
using qcore::BasisLabel;
using qcore::DensityOperator;
using qcore::StateVector;

/// Fbar watches system 0 (the coin, or the first particle of a pair), F
/// watches system 1 (the spin, or the second particle).
enum class Agent : std::uint8_t { F, Fbar };

inline std::string to_string(Agent a) { return a == Agent::F ? "F" : "Fbar"; }

inline std::size_t system_of(Agent a) { return a == Agent::F ? 1 : 0; }

enum class Content : std::uint8_t { Empty, Outcome, DefiniteOutcome };

inline std::string to_string(Content c) {
    switch (c) {
        case Content::Empty: return "empty";
        case Content::Outcome: return "outcome";
        case Content::DefiniteOutcome: return "definite-outcome";
    }
    return "?";
}

/// One friend's memory. The branch-wise record (which outcome) lives in the
/// run's branches; the register tracks the protocol step.
class MemoryRegister {
public:
    explicit MemoryRegister(Agent agent) : agent_(agent) {}

    Agent agent() const { return agent_; }
    Content content() const { return content_; }

    void record() { step(Content::Empty, Content::Outcome); }
    void erase_to_flag() { step(Content::Outcome, Content::DefiniteOutcome); }
    void erase_fully() { step(Content::Outcome, Content::Empty); }

private:
    void step(Content from, Content to) {
        if (content_ != from) throw Error("illegal memory transition");
        content_ = to;
    }

    Agent agent_;
    Content content_ = Content::Empty;
};

/// One branch of a recorded state: the outcome written to memory and the
/// unnormalized joint component that goes with it.
struct Branch {
    BasisLabel outcome;
    Eigen::VectorXcd component;
    double weight = 0;
};

struct ProtocolRun {
    std::vector<Agent> agents;  // in recording order
    std::vector<Agent> erased;
    std::vector<Agent> kept;
    std::vector<MemoryRegister> registers;
    std::vector<Branch> last_record;  // branch decomposition of the most recent record
    std::variant<StateVector, DensityOperator> final_state;

    bool coherent() const { return std::holds_alternative<StateVector>(final_state); }

    /// Outcome table of any context, coherent or not.
    qcore::OutcomeDistribution table(const qcore::Context& ctx) const {
        return std::visit([&](const auto& s) { return qcore::born_distribution(s, ctx); },
                          final_state);
    }
};

namespace detail {

inline void check_agent_basis(const StateVector& state, Agent agent, const Basis& basis) {
    const std::size_t sys = system_of(agent);
    if (sys >= state.num_systems()) throw Error("system out of range");
    if (!(basis == Basis::computational(state.systems()[sys])))
        throw Error("agent basis mismatch");
}

/// Branches of the state in the agent's basis. Components are expressed in
/// the state's own tags so they sum back to the input.
inline std::vector<Branch> record_branches(const StateVector& state, Agent agent,
                                           const Basis& basis) {
    const std::size_t sys = system_of(agent);
    const StateVector in_basis = qcore::express_in(state, sys, basis);
    const qcore::LocalUnitary back = qcore::LocalUnitary::change(sys, basis, state.tag(sys));
    std::vector<Branch> branches;
    const std::size_t n = state.num_systems();
    for (std::size_t i = 0; i < 2; ++i) {
        BasisLabel l = qcore::labels(basis)[i];
        l.system = state.systems()[sys];
        Eigen::VectorXcd v = in_basis.amplitudes();
        for (std::size_t idx = 0; idx < state.size(); ++idx)
            if (qcore::detail::digit(idx, sys, n) != i) v(static_cast<Eigen::Index>(idx)) = 0;
        const double w = v.squaredNorm();
        Eigen::VectorXcd comp = qcore::detail::embed(back.matrix(), sys, n) * v;
        branches.push_back({l, std::move(comp), w});
    }
    return branches;
}

}  // namespace detail

/// Records the agent's system, then uncomputes the record, leaving only the
/// "definite outcome" flag. The joint state is unchanged.
inline ProtocolRun record_and_erase(const StateVector& state, Agent agent, const Basis& basis) {
    detail::check_agent_basis(state, agent, basis);
    ProtocolRun run{{agent}, {agent}, {}, {MemoryRegister(agent)}, {}, state};
    run.registers.back().record();
    run.last_record = detail::record_branches(state, agent, basis);

    // uncompute: every branch's memory returns to the same flag state, so the
    // branch components add back coherently
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(state.size()));
    for (const auto& b : run.last_record) sum += b.component;
    run.registers.back().erase_to_flag();
    run.final_state = StateVector(state.systems(), state.tags(), std::move(sum));
    return run;
}

/// Continues a coherent run with another agent's record and erasure.
inline ProtocolRun record_and_erase(const ProtocolRun& prior, Agent agent, const Basis& basis) {
    if (!prior.coherent()) throw Error("run already decohered");
    ProtocolRun next = record_and_erase(std::get<StateVector>(prior.final_state), agent, basis);
    ProtocolRun run = prior;
    run.agents.push_back(agent);
    run.erased.push_back(agent);
    run.registers.push_back(next.registers.back());
    run.last_record = std::move(next.last_record);
    run.final_state = std::move(next.final_state);
    return run;
}

/// Records the agents' systems and keeps the records: the joint state becomes
/// the input dephased in each agent's computational basis.
inline ProtocolRun record_and_keep(const StateVector& state, const std::vector<Agent>& agents) {
    if (agents.empty()) throw Error("no agents");
    DensityOperator rho(state);
    ProtocolRun run{{}, {}, {}, {}, {}, state};
    for (Agent a : agents) {
        for (Agent seen : run.agents)
            if (seen == a) throw Error("agent listed twice");
        const std::size_t sys = system_of(a);
        if (sys >= state.num_systems()) throw Error("system out of range");
        const Basis basis = Basis::computational(state.systems()[sys]);
        rho = qcore::dephase(rho, sys, basis);
        run.agents.push_back(a);
        run.kept.push_back(a);
        run.registers.emplace_back(a);
        run.registers.back().record();
    }
    run.last_record = detail::record_branches(state, agents.back(),
                                              Basis::computational(state.systems()[system_of(agents.back())]));
    run.final_state = std::move(rho);
    return run;
}

struct DefiniteOutcomeFlag {
    bool set = false;
    std::vector<Agent> agents;
    StateVector state;
};

/// The one bit an erased run leaves behind. It carries no which-outcome
/// information: the returned state is the same whichever branch occurred.
inline DefiniteOutcomeFlag definite_outcome_flag(const ProtocolRun& run) {
    if (!run.coherent() || run.erased.empty() || !run.kept.empty())
        throw Error("flag requires erasure");
    for (const auto& r : run.registers)
        if (r.content() != Content::DefiniteOutcome) throw Error("flag requires erasure");
    return {true, run.erased, std::get<StateVector>(run.final_state)};
}

/// Erases every listed agent in order; an empty list returns the input untouched.
inline ProtocolRun erase_all(const StateVector& state, const std::vector<Agent>& agents) {
    if (agents.empty()) return ProtocolRun{{}, {}, {}, {}, {}, state};
    auto basis_for = [&](Agent a) {
        return Basis::computational(state.systems().at(system_of(a)));
    };
    ProtocolRun run = record_and_erase(state, agents.front(), basis_for(agents.front()));
    for (std::size_t k = 1; k < agents.size(); ++k)
        run = record_and_erase(run, agents[k], basis_for(agents[k]));
    return run;
}

}  // namespace hardysim::memory
