// bohm.hpp
// Discrete pilot-wave dynamics for the Hardy experiment.
//
// The hidden configuration is one branch label per system. Each measurement
// event re-expresses one system in its detection basis; the foliation fixes
// the order of the two events. At an event the active system's output
// distribution is its conditional wave, given the partner's current hidden
// branch, pushed through the beam splitter. Which hidden branch goes to which
// output port inside that conditional packet is decided by a transport
// coupling. The pilot state is then collapsed onto the realized port.
//
// All transition kernels are computed from the pilot state alone; ensemble
// weights are only propagated, so agreement of the final ensemble with the
// Born rule (equivariance) is a checked property, not an input.

#pragma once

#include "hardysim/hardy.hpp"
#include "hardysim/qcore.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hardysim::bohm {

using hardy::kCoin;
using hardy::kSpin;
using hardy::MeasurementContext;
using qcore::Basis;
using qcore::BasisLabel;
using qcore::StateVector;
using qcore::System;

struct HiddenConfig {
    BasisLabel coin;
    BasisLabel spin;

    friend bool operator==(const HiddenConfig&, const HiddenConfig&) = default;

    const BasisLabel& on(std::size_t system) const { return system == kCoin ? coin : spin; }
    BasisLabel& on(std::size_t system) { return system == kCoin ? coin : spin; }

    std::string str() const { return "(" + coin.str() + "," + spin.str() + ")"; }
};

/// Weighted hidden configurations; order is meaningful for display only.
using ConfigDistribution = std::vector<std::pair<HiddenConfig, double>>;

inline double weight_of(const ConfigDistribution& d, const HiddenConfig& c) {
    double w = 0;
    for (const auto& [cfg, p] : d)
        if (cfg == c) w += p;
    return w;
}

/// True when the two distributions agree on every configuration within tol.
inline bool same_distribution(const ConfigDistribution& a, const ConfigDistribution& b,
                              double tol = kTolerance) {
    for (const auto& [cfg, p] : a)
        if (std::fabs(p - weight_of(b, cfg)) > tol) return false;
    for (const auto& [cfg, p] : b)
        if (std::fabs(p - weight_of(a, cfg)) > tol) return false;
    return true;
}

/// Order of the two space-like separated detection events.
enum class Foliation : std::uint8_t {
    F,       // spin (W) detected first
    Fprime,  // coin (Wbar) detected first
};

inline std::string to_string(Foliation f) { return f == Foliation::F ? "F" : "Fprime"; }

inline std::array<std::size_t, 2> event_order(Foliation f) {
    return f == Foliation::F ? std::array<std::size_t, 2>{kSpin, kCoin}
                             : std::array<std::size_t, 2>{kCoin, kSpin};
}

enum class CouplingKind : std::uint8_t { Monotone, Independent };

inline std::string to_string(CouplingKind k) {
    return k == CouplingKind::Monotone ? "monotone" : "independent";
}

struct Mass {
    BasisLabel label;
    double mass = 0;
};

/// Joint law between the hidden branches entering an event and the output
/// ports leaving it. Both marginals are reproduced exactly.
class TransportCoupling {
public:
    explicit TransportCoupling(CouplingKind kind = CouplingKind::Monotone) : kind_(kind) {}

    CouplingKind kind() const { return kind_; }

    /// Ordering convention: h above t, up above down, okbar above failbar,
    /// ok above fail, plus_a above minus_a. Lower rank comes first.
    static int rank(const BasisLabel& l) {
        using qcore::Outcome;
        switch (l.name) {
            case Outcome::h:
            case Outcome::up:
            case Outcome::okbar:
            case Outcome::ok:
            case Outcome::plus_a: return 0;
            default: return 1;
        }
    }

    /// joint[i][j]: mass moved from input i to output j. Inputs and outputs
    /// must carry the same total mass.
    std::vector<std::vector<double>> couple(const std::vector<Mass>& in,
                                            const std::vector<Mass>& out) const {
        double in_total = 0, out_total = 0;
        for (const auto& m : in) in_total += m.mass;
        for (const auto& m : out) out_total += m.mass;
        if (std::fabs(in_total - out_total) > kTolerance) throw Error("coupling marginals differ");

        std::vector<std::vector<double>> joint(in.size(), std::vector<double>(out.size(), 0.0));
        if (in_total <= 0) return joint;

        if (kind_ == CouplingKind::Independent) {
            for (std::size_t i = 0; i < in.size(); ++i)
                for (std::size_t j = 0; j < out.size(); ++j)
                    joint[i][j] = in[i].mass * out[j].mass / in_total;
            return joint;
        }

        // quantile coupling: walk both sides in ranked order
        auto order = [](const std::vector<Mass>& v) {
            std::vector<std::size_t> idx(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) idx[k] = k;
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return rank(v[a].label) < rank(v[b].label);
            });
            return idx;
        };
        const auto oi = order(in), oj = order(out);
        std::size_t a = 0, b = 0;
        double left_in = in.empty() ? 0 : in[oi[0]].mass;
        double left_out = out.empty() ? 0 : out[oj[0]].mass;
        constexpr double eps = 1e-15;
        while (a < oi.size() && b < oj.size()) {
            if (left_in <= eps) {
                if (++a < oi.size()) left_in = in[oi[a]].mass;
                continue;
            }
            if (left_out <= eps) {
                if (++b < oj.size()) left_out = out[oj[b]].mass;
                continue;
            }
            const double moved = std::min(left_in, left_out);
            joint[oi[a]][oj[b]] += moved;
            left_in -= moved;
            left_out -= moved;
        }
        return joint;
    }

private:
    CouplingKind kind_;
};

/// No-crossing check: a higher-ranked input never sends mass to a port ranked
/// below one reached by a lower-ranked input.
inline bool is_monotone(const std::vector<Mass>& in, const std::vector<Mass>& out,
                        const std::vector<std::vector<double>>& joint) {
    constexpr double eps = 1e-15;
    for (std::size_t i = 0; i < in.size(); ++i)
        for (std::size_t k = 0; k < in.size(); ++k) {
            if (TransportCoupling::rank(in[i].label) >= TransportCoupling::rank(in[k].label))
                continue;
            for (std::size_t j = 0; j < out.size(); ++j)
                for (std::size_t l = 0; l < out.size(); ++l)
                    if (joint[i][j] > eps && joint[k][l] > eps &&
                        TransportCoupling::rank(out[j].label) > TransportCoupling::rank(out[l].label))
                        return false;
        }
    return true;
}

struct Transition {
    System system;
    BasisLabel from;
    BasisLabel to;
};

struct Path {
    HiddenConfig initial;
    std::vector<Transition> events;
    HiddenConfig final;
    double weight = 0;

    std::string key() const {
        std::string k = initial.str();
        for (const auto& e : events)
            k += " " + qcore::to_string(e.system) + ":" + e.from.str() + "->" + e.to.str();
        return k;
    }
};

struct TrajectorySet {
    Foliation foliation = Foliation::F;
    CouplingKind coupling = CouplingKind::Monotone;
    MeasurementContext context = hardy::kWbarW;
    std::vector<Path> paths;

    double total_weight() const {
        double s = 0;
        for (const auto& p : paths) s += p.weight;
        return s;
    }

    /// Final-outcome marginal laid out like the context's Born table.
    qcore::OutcomeDistribution final_marginal() const {
        const auto bases = context.bases();
        std::vector<double> probs(4, 0.0);
        qcore::OutcomeDistribution layout({System::Coin, System::Spin}, bases, probs);
        for (const auto& p : paths) {
            auto i = layout.index_of({p.final.coin, p.final.spin});
            if (!i) throw InvariantError("final configuration outside context");
            probs[*i] += p.weight;
        }
        return qcore::OutcomeDistribution({System::Coin, System::Spin}, bases, std::move(probs));
    }
};

/// Born weights of the hidden configurations before any detection.
inline ConfigDistribution initial_distribution() {
    const auto table = hardy::context_table(hardy::kZbarZ);
    ConfigDistribution d;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto o = table.outcome(i);
        d.emplace_back(HiddenConfig{o[kCoin], o[kSpin]}, table[i]);
    }
    return d;
}

/// State of the other system of a two-system state, given the hidden branch of
/// `fixed_system` in its current basis.
inline StateVector conditional_wave(const StateVector& state, std::size_t fixed_system,
                                    const BasisLabel& fixed_branch) {
    if (state.num_systems() != 2) throw Error("dimension mismatch");
    if (fixed_system > 1) throw Error("system out of range");
    auto i = qcore::index_of(state.tag(fixed_system), fixed_branch);
    if (!i || fixed_branch.system != state.systems()[fixed_system])
        throw Error("outcome not in basis");
    const std::size_t other = 1 - fixed_system;
    Eigen::VectorXcd v(2);
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t index = fixed_system == 0 ? (*i << 1) | j : (j << 1) | *i;
        v(static_cast<Eigen::Index>(j)) = state[index];
    }
    if (v.squaredNorm() < 1e-15) throw Error("empty conditional");
    return StateVector({state.systems()[other]}, {state.tag(other)}, std::move(v));
}

/// Where each hidden branch of the active system may go at one event, for one
/// conditional packet. Rows follow the active system's current basis labels.
struct EventKernel {
    std::array<BasisLabel, 2> inputs;
    std::array<BasisLabel, 2> outputs;
    std::array<double, 2> input_mass{};           // conditional Born law before the event
    std::array<std::array<double, 2>, 2> prob{};  // prob[i][j] = P(output j | input i)
};

/// Kernel for detecting `active` in `target` with the partner's hidden branch fixed.
inline EventKernel event_kernel(const StateVector& pilot, std::size_t active,
                                const BasisLabel& partner_branch, const Basis& target,
                                const TransportCoupling& coupling) {
    const std::size_t partner = 1 - active;
    const StateVector before = conditional_wave(pilot, partner, partner_branch);
    const StateVector after = qcore::express_in(before, 0, target);

    EventKernel k;
    k.inputs = qcore::labels(before.tag(0));
    k.outputs = qcore::labels(target);
    std::vector<Mass> in, out;
    for (std::size_t i = 0; i < 2; ++i) {
        k.input_mass[i] = std::norm(before[i]);
        in.push_back({k.inputs[i], k.input_mass[i]});
        out.push_back({k.outputs[i], std::norm(after[i])});
    }
    const auto joint = coupling.couple(in, out);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            k.prob[i][j] = in[i].mass > 0 ? joint[i][j] / in[i].mass : 0.0;
    return k;
}

namespace detail {

struct Walker {
    Path path;
    StateVector pilot;
    std::string history;  // realized ports so far; identifies the collapsed pilot
};

inline std::vector<std::size_t> active_events(const MeasurementContext& ctx, Foliation f) {
    std::vector<std::size_t> events;
    for (std::size_t s : event_order(f)) {
        const bool detects = s == kCoin ? ctx.coin == hardy::CoinBasis::Wbar
                                        : ctx.spin == hardy::SpinBasis::W;
        if (detects) events.push_back(s);
    }
    return events;
}

}  // namespace detail

/// Full enumeration of weighted paths for one context.
inline TrajectorySet evolve_context(const MeasurementContext& ctx, Foliation foliation,
                                    const TransportCoupling& coupling) {
    const StateVector psi = hardy::hardy_state();
    const auto bases = ctx.bases();

    std::vector<detail::Walker> walkers;
    for (const auto& [cfg, w] : initial_distribution()) {
        if (w <= 0) continue;
        walkers.push_back({Path{cfg, {}, cfg, w}, psi, ""});
    }

    for (std::size_t active : detail::active_events(ctx, foliation)) {
        const std::size_t partner = 1 - active;
        const Basis& target = bases[active];
        std::map<std::string, EventKernel> kernels;
        std::vector<detail::Walker> next;
        for (auto& wk : walkers) {
            const BasisLabel branch = wk.path.final.on(partner);
            const std::string cls = wk.history + "|" + branch.str();
            auto it = kernels.find(cls);
            if (it == kernels.end())
                it = kernels.emplace(cls, event_kernel(wk.pilot, active, branch, target, coupling))
                         .first;
            const EventKernel& k = it->second;

            const BasisLabel from = wk.path.final.on(active);
            auto i = qcore::index_of(wk.pilot.tag(active), from);
            if (!i || k.input_mass[*i] <= 0)
                throw InvariantError("hidden configuration outside the pilot's support");

            const StateVector detected = qcore::express_in(wk.pilot, active, target);
            for (std::size_t j = 0; j < 2; ++j) {
                const double p = k.prob[*i][j];
                if (p <= 0) continue;
                detail::Walker nw{wk.path, qcore::project(detected, active, k.outputs[j]).state,
                                  wk.history + k.outputs[j].str() + ";"};
                nw.path.weight *= p;
                nw.path.events.push_back({wk.pilot.systems()[active], from, k.outputs[j]});
                nw.path.final.on(active) = k.outputs[j];
                next.push_back(std::move(nw));
            }
        }
        walkers = std::move(next);
    }

    TrajectorySet set{foliation, coupling.kind(), ctx, {}};
    for (auto& wk : walkers) set.paths.push_back(std::move(wk.path));
    if (std::fabs(set.total_weight() - 1.0) > kTolerance)
        throw InvariantError("trajectory weights do not sum to 1");
    return set;
}

/// The (Wbar,W) experiment with both detections.
inline TrajectorySet evolve(Foliation foliation, const TransportCoupling& coupling) {
    return evolve_context(hardy::kWbarW, foliation, coupling);
}

/// Conditional law of the initial configuration given a final outcome.
inline ConfigDistribution origin_of(const TrajectorySet& set, const HiddenConfig& final_outcome) {
    double total = 0;
    for (const auto& p : set.paths)
        if (p.final == final_outcome) total += p.weight;
    if (total < 1e-15) throw Error("unreached outcome");
    ConfigDistribution d;
    for (const auto& [cfg, w0] : initial_distribution()) {
        if (w0 <= 0) continue;
        double w = 0;
        for (const auto& p : set.paths)
            if (p.final == final_outcome && p.initial == cfg) w += p.weight;
        if (w > 0) d.emplace_back(cfg, w / total);
    }
    return d;
}

struct OriginComparison {
    HiddenConfig outcome;
    double probability = 0;  // Born probability of the outcome
    ConfigDistribution origin_F;
    ConfigDistribution origin_Fprime;
    bool differs = false;
};

struct FoliationReport {
    CouplingKind coupling = CouplingKind::Monotone;
    std::vector<OriginComparison> outcomes;
    bool marginals_identical = false;
    double max_marginal_gap = 0;  // largest |P_F - P_F'| over final outcomes
    double max_born_gap = 0;      // largest |P_fol - P_Born| over both foliations
};

inline FoliationReport compare_foliations(const TransportCoupling& coupling) {
    const TrajectorySet f = evolve(Foliation::F, coupling);
    const TrajectorySet fp = evolve(Foliation::Fprime, coupling);
    const auto mf = f.final_marginal(), mfp = fp.final_marginal();
    const auto born = hardy::context_table(hardy::kWbarW);

    FoliationReport r;
    r.coupling = coupling.kind();
    for (std::size_t i = 0; i < born.size(); ++i) {
        r.max_marginal_gap = std::max(r.max_marginal_gap, std::fabs(mf[i] - mfp[i]));
        r.max_born_gap = std::max({r.max_born_gap, std::fabs(mf[i] - born[i]),
                                   std::fabs(mfp[i] - born[i])});
        if (born[i] < 1e-15) continue;
        const auto o = born.outcome(i);
        OriginComparison c{HiddenConfig{o[kCoin], o[kSpin]}, born[i], {}, {}, false};
        c.origin_F = origin_of(f, c.outcome);
        c.origin_Fprime = origin_of(fp, c.outcome);
        c.differs = !same_distribution(c.origin_F, c.origin_Fprime);
        r.outcomes.push_back(std::move(c));
    }
    r.marginals_identical = r.max_marginal_gap < kTolerance;
    return r;
}

/// The two single-detection experiments, (Zbar,W) and (Wbar,Z). With one
/// event only, the foliation plays no role.
inline std::vector<std::pair<MeasurementContext, TrajectorySet>> legacy_contexts(
    const TransportCoupling& coupling = TransportCoupling{}) {
    return {{hardy::kZbarW, evolve_context(hardy::kZbarW, Foliation::F, coupling)},
            {hardy::kWbarZ, evolve_context(hardy::kWbarZ, Foliation::F, coupling)}};
}

struct SampleReport {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::map<std::string, std::size_t> counts;  // by Path::key()
};

/// Runs `samples` independent forward simulations of single hidden
/// trajectories. Deterministic given the seed.
inline SampleReport sample(const MeasurementContext& ctx, Foliation foliation,
                           const TransportCoupling& coupling, std::uint64_t seed,
                           std::size_t samples) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const StateVector psi = hardy::hardy_state();
    const auto initial = initial_distribution();
    const auto events = detail::active_events(ctx, foliation);
    const auto bases = ctx.bases();

    // kernels and collapsed pilots depend only on the realized history
    std::map<std::string, EventKernel> kernels;
    std::map<std::string, StateVector> pilots;

    SampleReport report{seed, samples, {}};
    for (std::size_t n = 0; n < samples; ++n) {
        double u = unit(rng), acc = 0;
        std::size_t pick = initial.size() - 1;
        for (std::size_t k = 0; k < initial.size(); ++k) {
            acc += initial[k].second;
            if (u < acc && initial[k].second > 0) {
                pick = k;
                break;
            }
        }
        Path path{initial[pick].first, {}, initial[pick].first, 1.0};
        StateVector pilot = psi;
        std::string history;
        for (std::size_t active : events) {
            const std::size_t partner = 1 - active;
            const BasisLabel branch = path.final.on(partner);
            const std::string cls = history + "|" + branch.str();
            auto it = kernels.find(cls);
            if (it == kernels.end())
                it = kernels.emplace(cls, event_kernel(pilot, active, branch, bases[active], coupling))
                         .first;
            const EventKernel& k = it->second;
            const BasisLabel from = path.final.on(active);
            const std::size_t i = *qcore::index_of(pilot.tag(active), from);
            const std::size_t j = unit(rng) < k.prob[i][0] ? 0 : 1;

            history += k.outputs[j].str() + ";";
            auto pt = pilots.find(history);
            if (pt == pilots.end()) {
                const StateVector detected = qcore::express_in(pilot, active, bases[active]);
                pt = pilots.emplace(history, qcore::project(detected, active, k.outputs[j]).state)
                         .first;
            }
            pilot = pt->second;
            path.events.push_back({pilot.systems()[active], from, k.outputs[j]});
            path.final.on(active) = k.outputs[j];
        }
        ++report.counts[path.key()];
    }
    return report;
}

}  // namespace hardysim::bohm
