// hardy.hpp
// The Hardy / Frauchiger-Renner experiment: its state, the four measurement
// contexts, single-context inference rules and the certificate produced when
// rules from different contexts are chained as if they shared one.

#pragma once

#include "hardysim/qcore.hpp"

#include <array>
#include <string>
#include <vector>

namespace hardysim::hardy {

using qcore::Basis;
using qcore::BasisLabel;
using qcore::OutcomeDistribution;
using qcore::StateVector;
using qcore::System;

inline constexpr std::size_t kCoin = 0;
inline constexpr std::size_t kSpin = 1;

enum class CoinBasis : std::uint8_t { Zbar, Wbar };
enum class SpinBasis : std::uint8_t { Z, W };

struct MeasurementContext {
    CoinBasis coin = CoinBasis::Zbar;
    SpinBasis spin = SpinBasis::Z;

    friend bool operator==(const MeasurementContext&, const MeasurementContext&) = default;

    Basis coin_basis() const { return coin == CoinBasis::Zbar ? Basis::zbar() : Basis::wbar(); }
    Basis spin_basis() const { return spin == SpinBasis::Z ? Basis::z() : Basis::w(); }
    qcore::Context bases() const { return {coin_basis(), spin_basis()}; }

    /// "(Wbar,W)"
    std::string name() const { return "(" + coin_basis().name() + "," + spin_basis().name() + ")"; }

    /// Whether a label belongs to one of this context's two bases.
    bool contains(const BasisLabel& l) const {
        return qcore::index_of(coin_basis(), l).has_value() ||
               qcore::index_of(spin_basis(), l).has_value();
    }
};

inline constexpr MeasurementContext kZbarZ{CoinBasis::Zbar, SpinBasis::Z};
inline constexpr MeasurementContext kZbarW{CoinBasis::Zbar, SpinBasis::W};
inline constexpr MeasurementContext kWbarZ{CoinBasis::Wbar, SpinBasis::Z};
inline constexpr MeasurementContext kWbarW{CoinBasis::Wbar, SpinBasis::W};

inline constexpr std::array<MeasurementContext, 4> all_contexts() {
    return {kZbarZ, kZbarW, kWbarZ, kWbarW};
}

/// (|h,down> + |t,down> + |t,up>)/sqrt3, coin first.
inline StateVector hardy_state() {
    const double a = 1.0 / std::sqrt(3.0);
    return qcore::make_state({a, 0.0, a, a}, {2, 2});
}

inline OutcomeDistribution context_table(const MeasurementContext& ctx) {
    return qcore::born_distribution(hardy_state(), ctx.bases());
}

/// "premise implies conclusion", claimed inside a single context.
struct InferenceRule {
    MeasurementContext context;
    BasisLabel premise;
    BasisLabel conclusion;

    std::string str() const {
        return premise.str() + "->" + conclusion.str() + " in " + context.name();
    }
};

/// P(premise and not conclusion) inside the rule's own context.
inline double violation_probability(const InferenceRule& rule) {
    if (!rule.context.contains(rule.premise) || !rule.context.contains(rule.conclusion))
        throw Error("outcome not in context");
    const auto table = context_table(rule.context);
    const std::size_t premise_sys = rule.premise.system == System::Coin ? kCoin : kSpin;
    const std::size_t conclusion_sys = rule.conclusion.system == System::Coin ? kCoin : kSpin;
    double p = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto o = table.outcome(i);
        if (o[premise_sys] == rule.premise && !(o[conclusion_sys] == rule.conclusion)) p += table[i];
    }
    return p;
}

inline bool check_inference(const InferenceRule& rule) {
    return violation_probability(rule) < kTolerance;
}

/// Inference I: ok -> h, valid in (Zbar,W).
inline InferenceRule rule_I() { return {kZbarW, qcore::label::ok, qcore::label::h}; }
/// Inference Ibar: okbar -> up, valid in (Wbar,Z).
inline InferenceRule rule_Ibar() { return {kWbarZ, qcore::label::okbar, qcore::label::up}; }
/// up -> t, the contrapositive of the missing (h,up) branch in (Zbar,Z).
inline InferenceRule rule_up_t() { return {kZbarZ, qcore::label::up, qcore::label::t}; }
/// t -> fail, valid in (Zbar,W).
inline InferenceRule rule_t_fail() { return {kZbarW, qcore::label::t, qcore::label::fail}; }

/// The chain okbar -> up -> t -> fail.
inline std::vector<InferenceRule> hardy_chain() { return {rule_Ibar(), rule_up_t(), rule_t_fail()}; }

struct ContradictionCertificate {
    /// Bound on P(first premise, not last conclusion) obtained by composing the
    /// links as if they lived in one joint distribution: the sum of the links'
    /// own violation probabilities.
    double composed_prediction = 0;
    /// The same event's Born probability in the context the end points define.
    double actual = 0;
    MeasurementContext actual_context;
    std::vector<BasisLabel> event;
    std::vector<InferenceRule> chain;

    bool valid() const { return composed_prediction < kTolerance && actual > kTolerance; }
};

/// Composes a chain non-contextually and compares with the Born rule in the
/// context spanned by the first premise and the last conclusion.
inline ContradictionCertificate chain_prediction(const std::vector<InferenceRule>& chain) {
    if (chain.empty()) throw Error("broken chain");
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        if (!(chain[k].conclusion == chain[k + 1].premise)) throw Error("broken chain");

    const BasisLabel& first = chain.front().premise;
    const BasisLabel& last = chain.back().conclusion;
    if (first.system == last.system) throw Error("broken chain");

    ContradictionCertificate cert;
    cert.chain = chain;
    for (const auto& rule : chain) cert.composed_prediction += violation_probability(rule);

    const BasisLabel& coin_end = first.system == System::Coin ? first : last;
    const BasisLabel& spin_end = first.system == System::Spin ? first : last;
    MeasurementContext ctx;
    ctx.coin = qcore::index_of(Basis::zbar(), coin_end) ? CoinBasis::Zbar : CoinBasis::Wbar;
    ctx.spin = qcore::index_of(Basis::z(), spin_end) ? SpinBasis::Z : SpinBasis::W;
    cert.actual_context = ctx;

    // the event "first premise holds and last conclusion fails"
    const auto table = context_table(ctx);
    const std::size_t first_sys = first.system == System::Coin ? kCoin : kSpin;
    const std::size_t last_sys = 1 - first_sys;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto o = table.outcome(i);
        if (o[first_sys] == first && !(o[last_sys] == last)) {
            cert.actual += table[i];
            cert.event = o;
        }
    }
    return cert;
}

}  // namespace hardysim::hardy
