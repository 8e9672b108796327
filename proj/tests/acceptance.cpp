// acceptance.cpp
// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here and
// the exit status is non-zero if any criterion fails.

#include "hardysim/bell.hpp"
#include "hardysim/bohm.hpp"
#include "hardysim/epistemic.hpp"
#include "hardysim/hardy.hpp"
#include "hardysim/memory.hpp"
#include "oracle.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <string>

using namespace hardysim;
namespace L = hardysim::qcore::label;

namespace {

constexpr double kTight = 1e-15;   // exact zeros
constexpr double kExact = 1e-12;   // exact rational values
constexpr double kChsh = 1e-9;     // CHSH values and bounds
constexpr double kSigmas = 4.0;    // Monte-Carlo band
constexpr std::size_t kSamples = 1000000;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Outcome hardy_probability() {
    const double p = qcore::born_distribution(hardy::hardy_state(), hardy::kWbarW.bases())
                         .prob({L::okbar, L::ok});
    const double gap = std::fabs(p - 1.0 / 12);
    return {gap <= kExact, "P(okbar,ok) - 1/12 = " + num(gap)};
}

Outcome zero_set() {
    const double a = hardy::context_table(hardy::kZbarW).prob({L::t, L::ok});
    const double b = hardy::context_table(hardy::kWbarZ).prob({L::okbar, L::down});
    const double c = hardy::context_table(hardy::kZbarZ).prob({L::h, L::up});
    const double worst = std::max({std::fabs(a), std::fabs(b), std::fabs(c)});
    return {worst <= kTight, "max |P| over zero set = " + num(worst)};
}

Outcome certificate() {
    const auto cert = hardy::chain_prediction(hardy::hardy_chain());
    const bool ok = cert.valid() && std::fabs(cert.composed_prediction) <= kTight &&
                    std::fabs(cert.actual - 1.0 / 12) <= kExact;
    return {ok, "composed " + num(cert.composed_prediction) + ", actual " + num(cert.actual)};
}

Outcome equivariance() {
    double worst = 0;
    const auto born = hardy::context_table(hardy::kWbarW);
    for (auto f : {bohm::Foliation::F, bohm::Foliation::Fprime})
        for (auto k : {bohm::CouplingKind::Monotone, bohm::CouplingKind::Independent}) {
            const auto m = bohm::evolve(f, bohm::TransportCoupling(k)).final_marginal();
            for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(m[i] - born[i]));
        }
    return {worst <= kExact, "max marginal gap = " + num(worst)};
}

Outcome foliation_dependence() {
    const bohm::TransportCoupling mono(bohm::CouplingKind::Monotone);
    const bohm::HiddenConfig target{L::okbar, L::ok};
    const auto f = bohm::origin_of(bohm::evolve(bohm::Foliation::F, mono), target);
    const auto fp = bohm::origin_of(bohm::evolve(bohm::Foliation::Fprime, mono), target);
    const bool ok = bohm::same_distribution(f, {{{L::h, L::down}, 1.0}}, kExact) &&
                    bohm::same_distribution(fp, {{{L::t, L::up}, 1.0}}, kExact);
    return {ok, "F from (h,down) " + num(bohm::weight_of(f, {L::h, L::down})) +
                    ", Fprime from (t,up) " + num(bohm::weight_of(fp, {L::t, L::up}))};
}

Outcome path_weights() {
    const auto set = bohm::evolve(bohm::Foliation::F, bohm::TransportCoupling(bohm::CouplingKind::Monotone));
    const auto want = oracle::monotone_paths(true);
    std::map<std::string, double> got;
    double from_hd = 0, ff = 0, worst_hd = 0;
    for (const auto& p : set.paths) {
        got[p.initial.coin.str() + "," + p.initial.spin.str() + ">" + p.events.at(0).to.str() + ">" +
            p.events.at(1).to.str()] += p.weight;
        if (p.initial == bohm::HiddenConfig{L::h, L::down}) {
            from_hd += 1;
            worst_hd = std::max(worst_hd, std::fabs(p.weight - 1.0 / 12));
        }
        if (p.final == bohm::HiddenConfig{L::failbar, L::fail}) ff += p.weight;
    }
    double oracle_gap = got.size() == want.size() ? 0.0 : 1.0;
    for (const auto& [k, w] : want) oracle_gap = std::max(oracle_gap, std::fabs(got[k] - w));
    const bool ok = from_hd == 4 && worst_hd <= kExact && std::fabs(ff - 0.75) <= kExact &&
                    oracle_gap <= kExact;
    return {ok, "paths from (h,down) " + num(from_hd) + ", (failbar,fail) total " + num(ff) +
                    ", oracle gap " + num(oracle_gap)};
}

Outcome memory_tables() {
    using memory::Agent;
    const auto psi = hardy::hardy_state();
    const auto erased = memory::erase_all(psi, {Agent::Fbar, Agent::F});
    double erase_gap = 0;
    for (const auto& c : hardy::all_contexts()) {
        const auto t = erased.table(c.bases());
        const auto h = hardy::context_table(c);
        for (std::size_t i = 0; i < 4; ++i) erase_gap = std::max(erase_gap, std::fabs(t[i] - h[i]));
    }
    const auto both = memory::record_and_keep(psi, {Agent::F, Agent::Fbar}).table(hardy::kWbarW.bases());
    double uniform_gap = 0;
    for (std::size_t i = 0; i < 4; ++i) uniform_gap = std::max(uniform_gap, std::fabs(both[i] - 0.25));
    const double ff = memory::record_and_keep(psi, {Agent::F})
                          .table(hardy::kWbarW.bases())
                          .prob({L::failbar, L::fail});
    const bool ok = erase_gap <= kExact && uniform_gap <= kExact && std::fabs(ff - 5.0 / 12) <= kExact;
    return {ok, "erased gap " + num(erase_gap) + ", both-kept gap " + num(uniform_gap) +
                    ", F-kept (failbar,fail) " + num(ff)};
}

Outcome epistemic_trace() {
    const auto on = epistemic::run_trace({true, true, true});
    epistemic::TraceOptions forbid;
    forbid.allow_counterfactual_composition = false;
    const auto off = epistemic::run_trace({true, true, true}, forbid);
    const bool ok = on.contradiction && std::fabs(on.contradiction->composed) <= kTight &&
                    std::fabs(on.contradiction->actual - 1.0 / 12) <= kExact && !off.contradiction;
    std::string d = on.contradiction ? "witness (" + num(on.contradiction->composed) + ", " +
                                           num(on.contradiction->actual) + ")"
                                     : "no witness";
    return {ok, d + (off.contradiction ? ", forbidden: contradiction" : ", forbidden: none")};
}

Outcome chsh() {
    const double s = bell::chsh(bell::quantum_correlation, bell::optimal_quad());
    const auto report = bell::chsh_report(bell::optimal_quad(), 20);
    const auto evk = bell::erased_vs_kept_chsh(20);
    const bool ok = std::fabs(s - bell::kTsirelson) <= kChsh && report.S_lhv_max <= 2.0 + kChsh &&
                    evk.kept_vs_lhv_gap <= kExact;
    return {ok, "S_q " + num(s) + ", LHV scan max " + num(report.S_lhv_max) +
                    ", dephased vs -cos cos gap " + num(evk.kept_vs_lhv_gap)};
}

Outcome monte_carlo() {
    double worst = 0;  // in standard deviations
    bool covered = true;
    for (auto f : {bohm::Foliation::F, bohm::Foliation::Fprime})
        for (auto k : {bohm::CouplingKind::Monotone, bohm::CouplingKind::Independent}) {
            const bohm::TransportCoupling c(k);
            const auto set = bohm::evolve(f, c);
            const auto rep = bohm::sample(hardy::kWbarW, f, c, kSeed, kSamples);
            std::size_t seen = 0;
            for (const auto& p : set.paths) {
                const auto it = rep.counts.find(p.key());
                const double n = it == rep.counts.end() ? 0.0 : static_cast<double>(it->second);
                seen += it == rep.counts.end() ? 0 : it->second;
                const double sigma = std::sqrt(kSamples * p.weight * (1 - p.weight));
                const double dev = std::fabs(n - kSamples * p.weight);
                worst = std::max(worst, sigma > 0 ? dev / sigma : (dev > 0 ? 1e9 : 0.0));
            }
            covered = covered && seen == kSamples;
        }
    return {covered && worst <= kSigmas,
            "worst deviation " + num(worst) + " sigma over 4 combinations, N=1e6, seed " +
                std::to_string(kSeed)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Hardy probability", hardy_probability},
        {"zero set", zero_set},
        {"contradiction certificate", certificate},
        {"Bohmian equivariance", equivariance},
        {"foliation dependence", foliation_dependence},
        {"path weights under F", path_weights},
        {"memory erasure and decoherence", memory_tables},
        {"epistemic trace", epistemic_trace},
        {"CHSH", chsh},
        {"Monte-Carlo consistency", monte_carlo},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o{false, ""};
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s  %2zu. %-32s %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str());
        failed += o.pass ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
