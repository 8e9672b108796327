#include "hardysim/bohm.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace hardysim;
using namespace hardysim::bohm;
namespace L = hardysim::qcore::label;

namespace {

const HiddenConfig hd{L::h, L::down}, td{L::t, L::down}, tu{L::t, L::up};

double weight(const TrajectorySet& s, const HiddenConfig& init, const HiddenConfig& fin) {
    double w = 0;
    for (const auto& p : s.paths)
        if (p.initial == init && p.final == fin) w += p.weight;
    return w;
}

const std::vector<std::pair<Foliation, CouplingKind>> kCombos{
    {Foliation::F, CouplingKind::Monotone},
    {Foliation::F, CouplingKind::Independent},
    {Foliation::Fprime, CouplingKind::Monotone},
    {Foliation::Fprime, CouplingKind::Independent}};

}  // namespace

// ---------- coupling ----------

TEST(Coupling, MonotoneMatchesIntervalOracle) {
    const TransportCoupling c(CouplingKind::Monotone);
    const std::vector<Mass> in{{L::up, 0.25}, {L::down, 0.75}};
    const std::vector<Mass> out{{L::ok, 0.5}, {L::fail, 0.5}};
    const auto j = c.couple(in, out);
    const auto o = oracle::interval_coupling({0.25, 0.75}, {0.5, 0.5});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(j[a][b], o[a][b], 1e-15);
    EXPECT_TRUE(is_monotone(in, out, j));
}

TEST(Coupling, MarginalsReproducedForRandomMasses) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto kind : {CouplingKind::Monotone, CouplingKind::Independent}) {
        const TransportCoupling c(kind);
        for (int trial = 0; trial < 500; ++trial) {
            const double m = u(rng), a = u(rng) * m, b = u(rng) * m;
            const std::vector<Mass> in{{L::h, a}, {L::t, m - a}};
            const std::vector<Mass> out{{L::okbar, b}, {L::failbar, m - b}};
            const auto j = c.couple(in, out);
            for (std::size_t r = 0; r < 2; ++r) {
                EXPECT_NEAR(j[r][0] + j[r][1], in[r].mass, 1e-14);
                EXPECT_NEAR(j[0][r] + j[1][r], out[r].mass, 1e-14);
            }
            if (kind == CouplingKind::Monotone) {
                EXPECT_TRUE(is_monotone(in, out, j));
                EXPECT_TRUE(j[0][1] < 1e-14 || j[1][0] < 1e-14);  // no crossing
            }
        }
    }
}

TEST(Coupling, RejectsUnequalTotals) {
    const TransportCoupling c;
    try {
        c.couple({{L::h, 0.5}, {L::t, 0.5}}, {{L::okbar, 0.5}, {L::failbar, 0.4}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "coupling marginals differ");
    }
}

// ---------- evolve ----------

TEST(Evolve, FMonotonePathTable) {
    const auto s = evolve(Foliation::F, TransportCoupling(CouplingKind::Monotone));
    for (const auto& fin : {HiddenConfig{L::okbar, L::ok}, HiddenConfig{L::failbar, L::ok},
                            HiddenConfig{L::okbar, L::fail}, HiddenConfig{L::failbar, L::fail}})
        EXPECT_NEAR(weight(s, hd, fin), 1.0 / 12, 1e-12) << fin.str();
    EXPECT_NEAR(weight(s, td, {L::failbar, L::fail}), 1.0 / 3, 1e-12);
    EXPECT_NEAR(weight(s, tu, {L::failbar, L::fail}), 1.0 / 3, 1e-12);
    EXPECT_NEAR(s.total_weight(), 1.0, 1e-12);
}

TEST(Evolve, PathsMatchBruteForceOracle) {
    for (bool spin_first : {true, false}) {
        const auto s = evolve(spin_first ? Foliation::F : Foliation::Fprime,
                              TransportCoupling(CouplingKind::Monotone));
        const auto want = oracle::monotone_paths(spin_first);
        std::map<std::string, double> got;
        for (const auto& p : s.paths) {
            ASSERT_EQ(p.events.size(), 2u);
            const std::string key = p.initial.coin.str() + "," + p.initial.spin.str() + ">" +
                                    p.events[0].to.str() + ">" + p.events[1].to.str();
            got[key] += p.weight;
        }
        ASSERT_EQ(got.size(), want.size());
        for (const auto& [k, w] : want) {
            ASSERT_TRUE(got.count(k)) << k;
            EXPECT_NEAR(got[k], w, 1e-12) << k;
        }
    }
}

TEST(Evolve, FprimeOkOriginatesAtTailsUp) {
    const auto s = evolve(Foliation::Fprime, TransportCoupling(CouplingKind::Monotone));
    EXPECT_NEAR(weight(s, tu, {L::okbar, L::ok}), 1.0 / 12, 1e-12);
    EXPECT_NEAR(weight(s, tu, {L::failbar, L::ok}), 1.0 / 12, 1e-12);
    for (const auto& p : s.paths)
        if (p.final.spin == L::ok) {
            EXPECT_TRUE(p.initial == tu);
        }
}

TEST(Evolve, EquivarianceAllContextsAndCombos) {
    for (const auto& ctx : hardy::all_contexts())
        for (const auto& [f, k] : kCombos) {
            const auto s = evolve_context(ctx, f, TransportCoupling(k));
            EXPECT_NEAR(s.total_weight(), 1.0, 1e-12);
            const auto m = s.final_marginal();
            const auto born = hardy::context_table(ctx);
            for (std::size_t i = 0; i < 4; ++i)
                EXPECT_NEAR(m[i], born[i], 1e-12) << ctx.name() << " " << to_string(f);
        }
}

TEST(Evolve, ZbarZHasNoEvents) {
    const auto s = evolve_context(hardy::kZbarZ, Foliation::F, TransportCoupling{});
    for (const auto& p : s.paths) {
        EXPECT_TRUE(p.events.empty());
        EXPECT_TRUE(p.initial == p.final);
    }
}

// ---------- origins ----------

TEST(Origin, Examples) {
    const TransportCoupling mono(CouplingKind::Monotone);
    const auto f = evolve(Foliation::F, mono);
    const auto fp = evolve(Foliation::Fprime, mono);
    EXPECT_TRUE(same_distribution(origin_of(f, {L::okbar, L::ok}), {{hd, 1.0}}));
    EXPECT_TRUE(same_distribution(origin_of(fp, {L::okbar, L::ok}), {{tu, 1.0}}));
    const auto ff = origin_of(f, {L::failbar, L::fail});
    EXPECT_NEAR(weight_of(ff, hd), 1.0 / 9, 1e-12);
    EXPECT_NEAR(weight_of(ff, td), 4.0 / 9, 1e-12);
    EXPECT_NEAR(weight_of(ff, tu), 4.0 / 9, 1e-12);
    EXPECT_FALSE(same_distribution(origin_of(f, {L::okbar, L::ok}), origin_of(fp, {L::okbar, L::ok})));
}

TEST(Origin, UnreachedOutcome) {
    const auto s = evolve_context(hardy::kZbarW, Foliation::F, TransportCoupling{});
    try {
        origin_of(s, {L::t, L::ok});
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "unreached outcome");
    }
}

// ---------- reports ----------

TEST(CompareFoliations, MonotoneOriginsDifferMarginalsAgree) {
    const auto r = compare_foliations(TransportCoupling(CouplingKind::Monotone));
    EXPECT_TRUE(r.marginals_identical);
    EXPECT_LT(r.max_born_gap, 1e-12);
    bool found = false;
    for (const auto& c : r.outcomes)
        if (c.outcome == HiddenConfig{L::okbar, L::ok}) {
            found = true;
            EXPECT_TRUE(c.differs);
        }
    EXPECT_TRUE(found);
}

TEST(CompareFoliations, IndependentMarginalsAgree) {
    const auto r = compare_foliations(TransportCoupling(CouplingKind::Independent));
    EXPECT_TRUE(r.marginals_identical);
    EXPECT_LT(r.max_born_gap, 1e-12);
}

TEST(Legacy, SingleDetectionContexts) {
    const auto legacy = legacy_contexts();
    ASSERT_EQ(legacy.size(), 2u);
    const auto& zw = legacy[0].second;
    EXPECT_TRUE(legacy[0].first == hardy::kZbarW);
    EXPECT_NEAR(weight(zw, td, {L::t, L::fail}), 1.0 / 3, 1e-12);
    EXPECT_NEAR(weight(zw, tu, {L::t, L::fail}), 1.0 / 3, 1e-12);
    EXPECT_NEAR(weight(zw, hd, {L::h, L::ok}), 1.0 / 6, 1e-12);
    EXPECT_NEAR(weight(zw, hd, {L::h, L::fail}), 1.0 / 6, 1e-12);

    const auto& wz = legacy[1].second;
    EXPECT_TRUE(legacy[1].first == hardy::kWbarZ);
    EXPECT_NEAR(weight(wz, tu, {L::okbar, L::up}), 1.0 / 6, 1e-12);
    EXPECT_NEAR(weight(wz, tu, {L::failbar, L::up}), 1.0 / 6, 1e-12);
    EXPECT_NEAR(weight(wz, hd, {L::failbar, L::down}), 1.0 / 3, 1e-12);
    EXPECT_NEAR(weight(wz, td, {L::failbar, L::down}), 1.0 / 3, 1e-12);

    // one event, so the foliation is irrelevant
    for (const auto& [ctx, set] : legacy) {
        const auto other = evolve_context(ctx, Foliation::Fprime, TransportCoupling{});
        for (const auto& p : set.paths) EXPECT_NEAR(weight(other, p.initial, p.final), weight(set, p.initial, p.final), 1e-15);
    }
}

TEST(ConditionalWave, EmptyConditionalRejected) {
    try {
        conditional_wave(hardy::hardy_state(), kSpin, L::up);  // fine: coin is t
        conditional_wave(qcore::make_state({1.0, 0.0, 0.0, 0.0}, {2, 2}), kSpin, L::up);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "empty conditional");
    }
}

// ---------- sampling ----------

TEST(Sample, DeterministicGivenSeed) {
    const TransportCoupling c;
    const auto a = sample(hardy::kWbarW, Foliation::F, c, 42, 2000);
    const auto b = sample(hardy::kWbarW, Foliation::F, c, 42, 2000);
    EXPECT_EQ(a.counts, b.counts);
    const auto d = sample(hardy::kWbarW, Foliation::F, c, 43, 2000);
    EXPECT_NE(a.counts, d.counts);
}

TEST(Sample, WithinFourSigmaOfEnumeration) {
    const std::size_t n = 200000;
    for (const auto& [f, k] : kCombos) {
        const auto set = evolve(f, TransportCoupling(k));
        const auto rep = sample(hardy::kWbarW, f, TransportCoupling(k), 2024, n);
        std::size_t seen = 0;
        for (const auto& p : set.paths) {
            const auto it = rep.counts.find(p.key());
            const double got = it == rep.counts.end() ? 0.0 : static_cast<double>(it->second);
            const double sigma = std::sqrt(n * p.weight * (1 - p.weight));
            EXPECT_LE(std::fabs(got - n * p.weight), 4 * sigma + 1e-9) << p.key();
            seen += it == rep.counts.end() ? 0 : it->second;
        }
        EXPECT_EQ(seen, n);  // no sampled path outside the enumeration
    }
}
