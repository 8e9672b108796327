// bell.hpp
// Singlet CHSH statistics versus the observer-independent-facts hidden
// variable model, and the same comparison between erased and kept friend
// records.

#pragma once

#include "hardysim/memory.hpp"
#include "hardysim/qcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace hardysim::bell {

using qcore::Basis;
using qcore::BasisLabel;
using qcore::StateVector;
using qcore::System;

inline const double kTsirelson = 2.0 * std::numbers::sqrt2;

/// (|up,down> - |down,up>)/sqrt2 in the order (dd, du, ud, uu), up to a global sign.
inline StateVector singlet() {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd v(4);
    v << 0.0, r, -r, 0.0;
    return StateVector({System::Spin, System::Spin}, {Basis::z(), Basis::z()}, std::move(v));
}

/// +1 for the "+a" port (and up), -1 otherwise.
inline double outcome_sign(const BasisLabel& l) {
    return (l.name == qcore::Outcome::plus_a || l.name == qcore::Outcome::up) ? 1.0 : -1.0;
}

/// E = sum over outcomes of (+1/-1 product) times probability.
inline double correlation(const qcore::OutcomeDistribution& d) {
    double e = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto o = d.outcome(i);
        const double x = outcome_sign(o[0]), y = outcome_sign(o[1]);
        e += x * y * d[i];
    }
    return e;
}

/// Correlation of a two-spin state for planar settings alpha, beta.
inline double correlation(const StateVector& state, double alpha, double beta) {
    return correlation(qcore::born_distribution(state, {Basis::angled(alpha), Basis::angled(beta)}));
}

inline double correlation(const qcore::DensityOperator& rho, double alpha, double beta) {
    return correlation(qcore::born_distribution(rho, {Basis::angled(alpha), Basis::angled(beta)}));
}

/// Singlet correlation from Born probabilities.
inline double quantum_correlation(double alpha, double beta) {
    static const StateVector psi = singlet();
    return correlation(psi, alpha, beta);
}

struct AngleQuad {
    double a = 0, a_prime = 0, b = 0, b_prime = 0;

    static AngleQuad wrapped(double a, double ap, double b, double bp) {
        using qcore::detail::wrap_angle;
        return {wrap_angle(a), wrap_angle(ap), wrap_angle(b), wrap_angle(bp)};
    }
};

/// The settings reaching 2*sqrt2 for the singlet.
inline AngleQuad optimal_quad() {
    return AngleQuad::wrapped(0.0, std::numbers::pi / 2, std::numbers::pi / 4, -std::numbers::pi / 4);
}

using CorrelationFn = std::function<double(double, double)>;

/// S = |E(a,b) + E(a',b) + E(a,b') - E(a',b')|.
inline double chsh(const CorrelationFn& e, const AngleQuad& q) {
    return std::fabs(e(q.a, q.b) + e(q.a_prime, q.b) + e(q.a, q.b_prime) - e(q.a_prime, q.b_prime));
}

/// Finite local hidden variable model over spin pairs (particle 1, particle 2).
class LHVModel {
public:
    /// p_plus(side, angle, local component of lambda) = P(+a | lambda).
    using Response = std::function<double(std::size_t, double, const BasisLabel&)>;

    LHVModel(std::array<std::array<BasisLabel, 2>, 4> lambdas, std::array<double, 4> prior,
             Response p_plus)
        : lambdas_(lambdas), prior_(prior), p_plus_(std::move(p_plus)) {
        double s = 0;
        for (double p : prior_) {
            if (p < 0) throw Error("negative prior");
            s += p;
        }
        if (std::fabs(s - 1.0) > kTolerance) throw Error("prior does not sum to 1");
    }

    /// Perfect anticorrelation in z: lambda in {(up,down), (down,up)} with equal
    /// weight, and P(+a|up) = cos^2(a/2) = P(-a|down).
    static LHVModel observer_independent_facts() {
        using namespace qcore::label;
        return LHVModel({{{up, down}, {down, up}, {up, up}, {down, down}}}, {0.5, 0.5, 0.0, 0.0},
                        [](std::size_t, double angle, const BasisLabel& local) {
                            const double c = std::cos(angle / 2);
                            return local == qcore::label::up ? c * c : 1.0 - c * c;
                        });
    }

    const std::array<std::array<BasisLabel, 2>, 4>& lambdas() const { return lambdas_; }
    const std::array<double, 4>& prior() const { return prior_; }

    /// P(outcome | lambda) for one side; outcome index 0 is +a, 1 is -a.
    double response(std::size_t side, double angle, std::size_t lambda, std::size_t outcome) const {
        const double p = p_plus_(side, angle, lambdas_.at(lambda).at(side));
        if (p < -kTolerance || p > 1 + kTolerance) throw Error("response out of range");
        return outcome == 0 ? p : 1.0 - p;
    }

    /// Factorized joint law, joint[x][y] = sum_l P1(x|l) P2(y|l) P(l).
    std::array<std::array<double, 2>, 2> joint(double alpha, double beta) const {
        std::array<std::array<double, 2>, 2> j{};
        for (std::size_t l = 0; l < 4; ++l)
            for (std::size_t x = 0; x < 2; ++x)
                for (std::size_t y = 0; y < 2; ++y)
                    j[x][y] += response(0, alpha, l, x) * response(1, beta, l, y) * prior_[l];
        return j;
    }

private:
    std::array<std::array<BasisLabel, 2>, 4> lambdas_;
    std::array<double, 4> prior_;
    Response p_plus_;
};

/// E = sum_l (sum_x x P1(x|l)) (sum_y y P2(y|l)) P(l).
inline double lhv_correlation(const LHVModel& model, double alpha, double beta) {
    double e = 0;
    for (std::size_t l = 0; l < 4; ++l) {
        const double e1 = model.response(0, alpha, l, 0) - model.response(0, alpha, l, 1);
        const double e2 = model.response(1, beta, l, 0) - model.response(1, beta, l, 1);
        e += e1 * e2 * model.prior()[l];
    }
    return e;
}

/// Maximizes S by Nelder-Mead from a starting quad.
inline std::pair<AngleQuad, double> refine(const CorrelationFn& e, const AngleQuad& start,
                                           double step = 0.15, int max_iter = 4000) {
    using Point = std::array<double, 4>;
    auto value = [&](const Point& p) { return -chsh(e, {p[0], p[1], p[2], p[3]}); };

    std::array<Point, 5> simplex;
    simplex[0] = {start.a, start.a_prime, start.b, start.b_prime};
    for (std::size_t k = 0; k < 4; ++k) {
        simplex[k + 1] = simplex[0];
        simplex[k + 1][k] += step;
    }
    std::array<double, 5> f;
    for (std::size_t k = 0; k < 5; ++k) f[k] = value(simplex[k]);

    for (int it = 0; it < max_iter; ++it) {
        std::array<std::size_t, 5> idx{0, 1, 2, 3, 4};
        std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return f[x] < f[y]; });
        std::array<Point, 5> s2;
        std::array<double, 5> f2;
        for (std::size_t k = 0; k < 5; ++k) {
            s2[k] = simplex[idx[k]];
            f2[k] = f[idx[k]];
        }
        simplex = s2;
        f = f2;
        if (std::fabs(f[4] - f[0]) < 1e-15) break;

        Point centroid{};
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t d = 0; d < 4; ++d) centroid[d] += simplex[k][d] / 4.0;
        auto along = [&](double t) {
            Point p;
            for (std::size_t d = 0; d < 4; ++d) p[d] = centroid[d] + t * (simplex[4][d] - centroid[d]);
            return p;
        };
        const Point xr = along(-1.0);
        const double fr = value(xr);
        if (fr < f[0]) {
            const Point xe = along(-2.0);
            const double fe = value(xe);
            simplex[4] = fe < fr ? xe : xr;
            f[4] = std::min(fe, fr);
        } else if (fr < f[3]) {
            simplex[4] = xr;
            f[4] = fr;
        } else {
            const Point xc = fr < f[4] ? along(-0.5) : along(0.5);
            const double fc = value(xc);
            if (fc < std::min(fr, f[4])) {
                simplex[4] = xc;
                f[4] = fc;
            } else {
                for (std::size_t k = 1; k < 5; ++k) {
                    for (std::size_t d = 0; d < 4; ++d)
                        simplex[k][d] = simplex[0][d] + 0.5 * (simplex[k][d] - simplex[0][d]);
                    f[k] = value(simplex[k]);
                }
            }
        }
    }
    std::size_t best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    const Point& p = simplex[best];
    return {AngleQuad::wrapped(p[0], p[1], p[2], p[3]), -f[best]};
}

struct ScanResult {
    std::size_t resolution = 20;
    AngleQuad grid_argmax;
    double grid_max = 0;
    AngleQuad argmax;  // after local refinement
    double max = 0;    // max(grid_max, refined value)
};

/// Evaluates S on a resolution^4 grid over [0, 2pi)^4, then refines locally
/// from the best grid point. Correlations are tabulated once per grid pair.
inline ScanResult grid_scan(const CorrelationFn& e, std::size_t resolution = 20) {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(resolution);
    std::vector<double> table(resolution * resolution);
    for (std::size_t i = 0; i < resolution; ++i)
        for (std::size_t j = 0; j < resolution; ++j)
            table[i * resolution + j] = e(step * static_cast<double>(i), step * static_cast<double>(j));
    auto E = [&](std::size_t i, std::size_t j) { return table[i * resolution + j]; };

    ScanResult r;
    r.resolution = resolution;
    r.grid_max = -1;
    for (std::size_t a = 0; a < resolution; ++a)
        for (std::size_t ap = 0; ap < resolution; ++ap)
            for (std::size_t b = 0; b < resolution; ++b)
                for (std::size_t bp = 0; bp < resolution; ++bp) {
                    const double s = std::fabs(E(a, b) + E(ap, b) + E(a, bp) - E(ap, bp));
                    if (s > r.grid_max) {
                        r.grid_max = s;
                        r.grid_argmax = {step * static_cast<double>(a), step * static_cast<double>(ap),
                                         step * static_cast<double>(b), step * static_cast<double>(bp)};
                    }
                }
    auto [quad, s] = refine(e, r.grid_argmax);
    if (s > r.grid_max) {
        r.argmax = quad;
        r.max = s;
    } else {
        r.argmax = r.grid_argmax;
        r.max = r.grid_max;
    }
    return r;
}

struct ChshReport {
    AngleQuad quad;
    double S_quantum = 0;
    double S_lhv = 0;  // at `quad`
    double S_lhv_max = 0;
    AngleQuad argmax_quad;  // of the LHV scan
    std::size_t grid_resolution = 20;
};

inline ChshReport chsh_report(const AngleQuad& quad, std::size_t resolution = 20) {
    const auto model = LHVModel::observer_independent_facts();
    const CorrelationFn lhv = [&](double a, double b) { return lhv_correlation(model, a, b); };
    const ScanResult scan = grid_scan(lhv, resolution);
    return {quad, chsh(quantum_correlation, quad), chsh(lhv, quad), scan.max, scan.argmax, resolution};
}

struct ErasedVsKept {
    AngleQuad quad;
    double S_erased = 0;     // coherent singlet after both friends erase
    double S_kept_max = 0;   // scan maximum with both records kept
    AngleQuad kept_argmax;
    double kept_vs_lhv_gap = 0;  // max |E_kept - E_lhv| over a 100 x 100 angle grid
    double kept_aligned = 0;     // E_kept(0, 0)
};

inline ErasedVsKept erased_vs_kept_chsh(std::size_t resolution = 20) {
    using memory::Agent;
    const StateVector psi = singlet();
    const auto erased = memory::erase_all(psi, {Agent::Fbar, Agent::F});
    const auto kept = memory::record_and_keep(psi, {Agent::Fbar, Agent::F});
    const auto& coherent = std::get<StateVector>(erased.final_state);
    const auto& rho = std::get<qcore::DensityOperator>(kept.final_state);

    ErasedVsKept r;
    r.quad = optimal_quad();
    r.S_erased = chsh([&](double a, double b) { return correlation(coherent, a, b); }, r.quad);

    const CorrelationFn kept_e = [&](double a, double b) { return correlation(rho, a, b); };
    const ScanResult scan = grid_scan(kept_e, resolution);
    r.S_kept_max = scan.max;
    r.kept_argmax = scan.argmax;

    const auto model = LHVModel::observer_independent_facts();
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = 0; j < 100; ++j) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / 100.0;
            const double b = 2.0 * std::numbers::pi * static_cast<double>(j) / 100.0;
            r.kept_vs_lhv_gap =
                std::max(r.kept_vs_lhv_gap, std::fabs(kept_e(a, b) - lhv_correlation(model, a, b)));
        }
    r.kept_aligned = kept_e(0.0, 0.0);
    return r;
}

}  // namespace hardysim::bell
