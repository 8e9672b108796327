// qcore.hpp
// Exact two-level quantum kernel: labelled local bases, state vectors,
// local basis changes, projective measurement, density operators, dephasing.
//
// Amplitude ordering is system-0 major. Within a system the index follows the
// basis label order returned by labels(): (h,t), (okbar,failbar), (down,up),
// (ok,fail), (plus_a,minus_a).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardysim {

/// Contract violation reported to the caller (bad input, undefined operation).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant failed after an operation completed.
class InvariantError : public Error {
public:
    using Error::Error;
};

inline constexpr double kTolerance = 1e-12;

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

namespace qcore {

enum class System : std::uint8_t { Coin, Spin };
enum class BasisKind : std::uint8_t { Zbar, Wbar, Z, W, Angle };
enum class Outcome : std::uint8_t { h, t, up, down, ok, fail, okbar, failbar, plus_a, minus_a };

namespace detail {

inline double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0) r += two_pi;
    if (two_pi - r < 1e-12) r = 0.0;
    return r;
}

inline bool same_angle(double a, double b) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double d = std::fabs(wrap_angle(a) - wrap_angle(b));
    return d < 1e-12 || two_pi - d < 1e-12;
}

inline std::string angle_text(double theta) {
    std::ostringstream os;
    os.precision(15);
    os << theta;
    return os.str();
}

}  // namespace detail

inline constexpr System system_of(BasisKind kind) {
    return (kind == BasisKind::Zbar || kind == BasisKind::Wbar) ? System::Coin : System::Spin;
}

inline constexpr System system_of(Outcome name) {
    switch (name) {
        case Outcome::h:
        case Outcome::t:
        case Outcome::okbar:
        case Outcome::failbar: return System::Coin;
        default: return System::Spin;
    }
}

inline std::string to_string(System s) { return s == System::Coin ? "coin" : "spin"; }

/// One local measurement basis. Angle bases lie on the x-z great circle of the
/// Bloch sphere; the angle is stored reduced mod 2*pi.
class Basis {
public:
    constexpr Basis() = default;
    explicit Basis(BasisKind kind, double angle = 0.0)
        : kind_(kind), angle_(kind == BasisKind::Angle ? detail::wrap_angle(angle) : 0.0) {}

    static Basis zbar() { return Basis(BasisKind::Zbar); }
    static Basis wbar() { return Basis(BasisKind::Wbar); }
    static Basis z() { return Basis(BasisKind::Z); }
    static Basis w() { return Basis(BasisKind::W); }
    static Basis angled(double theta) { return Basis(BasisKind::Angle, theta); }

    BasisKind kind() const { return kind_; }
    double angle() const { return angle_; }
    System system() const { return system_of(kind_); }

    /// The computational basis of a system: (h,t) for the coin, (down,up) for a spin.
    static Basis computational(System s) { return s == System::Coin ? zbar() : z(); }

    friend bool operator==(const Basis& a, const Basis& b) {
        if (a.kind_ != b.kind_) return false;
        return a.kind_ != BasisKind::Angle || detail::same_angle(a.angle_, b.angle_);
    }

    std::string name() const {
        switch (kind_) {
            case BasisKind::Zbar: return "Zbar";
            case BasisKind::Wbar: return "Wbar";
            case BasisKind::Z: return "Z";
            case BasisKind::W: return "W";
            case BasisKind::Angle: return "A(" + detail::angle_text(angle_) + ")";
        }
        return "?";
    }

private:
    BasisKind kind_ = BasisKind::Z;
    double angle_ = 0.0;
};

struct BasisLabel {
    System system = System::Spin;
    Outcome name = Outcome::down;
    double angle = 0.0;  // plus_a / minus_a only

    friend bool operator==(const BasisLabel& a, const BasisLabel& b) {
        if (a.system != b.system || a.name != b.name) return false;
        if (a.name == Outcome::plus_a || a.name == Outcome::minus_a)
            return detail::same_angle(a.angle, b.angle);
        return true;
    }

    /// Exact strings used as JSON keys.
    std::string str() const {
        switch (name) {
            case Outcome::h: return "h";
            case Outcome::t: return "t";
            case Outcome::up: return "up";
            case Outcome::down: return "down";
            case Outcome::ok: return "ok";
            case Outcome::fail: return "fail";
            case Outcome::okbar: return "okbar";
            case Outcome::failbar: return "failbar";
            case Outcome::plus_a: return "plus_a(" + detail::angle_text(angle) + ")";
            case Outcome::minus_a: return "minus_a(" + detail::angle_text(angle) + ")";
        }
        return "?";
    }
};

/// Builds a label and checks that it belongs to the given system.
inline BasisLabel make_label(System system, Outcome name, double angle = 0.0) {
    const bool angled = name == Outcome::plus_a || name == Outcome::minus_a;
    if (system_of(name) != system && !angled) throw Error("label not in system");
    if (angled && system != System::Spin) throw Error("label not in system");
    return BasisLabel{system, name, angled ? detail::wrap_angle(angle) : 0.0};
}

namespace label {
inline const BasisLabel h{System::Coin, Outcome::h};
inline const BasisLabel t{System::Coin, Outcome::t};
inline const BasisLabel okbar{System::Coin, Outcome::okbar};
inline const BasisLabel failbar{System::Coin, Outcome::failbar};
inline const BasisLabel up{System::Spin, Outcome::up};
inline const BasisLabel down{System::Spin, Outcome::down};
inline const BasisLabel ok{System::Spin, Outcome::ok};
inline const BasisLabel fail{System::Spin, Outcome::fail};
inline BasisLabel plus(double theta) { return make_label(System::Spin, Outcome::plus_a, theta); }
inline BasisLabel minus(double theta) { return make_label(System::Spin, Outcome::minus_a, theta); }
}  // namespace label

/// Parses the exact label strings of str(); angled labels are not parseable.
inline std::optional<BasisLabel> parse_label(const std::string& s) {
    for (const BasisLabel& l : {label::h, label::t, label::okbar, label::failbar, label::up,
                                label::down, label::ok, label::fail}) {
        if (l.str() == s) return l;
    }
    return std::nullopt;
}

/// Labels of a basis, in amplitude-index order. Angle labels are spin labels;
/// callers that place an angle basis on another system relabel the system.
inline std::array<BasisLabel, 2> labels(const Basis& b) {
    switch (b.kind()) {
        case BasisKind::Zbar: return {label::h, label::t};
        case BasisKind::Wbar: return {label::okbar, label::failbar};
        case BasisKind::Z: return {label::down, label::up};
        case BasisKind::W: return {label::ok, label::fail};
        case BasisKind::Angle: return {label::plus(b.angle()), label::minus(b.angle())};
    }
    return {};
}

inline std::optional<std::size_t> index_of(const Basis& b, const BasisLabel& l) {
    auto ls = labels(b);
    for (std::size_t i = 0; i < ls.size(); ++i)
        if (ls[i] == l) return i;
    return std::nullopt;
}

/// Columns are the basis vectors written in the computational basis of the
/// basis' system ((h,t) or (down,up)).
inline Mat2 basis_vectors(const Basis& b) {
    const double r = 1.0 / std::sqrt(2.0);
    Mat2 m;
    switch (b.kind()) {
        case BasisKind::Zbar:
        case BasisKind::Z: m << 1, 0, 0, 1; break;
        // okbar = (h - t)/sqrt2, failbar = (h + t)/sqrt2
        case BasisKind::Wbar: m << r, r, -r, r; break;
        // ok = (up - down)/sqrt2, fail = (up + down)/sqrt2; rows are (down, up)
        case BasisKind::W: m << -r, r, r, r; break;
        case BasisKind::Angle: {
            // plus = cos(a/2) up + sin(a/2) down, minus = -sin(a/2) up + cos(a/2) down
            const double c = std::cos(b.angle() / 2), s = std::sin(b.angle() / 2);
            m << s, c, c, -s;
            break;
        }
    }
    return m;
}

/// Coordinates in `from` mapped to coordinates in `to`.
inline Mat2 basis_change(const Basis& from, const Basis& to) {
    return basis_vectors(to).adjoint() * basis_vectors(from);
}

inline bool is_unitary(const Eigen::MatrixXcd& u, double tol = kTolerance) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <
           tol;
}

/// A 2x2 unitary on one system that re-expresses it from `source` to `target` tags.
class LocalUnitary {
public:
    LocalUnitary(std::size_t system, Mat2 matrix, Basis source, Basis target)
        : system_(system), matrix_(std::move(matrix)), source_(source), target_(target) {
        if (!is_unitary(matrix_)) throw Error("not unitary");
        if (source_.system() != target_.system()) throw Error("basis systems differ");
    }

    /// The passive basis change (beam splitter) from one local basis to another.
    static LocalUnitary change(std::size_t system, const Basis& from, const Basis& to) {
        return LocalUnitary(system, basis_change(from, to), from, to);
    }

    static LocalUnitary identity(std::size_t system, const Basis& tag) {
        return LocalUnitary(system, Mat2::Identity(), tag, tag);
    }

    std::size_t system() const { return system_; }
    const Mat2& matrix() const { return matrix_; }
    const Basis& source() const { return source_; }
    const Basis& target() const { return target_; }

private:
    std::size_t system_;
    Mat2 matrix_;
    Basis source_;
    Basis target_;
};

/// One basis per system: a joint measurement context.
using Context = std::vector<Basis>;

namespace detail {

inline std::size_t pow2(std::size_t n) { return std::size_t{1} << n; }

inline std::size_t digit(std::size_t index, std::size_t system, std::size_t n) {
    return (index >> (n - 1 - system)) & 1u;
}

/// Full operator of a local 2x2 matrix acting on `system` among `n` qubits.
inline Eigen::MatrixXcd embed(const Mat2& m, std::size_t system, std::size_t n) {
    const std::size_t dim = pow2(n);
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
    const std::size_t stride = pow2(n - 1 - system);
    for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t col = 0; col < dim; ++col) {
            if ((row & ~stride) != (col & ~stride)) continue;
            full(row, col) = m(digit(row, system, n), digit(col, system, n));
        }
    }
    return full;
}

inline void check_tags(const std::vector<System>& systems, const std::vector<Basis>& tags) {
    if (systems.size() != tags.size()) throw Error("dimension mismatch");
    for (std::size_t k = 0; k < systems.size(); ++k) {
        // angle bases may sit on either spin; the bell module places them on both particles
        if (tags[k].system() != systems[k]) throw Error("basis not valid for system");
    }
}

inline std::vector<System> default_systems(std::size_t n) {
    if (n == 1) return {System::Spin};
    if (n == 2) return {System::Coin, System::Spin};
    throw Error("unsupported number of systems");
}

}  // namespace detail

/// A normalized pure state with per-system basis tags.
class StateVector {
public:
    /// Validates the layout and renormalizes. Throws "null state" for a zero vector.
    StateVector(std::vector<System> systems, std::vector<Basis> tags, Eigen::VectorXcd amps)
        : systems_(std::move(systems)), tags_(std::move(tags)), amps_(std::move(amps)) {
        detail::check_tags(systems_, tags_);
        if (systems_.empty()) throw Error("dimension mismatch");
        if (static_cast<std::size_t>(amps_.size()) != detail::pow2(systems_.size()))
            throw Error("dimension mismatch");
        const double n = amps_.norm();
        if (!(n > 1e-150)) throw Error("null state");
        amps_ /= n;
    }

    std::size_t num_systems() const { return systems_.size(); }
    std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }
    std::vector<std::size_t> dims() const { return std::vector<std::size_t>(systems_.size(), 2); }
    const std::vector<System>& systems() const { return systems_; }
    const std::vector<Basis>& tags() const { return tags_; }
    const Basis& tag(std::size_t system) const { return tags_.at(system); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }
    double norm() const { return amps_.norm(); }

    /// Labels of the tensor basis element `index` in the current tags.
    std::vector<BasisLabel> outcome(std::size_t index) const {
        std::vector<BasisLabel> out;
        for (std::size_t k = 0; k < systems_.size(); ++k) {
            BasisLabel l = labels(tags_[k])[detail::digit(index, k, systems_.size())];
            l.system = systems_[k];
            out.push_back(l);
        }
        return out;
    }

    /// Amplitude of a product of labels, each in its system's current basis.
    Complex amplitude(const std::vector<BasisLabel>& ls) const {
        if (ls.size() != systems_.size()) throw Error("dimension mismatch");
        std::size_t index = 0;
        for (std::size_t k = 0; k < ls.size(); ++k) {
            auto i = index_of(tags_[k], ls[k]);
            if (!i) throw Error("outcome not in basis");
            index = (index << 1) | *i;
        }
        return amps_(static_cast<Eigen::Index>(index));
    }

private:
    std::vector<System> systems_;
    std::vector<Basis> tags_;
    Eigen::VectorXcd amps_;
};

/// Builds a state in the computational bases. Two systems are (coin, spin);
/// a single system is a spin. The input must be normalized to within 1e-9.
inline StateVector make_state(const std::vector<Complex>& amplitudes,
                              const std::vector<std::size_t>& dims) {
    std::size_t product = 1;
    for (std::size_t d : dims) {
        if (d != 2) throw Error("unsupported dimension");
        product *= d;
    }
    if (dims.empty() || amplitudes.size() != product) throw Error("dimension mismatch");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(product));
    for (std::size_t i = 0; i < product; ++i) v(static_cast<Eigen::Index>(i)) = amplitudes[i];
    const double n = v.norm();
    if (!(n > 1e-150)) throw Error("null state");
    if (std::fabs(n * n - 1.0) > 1e-9) throw Error("not normalized");
    auto systems = detail::default_systems(dims.size());
    std::vector<Basis> tags;
    for (System s : systems) tags.push_back(Basis::computational(s));
    return StateVector(std::move(systems), std::move(tags), std::move(v));
}

inline StateVector apply_local(const StateVector& state, const LocalUnitary& u) {
    const std::size_t n = state.num_systems();
    if (u.system() >= n) throw Error("system out of range");
    if (!(state.tag(u.system()) == u.source())) throw Error("basis mismatch");
    Eigen::VectorXcd out = detail::embed(u.matrix(), u.system(), n) * state.amplitudes();
    auto tags = state.tags();
    tags[u.system()] = u.target();
    StateVector result(state.systems(), std::move(tags), std::move(out));
    if (std::fabs(result.amplitudes().norm() - 1.0) > kTolerance)
        throw InvariantError("norm not preserved");
    return result;
}

/// Re-expresses one system in another basis of the same system.
inline StateVector express_in(const StateVector& state, std::size_t system, const Basis& basis) {
    if (system >= state.num_systems()) throw Error("system out of range");
    if (state.tag(system) == basis) return state;
    if (basis.system() != state.systems()[system]) throw Error("basis not valid for system");
    return apply_local(state, LocalUnitary::change(system, state.tag(system), basis));
}

inline StateVector express_in(const StateVector& state, const Context& context) {
    if (context.size() != state.num_systems()) throw Error("dimension mismatch");
    StateVector s = state;
    for (std::size_t k = 0; k < context.size(); ++k) s = express_in(s, k, context[k]);
    return s;
}

/// Born probabilities over the joint outcomes of one context.
class OutcomeDistribution {
public:
    OutcomeDistribution(std::vector<System> systems, Context context, std::vector<double> probs)
        : systems_(std::move(systems)), context_(std::move(context)), probs_(std::move(probs)) {
        if (probs_.size() != detail::pow2(context_.size())) throw Error("dimension mismatch");
    }

    const Context& context() const { return context_; }
    const std::vector<System>& systems() const { return systems_; }
    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probabilities() const { return probs_; }
    double operator[](std::size_t i) const { return probs_.at(i); }

    std::vector<BasisLabel> outcome(std::size_t index) const {
        std::vector<BasisLabel> out;
        for (std::size_t k = 0; k < context_.size(); ++k) {
            BasisLabel l = labels(context_[k])[detail::digit(index, k, context_.size())];
            l.system = systems_[k];
            out.push_back(l);
        }
        return out;
    }

    std::optional<std::size_t> index_of(const std::vector<BasisLabel>& ls) const {
        if (ls.size() != context_.size()) return std::nullopt;
        std::size_t index = 0;
        for (std::size_t k = 0; k < ls.size(); ++k) {
            auto i = qcore::index_of(context_[k], ls[k]);
            if (!i) return std::nullopt;
            index = (index << 1) | *i;
        }
        return index;
    }

    /// Probability of a joint outcome; throws "outcome not in context".
    double prob(const std::vector<BasisLabel>& ls) const {
        auto i = index_of(ls);
        if (!i) throw Error("outcome not in context");
        return probs_[*i];
    }

    /// Total probability of all outcomes in which system `system` shows `l`.
    double marginal(std::size_t system, const BasisLabel& l) const {
        double p = 0;
        for (std::size_t i = 0; i < probs_.size(); ++i)
            if (outcome(i)[system] == l) p += probs_[i];
        return p;
    }

    double total() const {
        double s = 0;
        for (double p : probs_) s += p;
        return s;
    }

    /// "okbar,ok" style key.
    std::string key(std::size_t index) const {
        std::string k;
        for (const auto& l : outcome(index)) k += (k.empty() ? "" : ",") + l.str();
        return k;
    }

private:
    std::vector<System> systems_;
    Context context_;
    std::vector<double> probs_;
};

namespace detail {

inline void check_distribution(const std::vector<double>& probs) {
    double s = 0;
    for (double p : probs) {
        if (p < -kTolerance) throw InvariantError("negative probability");
        s += p;
    }
    if (std::fabs(s - 1.0) > kTolerance) throw InvariantError("probabilities do not sum to 1");
}

}  // namespace detail

inline OutcomeDistribution born_distribution(const StateVector& state, const Context& context) {
    StateVector s = express_in(state, context);
    std::vector<double> probs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) probs[i] = std::norm(s[i]);
    detail::check_distribution(probs);
    return OutcomeDistribution(state.systems(), context, std::move(probs));
}

struct Projection {
    StateVector state;
    double probability;
};

/// Projects one system onto a label of its current basis and renormalizes.
inline Projection project(const StateVector& state, std::size_t system, const BasisLabel& l) {
    if (system >= state.num_systems()) throw Error("system out of range");
    auto i = index_of(state.tag(system), l);
    if (!i || l.system != state.systems()[system]) throw Error("outcome not in basis");
    const std::size_t n = state.num_systems();
    Eigen::VectorXcd v = state.amplitudes();
    for (std::size_t idx = 0; idx < state.size(); ++idx)
        if (detail::digit(idx, system, n) != *i) v(static_cast<Eigen::Index>(idx)) = 0;
    const double p = v.squaredNorm();
    if (p < 1e-15) throw Error("zero-probability branch");
    return {StateVector(state.systems(), state.tags(), std::move(v)), p};
}

/// Mixed state over the same labelled tensor basis as StateVector.
class DensityOperator {
public:
    DensityOperator(std::vector<System> systems, std::vector<Basis> tags, Eigen::MatrixXcd matrix)
        : systems_(std::move(systems)), tags_(std::move(tags)), rho_(std::move(matrix)) {
        detail::check_tags(systems_, tags_);
        const auto dim = static_cast<Eigen::Index>(detail::pow2(systems_.size()));
        if (rho_.rows() != dim || rho_.cols() != dim) throw Error("dimension mismatch");
        validate();
    }

    explicit DensityOperator(const StateVector& psi)
        : DensityOperator(psi.systems(), psi.tags(),
                          psi.amplitudes() * psi.amplitudes().adjoint()) {}

    std::size_t num_systems() const { return systems_.size(); }
    std::size_t size() const { return static_cast<std::size_t>(rho_.rows()); }
    const std::vector<System>& systems() const { return systems_; }
    const std::vector<Basis>& tags() const { return tags_; }
    const Basis& tag(std::size_t system) const { return tags_.at(system); }
    const Eigen::MatrixXcd& matrix() const { return rho_; }

    /// Re-expresses one system in another of its bases.
    DensityOperator express_in(std::size_t system, const Basis& basis) const {
        if (system >= systems_.size()) throw Error("system out of range");
        if (tags_[system] == basis) return *this;
        if (basis.system() != systems_[system]) throw Error("basis not valid for system");
        const Eigen::MatrixXcd u =
            detail::embed(basis_change(tags_[system], basis), system, systems_.size());
        auto tags = tags_;
        tags[system] = basis;
        return DensityOperator(systems_, std::move(tags), u * rho_ * u.adjoint());
    }

    DensityOperator express_in(const Context& context) const {
        if (context.size() != systems_.size()) throw Error("dimension mismatch");
        DensityOperator d = *this;
        for (std::size_t k = 0; k < context.size(); ++k) d = d.express_in(k, context[k]);
        return d;
    }

private:
    void validate() const {
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kTolerance)
            throw Error("not a density operator: not Hermitian");
        if (std::abs(rho_.trace() - Complex(1.0)) > kTolerance)
            throw Error("not a density operator: trace != 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kTolerance)
            throw Error("not a density operator: negative eigenvalue");
    }

    std::vector<System> systems_;
    std::vector<Basis> tags_;
    Eigen::MatrixXcd rho_;
};

/// Zeroes coherences between the sectors of `basis` on `system`; the result
/// is expressed in that basis.
inline DensityOperator dephase(const DensityOperator& density, std::size_t system,
                               const Basis& basis) {
    DensityOperator d = density.express_in(system, basis);
    Eigen::MatrixXcd m = d.matrix();
    const std::size_t n = d.num_systems();
    for (std::size_t r = 0; r < d.size(); ++r)
        for (std::size_t c = 0; c < d.size(); ++c)
            if (detail::digit(r, system, n) != detail::digit(c, system, n))
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0;
    return DensityOperator(d.systems(), d.tags(), std::move(m));
}

inline OutcomeDistribution born_distribution(const DensityOperator& density,
                                             const Context& context) {
    DensityOperator d = density.express_in(context);
    std::vector<double> probs(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        probs[i] = d.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    detail::check_distribution(probs);
    return OutcomeDistribution(d.systems(), context, std::move(probs));
}

/// |<a|b>|^2 after expressing both in the computational bases.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.systems() != b.systems()) throw Error("dimension mismatch");
    Context comp;
    for (System s : a.systems()) comp.push_back(Basis::computational(s));
    return std::norm(express_in(a, comp).amplitudes().dot(express_in(b, comp).amplitudes()));
}

}  // namespace qcore
}  // namespace hardysim
