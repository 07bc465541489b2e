#include "asym/protocols.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace asym {

namespace {

using Index = Eigen::Index;

constexpr double kConservationTol = 1e-9;
constexpr double kTailBound = 1e-12;

double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) { return (a * b - b * a).norm(); }

void require_unitary(const ComplexMatrix& u, const char* what) {
    const double defect = unitarity_defect(u);
    if (defect > 1e-9) throw ValidationError(std::string(what) + ": not unitary", defect);
}

}  // namespace

const char* to_string(LadderBoundary b) noexcept {
    return b == LadderBoundary::Cyclic ? "cyclic" : "reflecting";
}

LadderBoundary parse_boundary(const std::string& name) {
    if (name == "cyclic") return LadderBoundary::Cyclic;
    if (name == "reflecting") return LadderBoundary::Reflecting;
    throw ValidationError("unknown ladder boundary '" + name + "' (expected cyclic or reflecting)");
}

ComplexMatrix hadamard() {
    ComplexMatrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    return h / std::sqrt(2.0);
}

void LadderConfig::validate() const {
    if (dimension < 2) throw ValidationError("ladder: dimension must be at least 2", static_cast<double>(dimension));
    if (window_begin > window_end || window_end >= dimension)
        throw ValidationError("ladder: window must satisfy begin <= end < dimension", static_cast<double>(window_end));
    if (seed_unitary.rows() != 2 || seed_unitary.cols() != 2) throw DimensionError("ladder: seed unitary must be 2x2");
    require_unitary(seed_unitary, "ladder seed");
}

DensityMatrix ladder_initial_state(const LadderConfig& cfg) {
    cfg.validate();
    ComplexVector psi = ComplexVector::Zero(static_cast<Index>(cfg.dimension));
    const double width = static_cast<double>(cfg.window_end - cfg.window_begin + 1);
    for (std::size_t k = cfg.window_begin; k <= cfg.window_end; ++k) psi(static_cast<Index>(k)) = 1.0 / std::sqrt(width);
    return DensityMatrix::pure(psi);
}

ComplexMatrix ladder_shift(std::size_t dimension, LadderBoundary boundary) {
    const Index d = static_cast<Index>(dimension);
    ComplexMatrix s = ComplexMatrix::Zero(d, d);
    for (Index k = 0; k + 1 < d; ++k) s(k + 1, k) = 1.0;
    if (boundary == LadderBoundary::Cyclic) s(0, d - 1) = 1.0;
    return s;
}

ComplexMatrix ladder_unitary(const ComplexMatrix& u, std::size_t dimension, LadderBoundary boundary) {
    if (u.rows() != 2 || u.cols() != 2) throw DimensionError("ladder_unitary: seed must be 2x2");
    require_unitary(u, "ladder_unitary");
    const Index d = static_cast<Index>(dimension);
    ComplexMatrix v = ComplexMatrix::Identity(2 * d, 2 * d);
    auto couple = [&](Index ground, Index excited) {
        v(ground, ground) = u(0, 0);
        v(excited, ground) = u(1, 0);
        v(ground, excited) = u(0, 1);
        v(excited, excited) = u(1, 1);
    };
    // |0,k> pairs with |1,k-1>.
    for (Index k = 1; k < d; ++k) couple(k, d + k - 1);
    if (boundary == LadderBoundary::Cyclic) couple(0, d + d - 1);
    return v;
}

LadderStep aberg_step(const DensityMatrix& ladder, const ComplexMatrix& u, const LadderConfig& cfg) {
    if (ladder.dim() != cfg.dimension) throw DimensionError("aberg_step: ladder state dimension mismatch");
    const ComplexMatrix v = ladder_unitary(u, cfg.dimension, cfg.boundary);
    const ComplexMatrix fresh = DensityMatrix::basis(2, 0).matrix();
    const ComplexMatrix joint = v * kron(fresh, ladder.matrix()) * v.adjoint();
    const std::array<std::size_t, 2> dims{2, cfg.dimension};
    const std::array<std::size_t, 1> keep_q{0};
    const std::array<std::size_t, 1> keep_l{1};
    return {DensityMatrix::nearest(joint), DensityMatrix::nearest(partial_trace(joint, dims, keep_q)),
            DensityMatrix::nearest(partial_trace(joint, dims, keep_l))};
}

double LadderTrace::min_coherence() const {
    if (coherence.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(coherence.begin(), coherence.end());
}

LadderTrace aberg_run(const LadderConfig& cfg) {
    cfg.validate();
    LadderTrace trace;
    const ComplexMatrix shift = ladder_shift(cfg.dimension, cfg.boundary);
    DensityMatrix ladder = ladder_initial_state(cfg);
    for (std::size_t n = 0; n < cfg.uses; ++n) {
        trace.leakage.push_back(std::clamp(ladder.matrix()(0, 0).real(), 0.0, 1.0));
        trace.shift_expectation.push_back(std::abs((shift * ladder.matrix()).trace()));
        LadderStep step = aberg_step(ladder, cfg.seed_unitary, cfg);
        trace.coherence.push_back(std::abs(step.qubit.matrix()(0, 1)));
        trace.purity.push_back(step.ladder.purity());
        ladder = std::move(step.ladder);
    }
    return trace;
}

double ladder_coherence_oracle(const DensityMatrix& ladder, const ComplexMatrix& u) {
    const ComplexMatrix shift = ladder_shift(ladder.dim(), LadderBoundary::Reflecting);
    return std::abs(u(0, 0) * std::conj(u(1, 0))) * std::abs((shift * ladder.matrix()).trace());
}

std::size_t default_cutoff(Complex alpha) {
    const double a = std::abs(alpha);
    return static_cast<std::size_t>(std::ceil(a * a + 10.0 * a + 20.0));
}

ComplexVector coherent_amplitudes(Complex alpha, std::size_t cutoff) {
    if (cutoff == 0) cutoff = default_cutoff(alpha);
    const double mean = std::norm(alpha);
    ComplexVector c(static_cast<Index>(cutoff));
    Complex amp = std::exp(-mean / 2.0);
    for (std::size_t n = 0; n < cutoff; ++n) {
        if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
        c(static_cast<Index>(n)) = amp;
    }
    // Discarded Poisson weight, summed term by term past the cutoff.
    double tail = 0.0;
    double term = std::norm(amp);
    for (std::size_t n = cutoff;; ++n) {
        term *= mean / static_cast<double>(n);
        tail += term;
        if (static_cast<double>(n) > mean && term < 1e-18 * std::max(tail, 1e-300)) break;
        if (term == 0.0) break;
    }
    if (tail > kTailBound) throw ValidationError("coherent_state: cutoff too small for the 1e-12 tail bound", tail);
    return c / c.norm();
}

DensityMatrix coherent_state(Complex alpha, std::size_t cutoff) {
    return DensityMatrix::pure(coherent_amplitudes(alpha, cutoff));
}

double clock_overlap(Complex alpha, double t, std::size_t cutoff) {
    const ComplexVector c = coherent_amplitudes(alpha, cutoff);
    Complex sum = 0.0;
    for (Index n = 0; n < c.size(); ++n) sum += std::norm(c(n)) * std::polar(1.0, -static_cast<double>(n) * t);
    return std::abs(sum);
}

double clock_overlap_closed_form(Complex alpha, double t) { return std::exp(-std::norm(alpha) * (1.0 - std::cos(t))); }

std::vector<ClockRow> classical_limit_experiment(const std::vector<Complex>& alphas, const std::vector<double>& times,
                                                 std::size_t cutoff) {
    std::vector<ClockRow> rows;
    const Index m = static_cast<Index>(times.size());
    for (const Complex alpha : alphas) {
        ClockRow row;
        row.alpha = alpha;
        row.cutoff = cutoff == 0 ? default_cutoff(alpha) : cutoff;
        row.overlaps = Eigen::MatrixXd::Ones(m, m);
        double score = -1.0;
        double closed = -1.0;
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) {
                const double dt = times[static_cast<std::size_t>(j)] - times[static_cast<std::size_t>(i)];
                const double value = clock_overlap(alpha, dt, row.cutoff);
                const double exact = clock_overlap_closed_form(alpha, dt);
                row.overlaps(i, j) = value;
                row.closed_form_error = std::max(row.closed_form_error, std::abs(value - exact));
                if (i != j) {
                    score = std::max(score, value);
                    closed = std::max(closed, exact);
                }
            }
        row.score = m > 1 ? score : 1.0;
        row.closed_form_score = m > 1 ? closed : 1.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

ChoiChannel permutation_broadcast_channel(std::size_t n) {
    if (n < 2) throw ValidationError("permutation_broadcast_channel: n must be at least 2", static_cast<double>(n));
    const Index d = static_cast<Index>(n * n);
    ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
    for (Index i = 0; i < static_cast<Index>(n); ++i)
        for (Index k = 0; k < static_cast<Index>(n); ++k) {
            const Index in = i * static_cast<Index>(n) + k;
            const Index out = i * static_cast<Index>(n) + i;
            const Index idx = in * d + out;
            choi(idx, idx) = 1.0;
        }
    return ChoiChannel(choi, n * n, n * n);
}

ChoiChannel thermal_operation(const ComplexMatrix& u, const Hamiltonian& h_s, const Hamiltonian& h_a, double beta) {
    const Hamiltonian total = combined(h_s, h_a);
    if (u.rows() != total.matrix().rows() || u.cols() != total.matrix().cols())
        throw DimensionError("thermal_operation: unitary does not act on system (x) ancilla");
    require_unitary(u, "thermal_operation");
    const double comm = commutator_norm(u, total.matrix());
    if (comm > kConservationTol) throw ValidationError("thermal_operation: unitary does not conserve energy", comm);
    const std::array<std::size_t, 2> dims{h_s.dim(), h_a.dim()};
    const std::array<std::size_t, 1> traced{1};
    return channel_from_stinespring(u, gibbs_state(h_a, beta), dims, traced);
}

BatteryReport battery_disturbance_demo(const ComplexMatrix& u, const Hamiltonian& h_r, const Hamiltonian& h_b,
                                       const Hamiltonian& h_s, const DensityMatrix& battery, const DensityMatrix& rho_r,
                                       const DensityMatrix& rho_s) {
    if (battery.dim() != h_b.dim() || rho_r.dim() != h_r.dim() || rho_s.dim() != h_s.dim())
        throw DimensionError("battery_disturbance_demo: state and Hamiltonian dimensions differ");
    const Hamiltonian total = combined(combined(h_r, h_b), h_s);
    if (u.rows() != total.matrix().rows() || u.cols() != total.matrix().cols())
        throw DimensionError("battery_disturbance_demo: unitary does not act on R (x) B (x) S");
    require_unitary(u, "battery_disturbance_demo");
    const double comm = commutator_norm(u, total.matrix());
    if (comm > kConservationTol) throw ValidationError("battery_disturbance_demo: unitary does not conserve energy", comm);
    const double coh_in = coherence_magnitude(rho_s, h_s);
    if (coh_in > 1e-9) throw ValidationError("battery_disturbance_demo: system state is coherent", coh_in);
    const double mixedness = 1.0 - battery.purity();
    if (mixedness > 1e-9) throw ValidationError("battery_disturbance_demo: battery state is not pure", mixedness);
    const double battery_comm = commutator_norm(battery.matrix(), h_b.matrix());
    if (battery_comm > 1e-9) throw ValidationError("battery_disturbance_demo: battery is not an energy eigenstate", battery_comm);

    const ComplexMatrix input = kron(kron(rho_r.matrix(), battery.matrix()), rho_s.matrix());
    const ComplexMatrix out = u * input * u.adjoint();
    const std::array<std::size_t, 3> dims{h_r.dim(), h_b.dim(), h_s.dim()};
    const std::array<std::size_t, 1> keep_r{0};
    const std::array<std::size_t, 1> keep_s{2};
    const DensityMatrix out_r = DensityMatrix::nearest(partial_trace(out, dims, keep_r));
    const DensityMatrix out_s = DensityMatrix::nearest(partial_trace(out, dims, keep_s));

    BatteryReport rep;
    rep.disturbance = trace_distance(out_r.matrix(), rho_r.matrix());
    rep.coherence_out = coherence_magnitude(out_s, h_s);
    rep.consistent = !(rep.coherence_out > 1e-3 && rep.disturbance < 1e-6);
    return rep;
}

}  // namespace asym
