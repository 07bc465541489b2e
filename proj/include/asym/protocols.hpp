#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "asym/quantum.hpp"
#include "asym/symmetry.hpp"

namespace asym {

/// Cyclic: the top level wraps to the bottom, so the dilation conserves
/// energy only modulo the ladder dimension. Reflecting: transitions that
/// would leave the ladder are blocked and the affected state is left alone,
/// so total energy is conserved exactly.
enum class LadderBoundary { Cyclic, Reflecting };

const char* to_string(LadderBoundary b) noexcept;
LadderBoundary parse_boundary(const std::string& name);

ComplexMatrix hadamard();

struct LadderConfig {
    std::size_t dimension = 64;
    LadderBoundary boundary = LadderBoundary::Cyclic;
    /// Initial ladder state: uniform superposition over levels
    /// [window_begin, window_end]; equal ends give a basis state.
    std::size_t window_begin = 0;
    std::size_t window_end = 0;
    ComplexMatrix seed_unitary = hadamard();
    std::size_t uses = 10;

    /// Throws ValidationError on D < 2, a window outside the ladder or a non-unitary seed.
    void validate() const;
};

/// Uniform superposition over the configured window.
DensityMatrix ladder_initial_state(const LadderConfig& cfg);

/// Ladder raising operator: |k> -> |k+1>, wrapping for Cyclic, truncated otherwise.
ComplexMatrix ladder_shift(std::size_t dimension, LadderBoundary boundary);

/// Energy-preserving dilation of `u` on qubit (x) ladder. Within each pair
/// {|0,k>, |1,k-1>} it acts as u does on {|0>, |1>}.
ComplexMatrix ladder_unitary(const ComplexMatrix& u, std::size_t dimension, LadderBoundary boundary);

struct LadderStep {
    DensityMatrix joint;
    DensityMatrix qubit;
    DensityMatrix ladder;
};

/// One use on a fresh qubit in |0>.
LadderStep aberg_step(const DensityMatrix& ladder, const ComplexMatrix& u, const LadderConfig& cfg);

struct LadderTrace {
    /// |<0|rho'_S|1>| of the output qubit at each use.
    std::vector<double> coherence;
    /// Purity of the ladder after the use.
    std::vector<double> purity;
    /// |tr(shift rho_L)| of the ladder before the use.
    std::vector<double> shift_expectation;
    /// Population of the bottom level before the use.
    std::vector<double> leakage;

    std::size_t size() const noexcept { return coherence.size(); }
    double min_coherence() const;
};

LadderTrace aberg_run(const LadderConfig& cfg);

/// Next-use output coherence on an unbounded ladder:
/// |u00 conj(u10)| |tr(shift rho_L)| with the open (non-wrapping) shift.
double ladder_coherence_oracle(const DensityMatrix& ladder, const ComplexMatrix& u = hadamard());

/// Default cutoff ceil(|alpha|^2 + 10|alpha| + 20).
std::size_t default_cutoff(Complex alpha);

/// Truncated coherent-state amplitudes, normalised. Throws ValidationError
/// when the discarded Poisson tail exceeds 1e-12.
ComplexVector coherent_amplitudes(Complex alpha, std::size_t cutoff = 0);
DensityMatrix coherent_state(Complex alpha, std::size_t cutoff = 0);

/// |<alpha| exp(-i N t) |alpha>| on the truncated space.
double clock_overlap(Complex alpha, double t, std::size_t cutoff = 0);
double clock_overlap_closed_form(Complex alpha, double t);

struct ClockRow {
    Complex alpha;
    std::size_t cutoff = 0;
    /// overlaps(i, j) = |<alpha(t_i)|alpha(t_j)>|.
    Eigen::MatrixXd overlaps;
    /// Largest off-diagonal overlap; 1 when fewer than two times are given.
    double score = 1.0;
    double closed_form_score = 1.0;
    /// Worst |numerical - closed form| over the matrix.
    double closed_form_error = 0.0;
};

std::vector<ClockRow> classical_limit_experiment(const std::vector<Complex>& alphas, const std::vector<double>& times,
                                                 std::size_t cutoff = 0);

/// Measure R in the computational basis and prepare |i_R i_S>.
ChoiChannel permutation_broadcast_channel(std::size_t n);

/// rho -> Tr_A[U (rho (x) gamma_A) U^dagger]. Throws ValidationError when U
/// does not commute with H_S (x) 1 + 1 (x) H_A within 1e-9.
ChoiChannel thermal_operation(const ComplexMatrix& u, const Hamiltonian& h_s, const Hamiltonian& h_a, double beta);

struct BatteryReport {
    /// Trace distance between rho_R and the R marginal of the output.
    double disturbance = 0.0;
    /// coherence_magnitude of the S marginal of the output.
    double coherence_out = 0.0;
    /// False only when coherence above 1e-3 appeared without disturbing R.
    bool consistent = true;
};

/// U acts on R (x) B (x) S. Checks energy conservation, incoherence of rho_S
/// and that the battery is a pure energy eigenstate.
BatteryReport battery_disturbance_demo(const ComplexMatrix& u, const Hamiltonian& h_r, const Hamiltonian& h_b,
                                       const Hamiltonian& h_s, const DensityMatrix& battery, const DensityMatrix& rho_r,
                                       const DensityMatrix& rho_s);

}  // namespace asym
