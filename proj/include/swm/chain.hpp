#pragma once

#include <span>
#include <vector>

#include "swm/qcore.hpp"

namespace swm {

/// One weak measurement: observable plus coupling strength gamma (radians).
/// gamma = 0 means the module performs no measurement.
struct WeakModule {
    PauliObservable obs;
    double gamma;
};

inline constexpr int kMaxModules = 12;
inline constexpr double kMaxGamma = M_PI / 4.0;
inline constexpr double kZeroPostSelectionTol = 1e-15;

/// Pre-selected state, ordered measurement modules, post-selected state.
struct Chain {
    Ket2 psi_i;
    std::vector<WeakModule> modules;
    Ket2 psi_f;
};

/// Row-major 4x4 complex matrix, tensor order system (x) pointer.
using Mat4 = std::array<Complex, 16>;

/// System (x) pointers amplitudes. Index layout: system qubit is the most
/// significant bit, pointer k (1-based) sits at bit position N-k, so pointer 1
/// is adjacent to the system.
struct JointState {
    int n_pointers;
    std::vector<Complex> amps; // length 2^(N+1)
};

/// Pointers-only amplitudes after contracting the system with <psi_f|.
/// Stored unnormalized; norm_sq is the post-selection success probability.
struct PointerState {
    int n_pointers;
    std::vector<Complex> amps; // length 2^N
    double norm_sq;
};

/// Kernel dispatch: Auto picks the OpenMP path for large states when
/// compiled with OpenMP, Serial/Parallel force one implementation. Both
/// produce bit-identical results.
enum class Exec { Auto, Serial, Parallel };

/// cos(gamma) I - i sin(gamma) (sigma_A (x) sigma_y).
Mat4 coupling_unitary(const PauliObservable& obs, double gamma);

/// Apply each module's coupling to (system, pointer k) in order, all pointers
/// starting in |0>.
JointState evolve(const Chain& chain, Exec exec = Exec::Auto);

/// Contract the system index with <psi_f|.
PointerState post_select(const JointState& joint, const Ket2& psi_f);

/// <Phi| (x)_k O_k |Phi> / <Phi|Phi> with O_k per setting (Identity = trace
/// out). settings[k] addresses pointer k+1.
double pointer_joint_expectation(const PointerState& ps, std::span<const PointerSetting> settings);

/// K = <outcome|_p U |0>_p = cos(gamma) <outcome|0> I + sin(gamma) <outcome|1> sigma_A.
Mat2 kraus_branch(const WeakModule& module, const Ket2& outcome);

namespace detail {
void apply_two_qubit_serial(std::vector<Complex>& amps, const Mat4& u, int bit_hi, int bit_lo);
void apply_two_qubit_parallel(std::vector<Complex>& amps, const Mat4& u, int bit_hi, int bit_lo);
} // namespace detail

} // namespace swm
