#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "swm/errors.hpp"

namespace swm {

using Complex = std::complex<double>;

// Raw two-level amplitudes; used for unnormalized intermediates.
using Vec2 = std::array<Complex, 2>;
// Row-major 2x2 complex matrix.
using Mat2 = std::array<Complex, 4>;

inline constexpr double kNormTol = 1e-12;

namespace detail {
bool finite(Complex z);
} // namespace detail

/// A normalized pure qubit state. Basis convention: |0> = |H>, |1> = |V>.
class Ket2 {
public:
    Ket2(Complex a0, Complex a1);

    /// Build from arbitrary non-zero amplitudes, rescaling to unit norm.
    static Ket2 normalized(Complex a0, Complex a1);

    Complex a0() const { return a_[0]; }
    Complex a1() const { return a_[1]; }
    const Vec2& amps() const { return a_; }

private:
    Vec2 a_;
};

/// <a|b>
Complex inner(const Ket2& a, const Ket2& b);
Complex inner(const Vec2& a, const Vec2& b);
double norm_sq(const Vec2& v);

/// The state orthogonal to |a>, phase-fixed (first nonzero component real-positive).
Ket2 orthogonal(const Ket2& a);

/// Pauli observable sigma_A = n_x sigma_x + n_y sigma_y + n_z sigma_z for a
/// unit Bloch vector n.
class PauliObservable {
public:
    PauliObservable(double nx, double ny, double nz);

    /// Build from an arbitrary non-zero direction, rescaling to unit length.
    static PauliObservable from_direction(double nx, double ny, double nz);

    double nx() const { return n_[0]; }
    double ny() const { return n_[1]; }
    double nz() const { return n_[2]; }
    const std::array<double, 3>& bloch() const { return n_; }

private:
    std::array<double, 3> n_;
};

/// Pointer readout setting. Plus measures |+><+| - |-><-| (= sigma_x on the
/// pointer), Circular measures |R><R| - |L><L| (= sigma_y), Identity traces
/// the pointer out.
enum class PointerSetting { Plus, Circular, Identity };

PauliObservable sigma_x();
PauliObservable sigma_y();
PauliObservable sigma_z();

/// Observable with eigenstates |phi> = cos(phi)|H> + sin(phi)|V> (+1) and
/// |phi_perp> = sin(phi)|H> - cos(phi)|V> (-1). Bloch direction
/// (sin 2phi, 0, cos 2phi).
PauliObservable sigma_phi(double phi);

/// n_x sigma_x + n_y sigma_y + n_z sigma_z. Hermitian, traceless, involutory.
Mat2 observable_matrix(const PauliObservable& obs);

/// Orthonormal (+1, -1) eigenvectors, phase-fixed as in `orthogonal`.
std::pair<Ket2, Ket2> eigenbasis(const PauliObservable& obs);

// Fixed basis states.
Ket2 ket_H();
Ket2 ket_V();
Ket2 ket_plus();
Ket2 ket_minus();
Ket2 ket_R();
Ket2 ket_L();

/// Outcome basis (+1 state, -1 state) of a non-Identity pointer setting.
std::pair<Ket2, Ket2> setting_basis(PointerSetting s);

/// Pointer operator of a setting as a 2x2 matrix (Identity -> I).
Mat2 setting_operator(PointerSetting s);

// Small dense helpers.
Mat2 mat_mul(const Mat2& a, const Mat2& b);
Vec2 mat_apply(const Mat2& m, const Vec2& v);
Mat2 mat_adjoint(const Mat2& m);
Mat2 mat_add(const Mat2& a, const Mat2& b);
Mat2 mat_scale(Complex s, const Mat2& m);
Mat2 mat_identity();
Complex mat_trace(const Mat2& m);
double mat_frobenius_dist(const Mat2& a, const Mat2& b);
/// min over a global phase delta of ||a - e^{i delta} b||_F.
double mat_dist_up_to_phase(const Mat2& a, const Mat2& b);

} // namespace swm
