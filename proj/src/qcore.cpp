#include "swm/qcore.hpp"

#include <cmath>

namespace swm {

namespace detail {

bool finite(Complex z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace detail

Ket2::Ket2(Complex a0, Complex a1) : a_{a0, a1}
{
    if (!detail::finite(a0) || !detail::finite(a1)) {
        throw ValidationError("Ket2: non-finite amplitude");
    }
    double n = std::norm(a0) + std::norm(a1);
    if (std::abs(n - 1.0) > kNormTol) {
        throw ValidationError("Ket2: amplitudes not normalized");
    }
}

Ket2 Ket2::normalized(Complex a0, Complex a1)
{
    if (!detail::finite(a0) || !detail::finite(a1)) {
        throw ValidationError("Ket2: non-finite amplitude");
    }
    double n = std::sqrt(std::norm(a0) + std::norm(a1));
    if (n < 1e-300) {
        throw ValidationError("Ket2: zero vector");
    }
    return Ket2(a0 / n, a1 / n);
}

Complex inner(const Ket2& a, const Ket2& b)
{
    return std::conj(a.a0()) * b.a0() + std::conj(a.a1()) * b.a1();
}

Complex inner(const Vec2& a, const Vec2& b)
{
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

double norm_sq(const Vec2& v)
{
    return std::norm(v[0]) + std::norm(v[1]);
}

namespace {

// Rescale so the first component above threshold is real-positive.
Vec2 phase_fix(Vec2 v)
{
    Complex lead = std::abs(v[0]) > 1e-9 ? v[0] : v[1];
    double m = std::abs(lead);
    if (m < 1e-300) {
        return v;
    }
    Complex u = std::conj(lead) / m;
    return {v[0] * u, v[1] * u};
}

} // namespace

Ket2 orthogonal(const Ket2& a)
{
    Vec2 v = phase_fix({-std::conj(a.a1()), std::conj(a.a0())});
    return Ket2(v[0], v[1]);
}

PauliObservable::PauliObservable(double nx, double ny, double nz) : n_{nx, ny, nz}
{
    if (!std::isfinite(nx) || !std::isfinite(ny) || !std::isfinite(nz)) {
        throw ValidationError("PauliObservable: non-finite direction");
    }
    double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (std::abs(len - 1.0) > kNormTol) {
        throw ValidationError("PauliObservable: direction not unit length");
    }
}

PauliObservable PauliObservable::from_direction(double nx, double ny, double nz)
{
    if (!std::isfinite(nx) || !std::isfinite(ny) || !std::isfinite(nz)) {
        throw ValidationError("PauliObservable: non-finite direction");
    }
    double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (len < 1e-300) {
        throw ValidationError("PauliObservable: zero direction");
    }
    return PauliObservable(nx / len, ny / len, nz / len);
}

PauliObservable sigma_x() { return PauliObservable(1.0, 0.0, 0.0); }
PauliObservable sigma_y() { return PauliObservable(0.0, 1.0, 0.0); }
PauliObservable sigma_z() { return PauliObservable(0.0, 0.0, 1.0); }

PauliObservable sigma_phi(double phi)
{
    if (!std::isfinite(phi)) {
        throw ValidationError("sigma_phi: non-finite angle");
    }
    return PauliObservable(std::sin(2.0 * phi), 0.0, std::cos(2.0 * phi));
}

Mat2 observable_matrix(const PauliObservable& obs)
{
    const Complex i(0.0, 1.0);
    double nx = obs.nx(), ny = obs.ny(), nz = obs.nz();
    return {Complex(nz, 0.0), nx - i * ny, nx + i * ny, Complex(-nz, 0.0)};
}

std::pair<Ket2, Ket2> eigenbasis(const PauliObservable& obs)
{
    const Complex i(0.0, 1.0);
    double nx = obs.nx(), ny = obs.ny(), nz = obs.nz();

    // Two algebraic candidates for the +1 eigenvector; pick the better
    // conditioned one (they fail at nz = -1 and nz = +1 respectively).
    Vec2 vp;
    if (nz >= 0.0) {
        vp = {Complex(1.0 + nz, 0.0), nx + i * ny};
    } else {
        vp = {nx - i * ny, Complex(1.0 - nz, 0.0)};
    }
    double n = std::sqrt(norm_sq(vp));
    vp = phase_fix({vp[0] / n, vp[1] / n});
    Ket2 plus(vp[0], vp[1]);
    return {plus, orthogonal(plus)};
}

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

Ket2 ket_H() { return Ket2(1.0, 0.0); }
Ket2 ket_V() { return Ket2(0.0, 1.0); }
Ket2 ket_plus() { return Ket2(kInvSqrt2, kInvSqrt2); }
Ket2 ket_minus() { return Ket2(kInvSqrt2, -kInvSqrt2); }
Ket2 ket_R() { return Ket2(kInvSqrt2, Complex(0.0, kInvSqrt2)); }
Ket2 ket_L() { return Ket2(kInvSqrt2, Complex(0.0, -kInvSqrt2)); }

std::pair<Ket2, Ket2> setting_basis(PointerSetting s)
{
    switch (s) {
    case PointerSetting::Plus:
        return {ket_plus(), ket_minus()};
    case PointerSetting::Circular:
        return {ket_R(), ket_L()};
    default:
        throw ValidationError("setting_basis: Identity setting has no outcome basis");
    }
}

Mat2 setting_operator(PointerSetting s)
{
    const Complex i(0.0, 1.0);
    switch (s) {
    case PointerSetting::Plus:
        return {0.0, 1.0, 1.0, 0.0}; // sigma_x
    case PointerSetting::Circular:
        return {0.0, -i, i, 0.0}; // sigma_y
    default:
        return mat_identity();
    }
}

Mat2 mat_mul(const Mat2& a, const Mat2& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Vec2 mat_apply(const Mat2& m, const Vec2& v)
{
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

Mat2 mat_adjoint(const Mat2& m)
{
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

Mat2 mat_add(const Mat2& a, const Mat2& b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

Mat2 mat_scale(Complex s, const Mat2& m)
{
    return {s * m[0], s * m[1], s * m[2], s * m[3]};
}

Mat2 mat_identity()
{
    return {1.0, 0.0, 0.0, 1.0};
}

Complex mat_trace(const Mat2& m)
{
    return m[0] + m[3];
}

double mat_frobenius_dist(const Mat2& a, const Mat2& b)
{
    double s = 0.0;
    for (int k = 0; k < 4; k++) {
        s += std::norm(a[k] - b[k]);
    }
    return std::sqrt(s);
}

double mat_dist_up_to_phase(const Mat2& a, const Mat2& b)
{
    // argmin_delta ||a - e^{i delta} b|| has e^{i delta} = tr(b^dag a)/|tr(b^dag a)|.
    Complex t = mat_trace(mat_mul(mat_adjoint(b), a));
    double m = std::abs(t);
    Complex phase = m > 1e-300 ? t / m : Complex(1.0, 0.0);
    return mat_frobenius_dist(a, mat_scale(phase, b));
}

} // namespace swm
