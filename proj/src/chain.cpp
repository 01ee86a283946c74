#include "swm/chain.hpp"

#include <cmath>
#include <cstddef>

namespace swm {

Mat4 coupling_unitary(const PauliObservable& obs, double gamma)
{
    if (!std::isfinite(gamma)) {
        throw ValidationError("coupling_unitary: non-finite gamma");
    }
    const Complex i(0.0, 1.0);
    Mat2 a = observable_matrix(obs);
    Mat2 sy = setting_operator(PointerSetting::Circular); // sigma_y
    Mat4 u{};
    double c = std::cos(gamma), s = std::sin(gamma);
    for (int rs = 0; rs < 2; rs++) {
        for (int rp = 0; rp < 2; rp++) {
            for (int cs = 0; cs < 2; cs++) {
                for (int cp = 0; cp < 2; cp++) {
                    Complex v = -i * s * a[rs * 2 + cs] * sy[rp * 2 + cp];
                    if (rs == cs && rp == cp) {
                        v += c;
                    }
                    u[(rs * 2 + rp) * 4 + (cs * 2 + cp)] = v;
                }
            }
        }
    }
    return u;
}

namespace detail {

namespace {

// Gather/scatter of the 4 amplitudes addressed by (bit_hi, bit_lo) for one
// base index with both target bits clear.
inline void apply_at(std::vector<Complex>& amps, const Mat4& u, std::size_t base,
                     std::size_t mhi, std::size_t mlo)
{
    Complex a0 = amps[base];
    Complex a1 = amps[base | mlo];
    Complex a2 = amps[base | mhi];
    Complex a3 = amps[base | mhi | mlo];
    amps[base] = u[0] * a0 + u[1] * a1 + u[2] * a2 + u[3] * a3;
    amps[base | mlo] = u[4] * a0 + u[5] * a1 + u[6] * a2 + u[7] * a3;
    amps[base | mhi] = u[8] * a0 + u[9] * a1 + u[10] * a2 + u[11] * a3;
    amps[base | mhi | mlo] = u[12] * a0 + u[13] * a1 + u[14] * a2 + u[15] * a3;
}

inline std::size_t expand_base(std::size_t k, std::size_t mhi, std::size_t mlo)
{
    // Insert zero bits at the two target positions (mlo < mhi). In the
    // compressed index, bits below bit_lo stay, bits bit_lo..bit_hi-2 shift
    // up one, the rest shift up two.
    std::size_t low_mask = mlo - 1;
    std::size_t mid_mask = (mhi >> 1) - 1;
    std::size_t base = k & low_mask;
    base |= (k & (mid_mask & ~low_mask)) << 1;
    base |= (k & ~mid_mask) << 2;
    return base;
}

} // namespace

void apply_two_qubit_serial(std::vector<Complex>& amps, const Mat4& u, int bit_hi, int bit_lo)
{
    const std::size_t mhi = std::size_t{1} << bit_hi;
    const std::size_t mlo = std::size_t{1} << bit_lo;
    const std::size_t groups = amps.size() / 4;
    for (std::size_t k = 0; k < groups; k++) {
        apply_at(amps, u, expand_base(k, mhi, mlo), mhi, mlo);
    }
}

void apply_two_qubit_parallel(std::vector<Complex>& amps, const Mat4& u, int bit_hi, int bit_lo)
{
    const std::size_t mhi = std::size_t{1} << bit_hi;
    const std::size_t mlo = std::size_t{1} << bit_lo;
    const std::ptrdiff_t groups = static_cast<std::ptrdiff_t>(amps.size() / 4);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < groups; k++) {
        apply_at(amps, u, expand_base(static_cast<std::size_t>(k), mhi, mlo), mhi, mlo);
    }
}

} // namespace detail

namespace {

bool use_parallel(Exec exec, std::size_t dim)
{
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
        return true;
    }
    return exec == Exec::Auto && dim >= 2048;
#else
    (void)dim;
    return exec == Exec::Parallel;
#endif
}

} // namespace

JointState evolve(const Chain& chain, Exec exec)
{
    const int n = static_cast<int>(chain.modules.size());
    if (n < 1) {
        throw ValidationError("evolve: chain needs at least one module");
    }
    if (n > kMaxModules) {
        throw ChainTooLong("evolve: more than 12 modules");
    }
    for (const WeakModule& m : chain.modules) {
        if (!(m.gamma >= 0.0 && m.gamma <= kMaxGamma)) {
            throw ValidationError("evolve: gamma outside [0, pi/4]");
        }
    }

    const std::size_t dim = std::size_t{1} << (n + 1);
    JointState js{n, std::vector<Complex>(dim, Complex(0.0, 0.0))};
    // |psi_i> (x) |0...0>
    js.amps[0] = chain.psi_i.a0();
    js.amps[std::size_t{1} << n] = chain.psi_i.a1();

    const bool par = use_parallel(exec, dim);
    for (int k = 1; k <= n; k++) {
        Mat4 u = coupling_unitary(chain.modules[k - 1].obs, chain.modules[k - 1].gamma);
        if (par) {
            detail::apply_two_qubit_parallel(js.amps, u, n, n - k);
        } else {
            detail::apply_two_qubit_serial(js.amps, u, n, n - k);
        }
    }
    return js;
}

PointerState post_select(const JointState& joint, const Ket2& psi_f)
{
    const int n = joint.n_pointers;
    const std::size_t half = std::size_t{1} << n;
    PointerState ps{n, std::vector<Complex>(half), 0.0};
    const Complex c0 = std::conj(psi_f.a0());
    const Complex c1 = std::conj(psi_f.a1());
    double nsq = 0.0;
    for (std::size_t p = 0; p < half; p++) {
        Complex v = c0 * joint.amps[p] + c1 * joint.amps[half | p];
        ps.amps[p] = v;
        nsq += std::norm(v);
    }
    ps.norm_sq = nsq;
    return ps;
}

namespace {

// out = (O on pointer bit `bitpos`) applied to in.
void apply_pointer_op(const std::vector<Complex>& in, std::vector<Complex>& out, const Mat2& o,
                      int bitpos)
{
    const std::size_t mask = std::size_t{1} << bitpos;
    for (std::size_t idx = 0; idx < in.size(); idx++) {
        std::size_t b = (idx & mask) ? 1 : 0;
        out[idx] = o[b * 2 + 0] * in[idx & ~mask] + o[b * 2 + 1] * in[idx | mask];
    }
}

} // namespace

double pointer_joint_expectation(const PointerState& ps, std::span<const PointerSetting> settings)
{
    if (static_cast<int>(settings.size()) != ps.n_pointers) {
        throw MissingSetting("pointer_joint_expectation: one setting per pointer required");
    }
    if (ps.norm_sq <= kZeroPostSelectionTol) {
        throw ZeroPostSelection("pointer_joint_expectation: post-selection norm below 1e-15");
    }
    std::vector<Complex> work = ps.amps;
    std::vector<Complex> tmp(work.size());
    for (int k = 1; k <= ps.n_pointers; k++) {
        PointerSetting s = settings[k - 1];
        if (s == PointerSetting::Identity) {
            continue;
        }
        apply_pointer_op(work, tmp, setting_operator(s), ps.n_pointers - k);
        work.swap(tmp);
    }
    Complex dot(0.0, 0.0);
    for (std::size_t i = 0; i < work.size(); i++) {
        dot += std::conj(ps.amps[i]) * work[i];
    }
    return dot.real() / ps.norm_sq;
}

Mat2 kraus_branch(const WeakModule& module, const Ket2& outcome)
{
    // U|chi>|0> = cos(g) |chi>|0> + sin(g) (sigma_A|chi>)|1>, so contracting
    // with <outcome| leaves cos(g)<o|0> I + sin(g)<o|1> sigma_A.
    Complex c0 = std::conj(outcome.a0());
    Complex c1 = std::conj(outcome.a1());
    double c = std::cos(module.gamma), s = std::sin(module.gamma);
    return mat_add(mat_scale(c * c0, mat_identity()),
                   mat_scale(s * c1, observable_matrix(module.obs)));
}

} // namespace swm
