#include "swm/optic.hpp"

#include <cmath>
#include <cstdio>

namespace swm {

namespace {

const Complex kI(0.0, 1.0);

Mat2 rotation(double t)
{
    double c = std::cos(t), s = std::sin(t);
    return {Complex(c, 0.0), Complex(-s, 0.0), Complex(s, 0.0), Complex(c, 0.0)};
}

} // namespace

Mat2 jones_matrix(const Element& e)
{
    if (e.kind == ElementKind::HWP) {
        double c = std::cos(2.0 * e.angle), s = std::sin(2.0 * e.angle);
        return {Complex(c, 0.0), Complex(s, 0.0), Complex(s, 0.0), Complex(-c, 0.0)};
    }
    if (e.kind == ElementKind::QWP) {
        Mat2 retarder = {Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), kI};
        return mat_mul(rotation(e.angle), mat_mul(retarder, rotation(-e.angle)));
    }
    throw NotAWaveplate("jones_matrix: only HWP/QWP have a Jones matrix");
}

PathState apply_elements(std::span<const Element> elements, PathState state)
{
    for (const Element& e : elements) {
        switch (e.kind) {
        case ElementKind::HWP:
        case ElementKind::QWP: {
            Mat2 j = jones_matrix(e);
            for (int arm = 0; arm < 2; arm++) {
                if ((e.arm == Arm::Down && arm != 0) || (e.arm == Arm::Up && arm != 1)) {
                    continue;
                }
                Vec2 v = {state[arm * 2 + 0], state[arm * 2 + 1]};
                v = mat_apply(j, v);
                state[arm * 2 + 0] = v[0];
                state[arm * 2 + 1] = v[1];
            }
            break;
        }
        case ElementKind::BD:
            // V displaces down -> up, H stays. V already in the up arm would
            // be displaced onto a path the layout does not recombine.
            if (std::norm(state[3]) > 1e-20) {
                throw InvalidLayout("apply_elements: BD would displace light out of the layout");
            }
            state[3] = state[1];
            state[1] = Complex(0.0, 0.0);
            break;
        case ElementKind::PBS:
            // Transmitted port: keep H in both arms.
            state[1] = Complex(0.0, 0.0);
            state[3] = Complex(0.0, 0.0);
            break;
        case ElementKind::PathSwap:
            std::swap(state[0], state[2]);
            std::swap(state[1], state[3]);
            break;
        }
    }
    return state;
}

namespace {

// --- QWP(q1) HWP(h) QWP(q2) realization of an arbitrary unitary, up to a
// global phase.
//
// Waveplates are pi (HWP) and pi/2 (QWP) Bloch rotations about axes in the
// x-z plane. Writing Y(t) = exp(-i t sigma_y / 2) and X, Z likewise, the
// sandwich reduces to Y(2 q1) X(-Delta) Y(-2 q2) with
// Delta = 4h - 2 q1 - 2 q2, so an Euler Y-X-Y split of the SU(2)-projected
// target gives the plate angles directly.
struct PlateAngles {
    double q1, h, q2; // operator order Q(q1) H(h) Q(q2), q2 applied first
};

PlateAngles decompose_qhq(const Mat2& target)
{
    Complex det = target[0] * target[3] - target[1] * target[2];
    Complex s = std::sqrt(det);
    Mat2 w = mat_scale(Complex(1.0, 0.0) / s, target);

    // Quaternion components of w = w0 I - i (x sx + y sy + z sz).
    double w0 = w[0].real();
    double z = -w[0].imag();
    double y = w[2].real();
    double x = -w[2].imag();

    double cos_half = std::hypot(w0, y);
    double sin_half = std::hypot(x, z);
    double omega = 2.0 * std::atan2(sin_half, cos_half);
    double s2 = cos_half > 1e-15 ? std::atan2(y, w0) : 0.0;  // (alpha + gamma)/2
    double d2 = sin_half > 1e-15 ? std::atan2(-z, x) : 0.0;  // (alpha - gamma)/2
    double alpha = s2 + d2;
    double geuler = s2 - d2;

    PlateAngles p;
    p.q1 = alpha / 2.0;
    p.q2 = -geuler / 2.0;
    p.h = (alpha - geuler - omega) / 4.0;
    return p;
}

void push_qhq(std::vector<Element>& out, const Mat2& target, Arm arm)
{
    PlateAngles p = decompose_qhq(target);
    out.push_back({ElementKind::QWP, p.q2, arm});
    out.push_back({ElementKind::HWP, p.h, arm});
    out.push_back({ElementKind::QWP, p.q1, arm});
}

// Matrix of the eigenbasis rotation V = [v+ v-], with V sigma_z V^dag = sigma_A.
Mat2 eigen_rotation(const PauliObservable& obs)
{
    auto [vp, vm] = eigenbasis(obs);
    return {vp.a0(), vm.a0(), vp.a1(), vm.a1()};
}

// Analyzer plates mapping `t` onto |H>: a QWP with its axis along the in-plane
// part of t's Bloch vector makes the state linear, then an HWP rotates the
// linear state to horizontal.
void push_analyzer_plates(std::vector<Element>& out, const Ket2& t)
{
    double px = 2.0 * (std::conj(t.a0()) * t.a1()).real();
    double pz = std::norm(t.a0()) - std::norm(t.a1());
    double q = 0.5 * std::atan2(px, pz);

    Element qwp{ElementKind::QWP, q, Arm::Down};
    Vec2 lin = mat_apply(jones_matrix(qwp), t.amps());
    double lx = 2.0 * (std::conj(lin[0]) * lin[1]).real();
    double lz = std::norm(lin[0]) - std::norm(lin[1]);
    double h = 0.25 * std::atan2(lx, lz);

    out.push_back({ElementKind::QWP, q, Arm::Down});
    out.push_back({ElementKind::QWP, q, Arm::Up});
    out.push_back({ElementKind::HWP, h, Arm::Down});
    out.push_back({ElementKind::HWP, h, Arm::Up});
    out.push_back({ElementKind::PBS, 0.0, Arm::Both});
}

Ket2 pointer_axis_flip(const Ket2& v)
{
    // The optical core realizes the coupling with the pointer's |1> axis
    // reflected; see compile_module.
    return Ket2(v.a0(), -v.a1());
}

} // namespace

CircuitModule compile_module(const PauliObservable& obs, double gamma, PointerSetting setting)
{
    if (!(gamma >= 0.0 && gamma <= kMaxGamma)) {
        throw ValidationError("compile_module: gamma outside [0, pi/4]");
    }
    if (setting == PointerSetting::Identity) {
        throw ValidationError("compile_module: Identity setting has no analyzer realization");
    }

    CircuitModule cm{{}, {}, {}, {}, obs, gamma, setting};

    // Basis change into {|H>, |V>} and back. For x-z plane observables this
    // is the single half-wave plate at phi/2.
    bool planar = std::abs(obs.ny()) < 1e-12;
    Mat2 v = eigen_rotation(obs);
    if (planar) {
        double phi = 0.5 * std::atan2(obs.nx(), obs.nz());
        cm.prolog.push_back({ElementKind::HWP, phi / 2.0, Arm::Down});
    } else {
        push_qhq(cm.prolog, mat_adjoint(v), Arm::Down);
    }

    cm.core.push_back({ElementKind::BD, 0.0, Arm::Both});
    cm.core.push_back({ElementKind::HWP, M_PI / 4.0, Arm::Up});
    cm.core.push_back({ElementKind::HWP, -gamma / 2.0, Arm::Down});
    cm.core.push_back({ElementKind::HWP, gamma / 2.0, Arm::Up});

    auto [vp, vm] = setting_basis(setting);
    for (int o = 0; o < 2; o++) {
        AnalyzerBranch branch;
        branch.label = o == 0 ? 1 : -1;
        push_analyzer_plates(branch.elements, pointer_axis_flip(o == 0 ? vp : vm));
        cm.analyzer.push_back(std::move(branch));
    }

    cm.epilog.push_back({ElementKind::HWP, M_PI / 4.0, Arm::Down});
    cm.epilog.push_back({ElementKind::BD, 0.0, Arm::Both});
    cm.epilog.push_back({ElementKind::HWP, M_PI / 4.0, Arm::Up});
    if (planar) {
        double phi = 0.5 * std::atan2(obs.nx(), obs.nz());
        cm.epilog.push_back({ElementKind::HWP, phi / 2.0, Arm::Up});
    } else {
        push_qhq(cm.epilog, v, Arm::Up);
    }
    return cm;
}

std::vector<BranchResult> simulate_circuit(const CircuitModule& cm, const Ket2& input)
{
    PathState entry{input.a0(), input.a1(), Complex(0.0, 0.0), Complex(0.0, 0.0)};
    entry = apply_elements(cm.prolog, entry);
    entry = apply_elements(cm.core, entry);

    std::vector<BranchResult> results;
    auto finish = [&](int label, PathState st) {
        st = apply_elements(cm.epilog, st);
        double down = std::norm(st[0]) + std::norm(st[1]);
        double up = std::norm(st[2]) + std::norm(st[3]);
        if (std::min(down, up) > 1e-18) {
            throw InvalidLayout("simulate_circuit: output split across both arms");
        }
        Vec2 out = down >= up ? Vec2{st[0], st[1]} : Vec2{st[2], st[3]};
        results.push_back({label, out});
    };

    if (cm.analyzer.empty()) {
        finish(1, entry);
        return results;
    }
    for (const AnalyzerBranch& branch : cm.analyzer) {
        finish(branch.label, apply_elements(branch.elements, entry));
    }
    return results;
}

Mat2 simulated_kraus(const CircuitModule& cm, std::size_t branch)
{
    Vec2 c0 = simulate_circuit(cm, ket_H()).at(branch).out;
    Vec2 c1 = simulate_circuit(cm, ket_V()).at(branch).out;
    return {c0[0], c1[0], c0[1], c1[1]};
}

double verify_module(const CircuitModule& cm, const PauliObservable& obs, double gamma)
{
    auto [vp, vm] = setting_basis(cm.setting);
    double worst = 0.0;
    for (std::size_t b = 0; b < cm.analyzer.size(); b++) {
        Mat2 sim = simulated_kraus(cm, b);
        Ket2 outcome = cm.analyzer[b].label > 0 ? vp : vm;
        Mat2 direct = kraus_branch({obs, gamma}, outcome);
        Mat2 relabeled = kraus_branch({obs, gamma}, pointer_axis_flip(outcome));
        double dev = std::min(mat_dist_up_to_phase(sim, direct),
                              mat_dist_up_to_phase(sim, relabeled));
        worst = std::max(worst, dev);
    }
    return worst;
}

namespace {

const char* kind_name(ElementKind k)
{
    switch (k) {
    case ElementKind::HWP:
        return "HWP";
    case ElementKind::QWP:
        return "QWP";
    case ElementKind::PBS:
        return "PBS";
    case ElementKind::BD:
        return "BD";
    default:
        return "PATHSWAP";
    }
}

const char* arm_name(Arm a)
{
    switch (a) {
    case Arm::Both:
        return "both";
    case Arm::Up:
        return "up";
    default:
        return "down";
    }
}

void append_elements(std::string& out, std::span<const Element> elements)
{
    char buf[64];
    for (const Element& e : elements) {
        double deg = e.angle * 180.0 / M_PI;
        if (std::abs(deg) < 5e-11) {
            deg = 0.0; // avoid "-0.0"
        }
        std::snprintf(buf, sizeof(buf), "%.10f", deg);
        std::string num(buf);
        while (num.size() > 3 && num.back() == '0' && num[num.size() - 2] != '.') {
            num.pop_back();
        }
        out += kind_name(e.kind);
        out += ' ';
        out += num;
        out += ' ';
        out += arm_name(e.arm);
        out += '\n';
    }
}

} // namespace

std::string export_circuit(const CircuitModule& cm)
{
    std::string out;
    out += "# prolog\n";
    append_elements(out, cm.prolog);
    out += "# core\n";
    append_elements(out, cm.core);
    for (const AnalyzerBranch& b : cm.analyzer) {
        out += b.label > 0 ? "# analyzer +1\n" : "# analyzer -1\n";
        append_elements(out, b.elements);
    }
    out += "# epilog\n";
    append_elements(out, cm.epilog);
    return out;
}

} // namespace swm
