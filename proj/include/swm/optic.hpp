#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "swm/chain.hpp"
#include "swm/qcore.hpp"

namespace swm {

enum class ElementKind { HWP, QWP, PBS, BD, PathSwap };
enum class Arm { Both, Up, Down };

/// One optical element. Waveplates always sit in a definite arm (the beam
/// line before the first displacer and after recombination counts as an
/// arm); Both is reserved for the path elements BD/PBS/PathSwap.
struct Element {
    ElementKind kind;
    double angle; // radians, waveplates only
    Arm arm;
};

/// Jones matrix of a waveplate, basis {|H>, |V>}:
///   HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
///   QWP(t) = R(t) diag(1, i) R(-t)   (fast axis horizontal at t = 0;
///            QWP(pi/4)|H> = |L> up to a global phase)
Mat2 jones_matrix(const Element& e);

/// One analyzer configuration: plates rotating the selected pointer outcome
/// onto |H>, followed by the PBS transmitted port.
struct AnalyzerBranch {
    int label; // +1 or -1, in the abstract setting's outcome basis
    std::vector<Element> elements;
};

/// A compiled weak-measurement module. Light enters in the down arm and
/// leaves in the up arm.
struct CircuitModule {
    std::vector<Element> prolog; // measurement basis -> {|H>, |V>}
    std::vector<Element> core;   // BD + arm waveplates (the weak coupling)
    std::vector<AnalyzerBranch> analyzer;
    std::vector<Element> epilog; // recombination + basis restore
    PauliObservable obs;
    double gamma;
    PointerSetting setting;
};

/// Pass threshold for verify_module.
inline constexpr double kOpticVerifyTol = 1e-10;

/// Lower an abstract module to the waveplate/BD sequence. Observables in the
/// x-z Bloch plane get the single-HWP basis change at phi/2; general
/// observables use a QWP-HWP-QWP decomposition of the eigenbasis rotation.
/// The analyzer is compiled per outcome; the emitted plates select the
/// optical-frame image of the abstract outcome (the pointer's |1> axis is
/// reflected inside the interferometer), so branch labels line up with
/// kraus_branch outcomes directly.
CircuitModule compile_module(const PauliObservable& obs, double gamma, PointerSetting setting);

/// Path (x) polarization amplitudes: index = arm * 2 + pol with arm 0 = down,
/// 1 = up and pol 0 = H, 1 = V.
using PathState = std::array<Complex, 4>;

PathState apply_elements(std::span<const Element> elements, PathState state);

struct BranchResult {
    int label;
    Vec2 out; // unnormalized output polarization state
};

/// Propagate an input through every analyzer branch of the module.
std::vector<BranchResult> simulate_circuit(const CircuitModule& cm, const Ket2& input);

/// The simulated 2x2 branch operator (columns from basis inputs).
Mat2 simulated_kraus(const CircuitModule& cm, std::size_t branch);

/// Max over outcomes of the phase-minimized distance between the simulated
/// branch operators and the kraus_branch targets, allowing the documented
/// outcome relabeling (|+> <-> |->, |R> <-> |L>).
double verify_module(const CircuitModule& cm, const PauliObservable& obs, double gamma);

/// Plain-text element list, one element per line: `KIND angle_deg arm`,
/// sections separated by `# prolog` / `# core` / `# analyzer +1` /
/// `# analyzer -1` / `# epilog` comment lines.
std::string export_circuit(const CircuitModule& cm);

} // namespace swm
