#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "swm/chain.hpp"
#include "swm/qcore.hpp"

namespace swm {

/// A sequential weak value together with the observables it belongs to.
struct SWValue {
    Complex value;
    std::vector<PauliObservable> observables; // chain order
    int order() const { return static_cast<int>(observables.size()); }
};

/// <psi_f| A_N ... A_1 |psi_i> / <psi_f|psi_i> by direct matrix products.
Complex weak_value_oracle(const Ket2& psi_i, const Ket2& psi_f,
                          std::span<const PauliObservable> obs_list);

enum class SwvPart { RealPart, ImagPart };

/// Even count of Circular settings reads out the real part, odd the
/// imaginary part.
SwvPart parity_rule(std::span<const PointerSetting> settings);

/// Invert <sigma_+> = 2 gamma Re W, <sigma_R> = 2 gamma Im W.
Complex extract_single_firstorder(double e_plus, double e_circ, double gamma);

/// Exact single-Pauli inversion of
///   e = sin(2g) (Re W, Im W) / (cos^2 g + sin^2 g |W|^2),
/// solving the quadratic for the denominator and taking the root continuous
/// with the W = 0 branch.
Complex extract_single_exact(double e_plus, double e_circ, double gamma);

enum class PairCombo { PlusPlus, PlusCirc, CircPlus, CircCirc };

/// First-order two-observable inversion. `e` must contain PlusPlus and
/// exactly one odd-parity entry (PlusCirc or CircPlus); w1, w2 are the
/// single-observable weak values.
Complex extract_pair_firstorder(const std::map<PairCombo, double>& e, Complex w1, Complex w2,
                                double gamma);

struct TripleLowerOrders {
    Complex w1, w2, w3;    // singles
    Complex w12, w13, w23; // pairs (modules named in chain order)
};

/// First-order three-observable inversion from <s+ s+ s+> and <sR sR sR>.
Complex extract_triple_firstorder(double e_ppp, double e_ccc, const TripleLowerOrders& lower,
                                  double gamma);

/// Polynomial expansion of a joint pointer expectation in the (uniform)
/// coupling strength.
struct ExpansionTable {
    std::vector<PointerSetting> settings;
    std::vector<double> coefficients; // orders 0..2N; wrong-parity entries are 0
    double residual;                  // max |fit - sample| over the grid
};

/// Least-squares fit of gamma -> pointer_joint_expectation with every
/// module strength replaced by the grid value. The fit basis is restricted
/// to the parity of the non-Identity setting count (the expectation is an
/// even/odd function of gamma accordingly) plus two guard orders beyond 2N.
ExpansionTable expansion_coefficients(const Chain& chain, std::span<const PointerSetting> settings,
                                      std::span<const double> gamma_grid);

/// Reference grid for expansion fits: `points` values up to gamma_max.
std::vector<double> default_gamma_grid(int n_modules, double gamma_max = 0.06, int points = 16);

// ---------------------------------------------------------------------------
// Subset-chain machinery shared by the first-order and exact extractors.
//
// Subsets of the chain's modules are encoded as bitmasks (bit k-1 = module k).
// w[mask] is the SWV of the sub-chain given by the mask; w[0] = 1.
// ---------------------------------------------------------------------------

struct SwvTable {
    int n;
    std::vector<Complex> w; // size 2^n
};

/// All 2^N subset SWVs from the definition-level oracle.
SwvTable oracle_swv_table(const Chain& chain);

/// Settings used by the extraction hierarchy for a subset: Plus on all
/// members (even parity), and the odd-parity companion (Circular on all
/// members when |mask| is odd, else Circular on the lowest member only).
std::vector<PointerSetting> plus_settings_for(std::uint32_t mask, int n);
std::vector<PointerSetting> odd_settings_for(std::uint32_t mask, int n);

/// Leading-order bracket: the joint expectation for full-rank settings over
/// `mask` is  (prod_k cos g_k sin g_k) * bracket / D  exactly, and
/// ~ (prod_k g_k) * bracket at first order. Computes
/// sum_{T subset mask} phase(T) conj(w[T]) w[mask\T]  (a real number).
double subset_bracket(std::uint32_t mask, std::span<const PointerSetting> settings,
                      const SwvTable& table);

/// Measured (or exactly computed) inputs for one subset of the hierarchy.
/// d_hat is the normalized post-selection weight <Phi|Phi>/|<psi_f|psi_i>|^2;
/// when present the exact inversion substitutes it for the denominator,
/// otherwise the W = 0-branch root of the denominator quadratic is used.
struct SubsetMeasurement {
    double e_plus;
    double e_odd;
    double d_hat = 0.0;
    bool has_d_hat = false;
};

using MeasureFn = std::function<SubsetMeasurement(
    std::uint32_t mask, std::span<const PointerSetting> plus_settings,
    std::span<const PointerSetting> odd_settings)>;

enum class Extraction { FirstOrder, ExactPauli };

/// Walk subsets in increasing size, extracting each subset SWV from its two
/// expectation values and the already-extracted lower orders. FirstOrder
/// divides by 2 prod(gamma); ExactPauli solves the exact denominator
/// quadratic (strength-independent for Pauli observables).
SwvTable extract_hierarchy(const Chain& chain, const MeasureFn& measure, Extraction mode);

/// Theta-independent part of exact-mode measurements: the evolved joint
/// state of every subset chain (reduced to its active modules).
class SubsetStates {
public:
    SubsetStates(const Ket2& psi_i, std::span<const WeakModule> modules);

    int n() const { return n_; }
    const Ket2& psi_i() const { return psi_i_; }
    const JointState& state(std::uint32_t mask) const { return states_[mask]; }
    /// Members of `mask` in ascending module order.
    static std::vector<int> members(std::uint32_t mask);

private:
    int n_;
    Ket2 psi_i_;
    std::vector<JointState> states_; // indexed by mask; [0] unused
};

/// Exact-mode measurement of one subset: post-select the reduced state and
/// evaluate both setting combinations plus the exact d_hat.
SubsetMeasurement measure_exact(const SubsetStates& states, std::uint32_t mask, const Ket2& psi_f,
                                std::span<const PointerSetting> plus_settings,
                                std::span<const PointerSetting> odd_settings);

} // namespace swm
