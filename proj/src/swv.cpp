#include "swm/swv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "swm/numerics.hpp"

namespace swm {

Complex weak_value_oracle(const Ket2& psi_i, const Ket2& psi_f,
                          std::span<const PauliObservable> obs_list)
{
    Complex denom = inner(psi_f, psi_i);
    if (std::abs(denom) <= 1e-12) {
        throw OrthogonalPostSelection("weak_value_oracle: |<psi_f|psi_i>| <= 1e-12");
    }
    Vec2 v = psi_i.amps();
    for (const PauliObservable& obs : obs_list) {
        v = mat_apply(observable_matrix(obs), v);
    }
    Complex num = std::conj(psi_f.a0()) * v[0] + std::conj(psi_f.a1()) * v[1];
    return num / denom;
}

SwvPart parity_rule(std::span<const PointerSetting> settings)
{
    int active = 0, circ = 0;
    for (PointerSetting s : settings) {
        if (s != PointerSetting::Identity) {
            active++;
        }
        if (s == PointerSetting::Circular) {
            circ++;
        }
    }
    if (active == 0) {
        throw AllIdentity("parity_rule: no non-Identity setting");
    }
    return (circ % 2 == 0) ? SwvPart::RealPart : SwvPart::ImagPart;
}

Complex extract_single_firstorder(double e_plus, double e_circ, double gamma)
{
    if (!(gamma > 0.0)) {
        throw ZeroStrength("extract_single_firstorder: gamma must be > 0");
    }
    return Complex(e_plus / (2.0 * gamma), e_circ / (2.0 * gamma));
}

namespace {

const Complex kI(0.0, 1.0);

struct LevelInputs {
    std::vector<double> gammas; // strengths of the subset members, all > 0
    double sigma_im;            // sign of the Im W head term in the odd bracket
    double l_plus;              // proper-subset bracket, even combination
    double l_odd;               // proper-subset bracket, odd combination
    double d_known;             // proper-subset part of <Phi|Phi>/|<f|i>|^2
    double e_plus;
    double e_odd;
    double d_hat = 0.0;
    bool has_d_hat = false;
};

// Exact inversion of e = K * bracket / D with K = prod cos g sin g and
// D = d_known + prod(sin^2 g) |W|^2. With a measured post-selection weight
// d_hat the denominator is substituted directly (no branch ambiguity and no
// cancellation at |W| = cot g, where the quadratic's roots merge).
// Without one, Re W and Im W are affine in D, giving a quadratic whose
// W = 0-branch root is the small one.
Complex solve_level_exact(const LevelInputs& in)
{
    double kprod = 1.0, s2 = 1.0;
    for (double g : in.gammas) {
        if (!(g > 0.0)) {
            throw ZeroStrength("exact extraction: every member gamma must be > 0");
        }
        kprod *= std::cos(g) * std::sin(g);
        s2 *= std::sin(g) * std::sin(g);
    }
    double alpha = in.e_plus / kprod;
    double beta = in.e_odd / kprod;

    double d;
    if (in.has_d_hat) {
        d = in.d_hat;
    } else {
        double a = 0.25 * s2 * (alpha * alpha + beta * beta);
        double b = -(1.0 + 0.5 * s2 * (alpha * in.l_plus + beta * in.l_odd));
        double c = in.d_known + 0.25 * s2 * (in.l_plus * in.l_plus + in.l_odd * in.l_odd);
        QuadraticRoots roots = solve_quadratic(a, b, c);
        if (!roots.real) {
            throw NoPhysicalRoot("exact extraction: denominator quadratic has no real root");
        }
        d = roots.small;
    }
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw NoPhysicalRoot("exact extraction: no positive denominator root");
    }
    return Complex(0.5 * (alpha * d - in.l_plus), in.sigma_im * 0.5 * (beta * d - in.l_odd));
}

Complex solve_level_firstorder(const LevelInputs& in)
{
    double kprod = 1.0;
    for (double g : in.gammas) {
        if (!(g > 0.0)) {
            throw ZeroStrength("first-order extraction: every member gamma must be > 0");
        }
        kprod *= g;
    }
    return Complex(0.5 * (in.e_plus / kprod - in.l_plus),
                   in.sigma_im * 0.5 * (in.e_odd / kprod - in.l_odd));
}

int lowest_member(std::uint32_t mask)
{
    return std::countr_zero(mask);
}

// Readout phase of one bilinear term: i per Circular member inside T,
// -i per Circular member outside.
Complex subset_phase(std::uint32_t t, std::uint32_t mask, std::span<const PointerSetting> settings)
{
    Complex ph(1.0, 0.0);
    for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
        int k = lowest_member(rest);
        if (settings[k] == PointerSetting::Circular) {
            ph *= (t >> k) & 1u ? kI : -kI;
        }
    }
    return ph;
}

// sum over T subset of mask (optionally excluding T in {0, mask}) of
// phase(T) conj(w[T]) w[mask\T]. Real by conjugation symmetry.
double bracket_sum(std::uint32_t mask, std::span<const PointerSetting> settings,
                   const SwvTable& table, bool proper_only)
{
    Complex sum(0.0, 0.0);
    std::uint32_t sub = mask;
    while (true) {
        if (!(proper_only && (sub == 0 || sub == mask))) {
            sum += subset_phase(sub, mask, settings) * std::conj(table.w[sub]) *
                   table.w[mask ^ sub];
        }
        if (sub == 0) {
            break;
        }
        sub = (sub - 1) & mask;
    }
    return sum.real();
}

double head_imag_sign(std::uint32_t mask, std::span<const PointerSetting> settings)
{
    int circ = 0;
    for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
        if (settings[lowest_member(rest)] == PointerSetting::Circular) {
            circ++;
        }
    }
    // Head term is 2 Re[(-i)^circ W]; for odd circ this is +-2 Im W.
    return (circ % 4 == 1) ? 1.0 : -1.0;
}

double known_weight(std::uint32_t mask, const SwvTable& table, std::span<const double> gammas)
{
    double d = 0.0;
    std::uint32_t sub = mask;
    while (true) {
        if (sub != mask) {
            double term = std::norm(table.w[sub]);
            for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
                int k = lowest_member(rest);
                double s = std::sin(gammas[k]);
                term *= (sub >> k) & 1u ? s * s : 1.0 - s * s;
            }
            d += term;
        }
        if (sub == 0) {
            break;
        }
        sub = (sub - 1) & mask;
    }
    return d;
}

} // namespace

Complex extract_single_exact(double e_plus, double e_circ, double gamma)
{
    if (!(gamma > 0.0 && gamma <= kMaxGamma)) {
        throw ZeroStrength("extract_single_exact: gamma must be in (0, pi/4]");
    }
    LevelInputs in;
    in.gammas = {gamma};
    in.sigma_im = 1.0;
    in.l_plus = in.l_odd = 0.0;
    in.d_known = std::cos(gamma) * std::cos(gamma);
    in.e_plus = e_plus;
    in.e_odd = e_circ;
    return solve_level_exact(in);
}

Complex extract_pair_firstorder(const std::map<PairCombo, double>& e, Complex w1, Complex w2,
                                double gamma)
{
    if (!(gamma > 0.0)) {
        throw ZeroStrength("extract_pair_firstorder: gamma must be > 0");
    }
    auto pp = e.find(PairCombo::PlusPlus);
    if (pp == e.end()) {
        throw MissingSetting("extract_pair_firstorder: (Plus,Plus) entry required");
    }
    auto pc = e.find(PairCombo::PlusCirc);
    auto cp = e.find(PairCombo::CircPlus);
    if ((pc == e.end()) == (cp == e.end())) {
        throw MissingSetting("extract_pair_firstorder: exactly one odd-parity entry required");
    }

    SwvTable table{2, {Complex(1.0, 0.0), w1, w2, Complex(0.0, 0.0)}};
    std::vector<PointerSetting> plus_s = {PointerSetting::Plus, PointerSetting::Plus};
    std::vector<PointerSetting> odd_s =
        pc != e.end() ? std::vector<PointerSetting>{PointerSetting::Plus, PointerSetting::Circular}
                      : std::vector<PointerSetting>{PointerSetting::Circular, PointerSetting::Plus};

    LevelInputs in;
    in.gammas = {gamma, gamma};
    in.sigma_im = head_imag_sign(3u, odd_s);
    in.l_plus = bracket_sum(3u, plus_s, table, true);
    in.l_odd = bracket_sum(3u, odd_s, table, true);
    in.e_plus = pp->second;
    in.e_odd = pc != e.end() ? pc->second : cp->second;
    return solve_level_firstorder(in);
}

Complex extract_triple_firstorder(double e_ppp, double e_ccc, const TripleLowerOrders& lower,
                                  double gamma)
{
    if (!(gamma > 0.0)) {
        throw ZeroStrength("extract_triple_firstorder: gamma must be > 0");
    }
    SwvTable table{3,
                   {Complex(1.0, 0.0), lower.w1, lower.w2, lower.w12, lower.w3, lower.w13,
                    lower.w23, Complex(0.0, 0.0)}};
    std::vector<PointerSetting> plus_s(3, PointerSetting::Plus);
    std::vector<PointerSetting> circ_s(3, PointerSetting::Circular);

    LevelInputs in;
    in.gammas = {gamma, gamma, gamma};
    in.sigma_im = head_imag_sign(7u, circ_s); // three Circulars -> -1
    in.l_plus = bracket_sum(7u, plus_s, table, true);
    in.l_odd = bracket_sum(7u, circ_s, table, true);
    in.e_plus = e_ppp;
    in.e_odd = e_ccc;
    return solve_level_firstorder(in);
}

ExpansionTable expansion_coefficients(const Chain& chain, std::span<const PointerSetting> settings,
                                      std::span<const double> gamma_grid)
{
    const int n = static_cast<int>(chain.modules.size());
    if (static_cast<int>(settings.size()) != n) {
        throw MissingSetting("expansion_coefficients: one setting per module required");
    }
    if (static_cast<int>(gamma_grid.size()) < 2 * n + 2) {
        throw ValidationError("expansion_coefficients: grid needs at least 2N+2 points");
    }
    std::set<double> distinct(gamma_grid.begin(), gamma_grid.end());
    if (distinct.size() != gamma_grid.size()) {
        throw ValidationError("expansion_coefficients: grid values must be distinct");
    }
    for (double g : gamma_grid) {
        if (!(g > 0.0 && g <= 0.3)) {
            throw ValidationError("expansion_coefficients: grid values must lie in (0, 0.3]");
        }
    }

    int active = 0;
    for (PointerSetting s : settings) {
        if (s != PointerSetting::Identity) {
            active++;
        }
    }
    // The expectation is an even/odd function of gamma with the parity of
    // the non-Identity count; fit only matching powers, plus two guard
    // orders to absorb the tail beyond 2N.
    std::vector<int> powers;
    for (int p = active % 2; p <= 2 * n; p += 2) {
        powers.push_back(p);
    }
    powers.push_back(powers.back() + 2);
    powers.push_back(powers.back() + 2);

    const std::size_t npts = gamma_grid.size();
    std::vector<double> values(npts);
    std::vector<PointerSetting> settings_copy(settings.begin(), settings.end());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(npts); i++) {
        Chain scaled = chain;
        for (WeakModule& m : scaled.modules) {
            m.gamma = gamma_grid[i];
        }
        PointerState ps = post_select(evolve(scaled, Exec::Serial), chain.psi_f);
        values[i] = pointer_joint_expectation(ps, settings_copy);
    }

    std::vector<double> fitted = polyfit_powers(gamma_grid, values, powers);
    double residual = 0.0;
    for (std::size_t i = 0; i < npts; i++) {
        residual = std::max(
            std::abs(polyval_powers(fitted, powers, gamma_grid[i]) - values[i]), residual);
    }

    ExpansionTable table;
    table.settings = settings_copy;
    table.coefficients.assign(2 * n + 1, 0.0);
    for (std::size_t j = 0; j < powers.size(); j++) {
        if (powers[j] <= 2 * n) {
            table.coefficients[powers[j]] = fitted[j];
        }
    }
    table.residual = residual;
    if (residual > 1e-9) {
        throw FitDiverged("expansion_coefficients: fit residual above 1e-9");
    }
    return table;
}

std::vector<double> default_gamma_grid(int n_modules, double gamma_max, int points)
{
    points = std::max(points, 2 * n_modules + 4);
    std::vector<double> grid(points);
    for (int i = 0; i < points; i++) {
        grid[i] = gamma_max * static_cast<double>(i + 1) / points;
    }
    return grid;
}

SwvTable oracle_swv_table(const Chain& chain)
{
    const int n = static_cast<int>(chain.modules.size());
    SwvTable table{n, std::vector<Complex>(std::size_t{1} << n)};
    table.w[0] = Complex(1.0, 0.0);
    for (std::uint32_t mask = 1; mask < (1u << n); mask++) {
        std::vector<PauliObservable> obs;
        for (int k = 0; k < n; k++) {
            if ((mask >> k) & 1u) {
                obs.push_back(chain.modules[k].obs);
            }
        }
        table.w[mask] = weak_value_oracle(chain.psi_i, chain.psi_f, obs);
    }
    return table;
}

std::vector<PointerSetting> plus_settings_for(std::uint32_t mask, int n)
{
    std::vector<PointerSetting> s(n, PointerSetting::Identity);
    for (int k = 0; k < n; k++) {
        if ((mask >> k) & 1u) {
            s[k] = PointerSetting::Plus;
        }
    }
    return s;
}

std::vector<PointerSetting> odd_settings_for(std::uint32_t mask, int n)
{
    std::vector<PointerSetting> s = plus_settings_for(mask, n);
    if (std::popcount(mask) % 2 == 1) {
        for (int k = 0; k < n; k++) {
            if ((mask >> k) & 1u) {
                s[k] = PointerSetting::Circular;
            }
        }
    } else {
        s[lowest_member(mask)] = PointerSetting::Circular;
    }
    return s;
}

double subset_bracket(std::uint32_t mask, std::span<const PointerSetting> settings,
                      const SwvTable& table)
{
    return bracket_sum(mask, settings, table, false);
}

SwvTable extract_hierarchy(const Chain& chain, const MeasureFn& measure, Extraction mode)
{
    const int n = static_cast<int>(chain.modules.size());
    if (n < 1 || n > kMaxModules) {
        throw ValidationError("extract_hierarchy: chain size out of range");
    }
    std::vector<double> gammas(n);
    for (int k = 0; k < n; k++) {
        gammas[k] = chain.modules[k].gamma;
        if (!(gammas[k] > 0.0)) {
            throw ZeroStrength("extract_hierarchy: every module gamma must be > 0");
        }
    }

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << n); mask++) {
        masks.push_back(mask);
    }
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    SwvTable table{n, std::vector<Complex>(std::size_t{1} << n)};
    table.w[0] = Complex(1.0, 0.0);
    for (std::uint32_t mask : masks) {
        std::vector<PointerSetting> plus_s = plus_settings_for(mask, n);
        std::vector<PointerSetting> odd_s = odd_settings_for(mask, n);
        SubsetMeasurement meas = measure(mask, plus_s, odd_s);

        LevelInputs in;
        for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
            in.gammas.push_back(gammas[lowest_member(rest)]);
        }
        in.sigma_im = head_imag_sign(mask, odd_s);
        in.l_plus = bracket_sum(mask, plus_s, table, true);
        in.l_odd = bracket_sum(mask, odd_s, table, true);
        in.d_known = known_weight(mask, table, gammas);
        in.e_plus = meas.e_plus;
        in.e_odd = meas.e_odd;
        in.d_hat = meas.d_hat;
        in.has_d_hat = meas.has_d_hat;
        table.w[mask] =
            mode == Extraction::ExactPauli ? solve_level_exact(in) : solve_level_firstorder(in);
    }
    return table;
}

SubsetStates::SubsetStates(const Ket2& psi_i, std::span<const WeakModule> modules)
    : n_(static_cast<int>(modules.size())), psi_i_(psi_i)
{
    if (n_ < 1 || n_ > kMaxModules) {
        throw ValidationError("SubsetStates: chain size out of range");
    }
    states_.reserve(std::size_t{1} << n_);
    states_.push_back(JointState{0, {psi_i.a0(), psi_i.a1()}});
    for (std::uint32_t mask = 1; mask < (1u << n_); mask++) {
        Chain sub{psi_i, {}, psi_i};
        for (int k = 0; k < n_; k++) {
            if ((mask >> k) & 1u) {
                sub.modules.push_back(modules[k]);
            }
        }
        states_.push_back(evolve(sub, Exec::Serial));
    }
}

std::vector<int> SubsetStates::members(std::uint32_t mask)
{
    std::vector<int> out;
    for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
        out.push_back(lowest_member(rest));
    }
    return out;
}

SubsetMeasurement measure_exact(const SubsetStates& states, std::uint32_t mask, const Ket2& psi_f,
                                std::span<const PointerSetting> plus_settings,
                                std::span<const PointerSetting> odd_settings)
{
    const JointState& js = states.state(mask);
    PointerState ps = post_select(js, psi_f);

    std::vector<int> mem = SubsetStates::members(mask);
    std::vector<PointerSetting> rp, ro;
    rp.reserve(mem.size());
    ro.reserve(mem.size());
    for (int k : mem) {
        rp.push_back(plus_settings[k]);
        ro.push_back(odd_settings[k]);
    }

    SubsetMeasurement out;
    out.e_plus = pointer_joint_expectation(ps, rp);
    out.e_odd = pointer_joint_expectation(ps, ro);
    // norm_sq factors as |<f|i>|^2 * D.
    double overlap = std::norm(inner(psi_f, states.psi_i()));
    if (overlap < 1e-30) {
        throw OrthogonalPostSelection("measure_exact: orthogonal post-selection");
    }
    out.d_hat = ps.norm_sq / overlap;
    out.has_d_hat = true;
    return out;
}

} // namespace swm
