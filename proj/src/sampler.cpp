#include "swm/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "swm/rng.hpp"

namespace swm {

namespace {

Mat2 outer(const Vec2& v)
{
    return {v[0] * std::conj(v[0]), v[0] * std::conj(v[1]), v[1] * std::conj(v[0]),
            v[1] * std::conj(v[1])};
}

Mat2 sandwich(const Mat2& k, const Mat2& rho)
{
    return mat_mul(k, mat_mul(rho, mat_adjoint(k)));
}

double expect(const Mat2& rho, const Ket2& v)
{
    Vec2 rv = mat_apply(rho, v.amps());
    return (std::conj(v.a0()) * rv[0] + std::conj(v.a1()) * rv[1]).real();
}

} // namespace

OutcomeDistribution outcome_distribution(const MeasurementPlan& plan)
{
    const int n = static_cast<int>(plan.chain.modules.size());
    if (static_cast<int>(plan.settings.size()) != n) {
        throw MissingSetting("outcome_distribution: one setting per module required");
    }

    OutcomeDistribution dist;
    dist.fail_split = plan.include_fail_port;
    for (int k = 0; k < n; k++) {
        if (plan.settings[k] != PointerSetting::Identity) {
            dist.analyzed.push_back(k);
        }
    }
    const int m = static_cast<int>(dist.analyzed.size());

    // Walk the chain branching on analyzed outcomes; unanalyzed pointers are
    // summed out of the 2x2 system density matrix as they occur.
    std::vector<Mat2> rho(std::size_t{1} << m);
    rho[0] = outer(plan.chain.psi_i.amps());
    int done = 0;
    for (int k = 0; k < n; k++) {
        const WeakModule& mod = plan.chain.modules[k];
        if (plan.settings[k] == PointerSetting::Identity) {
            Mat2 k0 = kraus_branch(mod, ket_H());
            Mat2 k1 = kraus_branch(mod, ket_V());
            for (std::size_t t = 0; t < (std::size_t{1} << done); t++) {
                rho[t] = mat_add(sandwich(k0, rho[t]), sandwich(k1, rho[t]));
            }
        } else {
            auto [vp, vm] = setting_basis(plan.settings[k]);
            Mat2 kp = kraus_branch(mod, vp);
            Mat2 km = kraus_branch(mod, vm);
            for (std::size_t t = std::size_t{1} << done; t-- > 0;) {
                rho[t | (std::size_t{1} << done)] = sandwich(km, rho[t]);
                rho[t] = sandwich(kp, rho[t]);
            }
            done++;
        }
    }

    Ket2 fail_state = orthogonal(plan.chain.psi_f);
    dist.p.assign(std::size_t{1} << (m + 1), 0.0);
    for (std::size_t t = 0; t < (std::size_t{1} << m); t++) {
        double pass = std::max(expect(rho[t], plan.chain.psi_f), 0.0);
        double fail = std::max(expect(rho[t], fail_state), 0.0);
        dist.p[t << 1] = pass;
        if (plan.include_fail_port) {
            dist.p[(t << 1) | 1] = fail;
        } else {
            dist.p[1] += fail;
        }
    }
    return dist;
}

CountsTable sample_counts(const OutcomeDistribution& dist, std::uint64_t n, std::uint64_t seed,
                          std::uint64_t stream, Exec exec)
{
    if (n < 1) {
        throw ValidationError("sample_counts: need at least one shot");
    }
    const std::size_t cells = dist.p.size();
    std::vector<double> cdf(cells);
    double acc = 0.0;
    for (std::size_t j = 0; j < cells; j++) {
        acc += dist.p[j];
        cdf[j] = acc;
    }
    cdf[cells - 1] = std::max(cdf[cells - 1], 1.0); // guard the last bin

    CountsTable ct;
    ct.analyzed = dist.analyzed;
    ct.counts.assign(cells, 0);
    ct.n_total = n;
    ct.seed = seed;
    ct.fail_split = dist.fail_split;

    auto cell_of = [&](std::uint64_t shot) {
        double u = philox_uniform(seed, stream, shot);
        return static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) -
                                        cdf.begin());
    };

    bool parallel;
#ifdef _OPENMP
    parallel = exec == Exec::Parallel || (exec == Exec::Auto && n >= 100000);
#else
    parallel = false;
    (void)exec;
#endif

    if (!parallel) {
        for (std::uint64_t i = 0; i < n; i++) {
            ct.counts[cell_of(i)]++;
        }
        return ct;
    }

#ifdef _OPENMP
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(cells, 0);
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); i++) {
            local[cell_of(static_cast<std::uint64_t>(i))]++;
        }
#pragma omp critical
        for (std::size_t j = 0; j < cells; j++) {
            ct.counts[j] += local[j];
        }
    }
#endif
    return ct;
}

CountsTable resample_counts(const CountsTable& counts, std::uint64_t seed, std::uint64_t stream)
{
    CountsTable out = counts;
    CounterRng rng(seed, stream);
    const double total = static_cast<double>(counts.n_total);
    std::uint64_t remaining = counts.n_total;
    double rest_p = 1.0;
    for (std::size_t j = 0; j + 1 < counts.counts.size(); j++) {
        double pj = static_cast<double>(counts.counts[j]) / total;
        std::uint64_t draw =
            rest_p > 1e-15 ? sample_binomial(rng, remaining, std::min(pj / rest_p, 1.0)) : 0;
        out.counts[j] = draw;
        remaining -= draw;
        rest_p -= pj;
    }
    out.counts.back() = remaining;
    return out;
}

Estimate estimate_joint_expectation(const CountsTable& counts)
{
    std::uint64_t n_pass = 0;
    double signed_sum = 0.0;
    for (std::size_t cell = 0; cell < counts.counts.size(); cell += 2) {
        std::uint64_t c = counts.counts[cell];
        if (c == 0) {
            continue;
        }
        n_pass += c;
        std::uint64_t tuple = cell >> 1;
        double sign = (std::popcount(tuple) & 1u) ? -1.0 : 1.0;
        signed_sum += sign * static_cast<double>(c);
    }
    if (n_pass < 2) {
        throw NoPassEvents("estimate_joint_expectation: fewer than 2 pass events");
    }
    double mean = signed_sum / static_cast<double>(n_pass);
    double var = std::max(1.0 - mean * mean, 0.0);
    return Estimate{mean, std::sqrt(var / static_cast<double>(n_pass)), n_pass};
}

namespace {

struct PipelinePlan {
    std::uint32_t mask; // 0 = calibration run
    bool odd;
    MeasurementPlan plan;
};

// Plan order is part of the seeding contract: calibration first (exact mode
// only), then subsets by size, each with its Plus plan before its odd plan.
std::vector<PipelinePlan> build_plans(const Chain& chain, Extraction extraction)
{
    const int n = static_cast<int>(chain.modules.size());
    std::vector<PipelinePlan> plans;

    if (extraction == Extraction::ExactPauli) {
        MeasurementPlan calib{chain, std::vector<PointerSetting>(n, PointerSetting::Identity),
                              true};
        for (WeakModule& m : calib.chain.modules) {
            m.gamma = 0.0;
        }
        plans.push_back({0, false, std::move(calib)});
    }

    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << n); mask++) {
        masks.push_back(mask);
    }
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    for (std::uint32_t mask : masks) {
        for (bool odd : {false, true}) {
            MeasurementPlan p{chain, {}, true};
            for (int k = 0; k < n; k++) {
                if (!((mask >> k) & 1u)) {
                    p.chain.modules[k].gamma = 0.0;
                }
            }
            p.settings = odd ? odd_settings_for(mask, n) : plus_settings_for(mask, n);
            plans.push_back({mask, odd, std::move(p)});
        }
    }
    return plans;
}

// One extraction pass over per-plan estimates. p0_hat is the calibration
// pass fraction (|<f|i>|^2 estimate); < 0 when unavailable.
Complex extract_from_estimates(const Chain& chain, Extraction extraction,
                               const std::vector<PipelinePlan>& plans,
                               const std::vector<Estimate>& ests, std::uint64_t shots,
                               double p0_hat)
{
    const int n = static_cast<int>(chain.modules.size());
    std::vector<std::array<int, 2>> idx(std::size_t{1} << n, {-1, -1});
    for (std::size_t p = 0; p < plans.size(); p++) {
        if (plans[p].mask != 0) {
            idx[plans[p].mask][plans[p].odd ? 1 : 0] = static_cast<int>(p);
        }
    }

    MeasureFn measure = [&](std::uint32_t mask, std::span<const PointerSetting>,
                            std::span<const PointerSetting>) {
        const Estimate& ep = ests[idx[mask][0]];
        const Estimate& eo = ests[idx[mask][1]];
        SubsetMeasurement sm;
        sm.e_plus = ep.mean;
        sm.e_odd = eo.mean;
        if (p0_hat > 0.0) {
            double pass = static_cast<double>(ep.n_pass) + static_cast<double>(eo.n_pass);
            sm.d_hat = pass / (2.0 * static_cast<double>(shots) * p0_hat);
            sm.has_d_hat = true;
        }
        return sm;
    };
    SwvTable table = extract_hierarchy(chain, measure, extraction);
    return table.w[(std::size_t{1} << n) - 1];
}

} // namespace

SwvEstimate estimate_swv_pipeline(const Chain& chain, std::uint64_t shots, std::uint64_t seed,
                                  int resamples, Extraction extraction, std::uint64_t row_stream)
{
    if (shots < 10000) {
        throw ValidationError("estimate_swv_pipeline: shots must be >= 10^4");
    }
    if (resamples < 100) {
        throw ValidationError("estimate_swv_pipeline: resamples must be >= 100");
    }

    std::vector<PipelinePlan> plans = build_plans(chain, extraction);

    const std::uint32_t full_mask = (1u << chain.modules.size()) - 1;
    std::vector<CountsTable> tables(plans.size());
    std::vector<Estimate> ests(plans.size());
    double p0_hat = -1.0;
    double pass_full = 0.0;
    std::uint64_t n_pass_min = shots;
    for (std::size_t p = 0; p < plans.size(); p++) {
        OutcomeDistribution dist = outcome_distribution(plans[p].plan);
        tables[p] = sample_counts(dist, shots, seed, stream_id(row_stream, p, 0));
        ests[p] = estimate_joint_expectation(tables[p]);
        n_pass_min = std::min(n_pass_min, ests[p].n_pass);
        if (plans[p].mask == 0) {
            p0_hat = static_cast<double>(ests[p].n_pass) / static_cast<double>(shots);
        }
        if (plans[p].mask == full_mask && !plans[p].odd) {
            pass_full = static_cast<double>(ests[p].n_pass) / static_cast<double>(shots);
        }
    }

    std::vector<PauliObservable> observables;
    for (const WeakModule& m : chain.modules) {
        observables.push_back(m.obs);
    }
    SwvEstimate out;
    out.swv = SWValue{extract_from_estimates(chain, extraction, plans, ests, shots, p0_hat),
                      std::move(observables)};
    out.n_pass_min = n_pass_min;
    out.pass_fraction_full = pass_full;

    // Seeded bootstrap: resample every counts table, re-estimate, re-extract.
    std::vector<Complex> values(static_cast<std::size_t>(resamples));
    std::vector<char> valid(static_cast<std::size_t>(resamples), 0);
#pragma omp parallel for schedule(static)
    for (int r = 1; r <= resamples; r++) {
        try {
            std::vector<Estimate> re(plans.size());
            double rp0 = -1.0;
            for (std::size_t p = 0; p < plans.size(); p++) {
                CountsTable rt =
                    resample_counts(tables[p], seed, stream_id(row_stream, p, r));
                re[p] = estimate_joint_expectation(rt);
                if (plans[p].mask == 0) {
                    rp0 = static_cast<double>(re[p].n_pass) / static_cast<double>(shots);
                }
            }
            values[r - 1] =
                extract_from_estimates(chain, extraction, plans, re, shots, rp0);
            valid[r - 1] = 1;
        } catch (const Error&) {
            valid[r - 1] = 0;
        }
    }

    double sr = 0.0, si = 0.0;
    int used = 0;
    for (int r = 0; r < resamples; r++) {
        if (valid[r]) {
            sr += values[r].real();
            si += values[r].imag();
            used++;
        }
    }
    if (used < 2) {
        throw NoPhysicalRoot("estimate_swv_pipeline: bootstrap produced fewer than 2 values");
    }
    double mr = sr / used, mi = si / used;
    double vr = 0.0, vi = 0.0;
    for (int r = 0; r < resamples; r++) {
        if (valid[r]) {
            vr += (values[r].real() - mr) * (values[r].real() - mr);
            vi += (values[r].imag() - mi) * (values[r].imag() - mi);
        }
    }
    out.re_sd = std::sqrt(vr / (used - 1));
    out.im_sd = std::sqrt(vi / (used - 1));
    out.resamples_used = used;
    return out;
}

} // namespace swm
