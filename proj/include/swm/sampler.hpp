#pragma once

#include <cstdint>
#include <vector>

#include "swm/chain.hpp"
#include "swm/swv.hpp"

namespace swm {

/// One coincidence-counting run: a chain plus per-pointer analyzer settings.
/// Identity settings leave that pointer unanalyzed (traced out); outcome
/// tuples range over the analyzed pointers only.
struct MeasurementPlan {
    Chain chain;
    std::vector<PointerSetting> settings; // one per module
    bool include_fail_port = true;        // false: fail events pooled in one cell
};

/// Exact probabilities per (outcome tuple, post-selection port).
/// Cell index = (tuple_bits << 1) | port with port 0 = pass, 1 = fail;
/// tuple bit j belongs to the j-th analyzed pointer, 0 = outcome +1.
struct OutcomeDistribution {
    std::vector<int> analyzed; // module indices (0-based) with analyzers
    std::vector<double> p;     // size 2^(m+1)
    bool fail_split;
};

OutcomeDistribution outcome_distribution(const MeasurementPlan& plan);

/// Coincidence counts per cell; same layout as OutcomeDistribution.
struct CountsTable {
    std::vector<int> analyzed;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total;
    std::uint64_t seed;
    bool fail_split;
};

/// Multinomial draw of n shots, fully determined by (dist, n, seed, stream).
/// Shot i depends only on counter i, so parallel chunking cannot change the
/// result.
CountsTable sample_counts(const OutcomeDistribution& dist, std::uint64_t n, std::uint64_t seed,
                          std::uint64_t stream = 0, Exec exec = Exec::Auto);

/// Resample a counts table from its empirical distribution (bootstrap).
CountsTable resample_counts(const CountsTable& counts, std::uint64_t seed, std::uint64_t stream);

struct Estimate {
    double mean;
    double stderr_; // sqrt((1 - mean^2) / n_pass) for a +-1 product estimator
    std::uint64_t n_pass;
};

/// Pass-conditioned mean of the outcome product over analyzed pointers.
Estimate estimate_joint_expectation(const CountsTable& counts);

/// End-to-end shot-based SWV estimate with seeded-bootstrap uncertainty.
struct SwvEstimate {
    SWValue swv;
    double re_sd;
    double im_sd;
    std::uint64_t n_pass_min;  // smallest pass count over the plans used
    int resamples_used;        // bootstrap resamples that produced a value
    double pass_fraction_full; // measured pass rate of the all-modules Plus plan
};

/// Samples every setting combination the extraction needs (two plans per
/// module subset, built by deactivating the other modules), estimates the
/// expectations, extracts the SWV, and bootstraps the counts tables for the
/// uncertainty. `row_stream` separates independent pipeline invocations
/// (e.g. sweep rows) within one seed.
SwvEstimate estimate_swv_pipeline(const Chain& chain, std::uint64_t shots, std::uint64_t seed,
                                  int resamples, Extraction extraction = Extraction::ExactPauli,
                                  std::uint64_t row_stream = 0);

} // namespace swm
