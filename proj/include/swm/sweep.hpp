#pragma once

#include <string>
#include <vector>

#include "swm/config.hpp"
#include "swm/qcore.hpp"

namespace swm {

/// One post-selection point of a sweep. Every numeric field comes with a
/// has_ flag; flagged rows carry no SWV numbers.
struct SweepRow {
    double theta_deg = 0.0;
    bool has_theta = false;
    Complex oracle{};
    bool has_oracle = false;
    Complex est{};
    bool has_est = false;
    double p_pass = 0.0;
    bool has_p_pass = false;
    std::uint64_t n_pass = 0;
    bool has_n_pass = false;
    double re_sd = 0.0, im_sd = 0.0;
    bool has_sd = false;
    std::string flags; // "", "divergent", or "failed:<reason>"
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// Run the configured experiment: per post-selection point, oracle SWV plus
/// exact or shot-based extraction. Rows are independent work items; failures
/// mark the row instead of aborting the sweep.
SweepResult run_sweep(const RunConfig& cfg);

/// Write the CSV table at `path` plus a JSON sidecar (same stem, .json) with
/// the effective config, toolkit version, and seed. Byte-stable for
/// identical inputs.
void write_output(const RunConfig& cfg, const SweepResult& result, const std::string& path);

} // namespace swm
