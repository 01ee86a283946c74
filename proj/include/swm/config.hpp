#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swm/qcore.hpp"
#include "swm/swv.hpp"

namespace swm {

/// Post-selection sweep over |psi_f> = cos(theta)|H> + sin(theta)|V>.
struct SweepSpec {
    double start_deg;
    double stop_deg;
    double step_deg;
};

struct ModuleSpec {
    PauliObservable obs;
    double gamma;         // radians
    std::string obs_text; // as written in the config
    double gamma_deg;
};

enum class RunMode { Exact, Sampled };

/// Parsed, validated experiment description. Angles are degrees in the file
/// and radians internally.
struct RunConfig {
    Ket2 pre_state;
    std::string pre_text;
    std::optional<SweepSpec> sweep;       // exactly one of sweep/post_state
    std::optional<Ket2> post_state;
    std::optional<double> post_theta_deg; // set when post_state came from an angle
    std::vector<ModuleSpec> modules;
    RunMode mode = RunMode::Exact;
    Extraction extraction = Extraction::ExactPauli;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 1;
    int resamples = 200;
    std::string output_path = "out.csv";
};

/// Parse the JSON run configuration. Unknown keys are rejected; constraint
/// violations raise ValidationError, malformed JSON raises ParseError with a
/// line number.
RunConfig parse_config(const std::string& text);

/// Canonical JSON text of the effective config (used for the output sidecar;
/// byte-stable for identical configs).
std::string config_to_json(const RunConfig& cfg);

/// Full provenance sidecar document: toolkit version, seed, effective config.
std::string sidecar_json(const RunConfig& cfg);

} // namespace swm
