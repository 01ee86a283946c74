#include "swm/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "swm/version.hpp"

namespace swm {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int line_of_offset(const std::string& text, std::size_t byte)
{
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); i++) {
        if (text[i] == '\n') {
            line++;
        }
    }
    return line;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ValidationError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

double require_number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) {
        throw ValidationError("missing key '" + key + "' in " + where);
    }
    if (!obj[key].is_number()) {
        throw ParseError("field '" + key + "' in " + where + ": expected a number");
    }
    return obj[key].get<double>();
}

Ket2 parse_amplitudes(const json& arr, const std::string& where)
{
    if (!arr.is_array() || arr.size() != 4) {
        throw ParseError("field '" + where + "': expected [re0, im0, re1, im1]");
    }
    for (const auto& v : arr) {
        if (!v.is_number()) {
            throw ParseError("field '" + where + "': expected numeric amplitudes");
        }
    }
    return Ket2::normalized(Complex(arr[0].get<double>(), arr[1].get<double>()),
                            Complex(arr[2].get<double>(), arr[3].get<double>()));
}

PauliObservable parse_observable(const std::string& text)
{
    if (text == "sx") {
        return sigma_x();
    }
    if (text == "sy") {
        return sigma_y();
    }
    if (text == "sz") {
        return sigma_z();
    }
    if (text.rfind("sigma_phi:", 0) == 0) {
        double deg;
        if (std::sscanf(text.c_str() + 10, "%lf", &deg) != 1) {
            throw ValidationError("observable '" + text + "': bad sigma_phi angle");
        }
        return sigma_phi(deg * M_PI / 180.0);
    }
    if (text.rfind("bloch:", 0) == 0) {
        double x, y, z;
        if (std::sscanf(text.c_str() + 6, "%lf,%lf,%lf", &x, &y, &z) != 3) {
            throw ValidationError("observable '" + text + "': bad bloch components");
        }
        return PauliObservable::from_direction(x, y, z);
    }
    throw ValidationError("observable '" + text +
                          "': expected sx|sy|sz|sigma_phi:<deg>|bloch:x,y,z");
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError("line " + std::to_string(line_of_offset(text, err.byte)) + ": " +
                         err.what());
    }
    if (!root.is_object()) {
        throw ParseError("config must be a JSON object");
    }
    reject_unknown_keys(root,
                        {"pre_state", "post_select", "modules", "mode", "extraction", "shots",
                         "seed", "resamples", "output_path"},
                        "config");

    RunConfig cfg{ket_plus(), "plus", std::nullopt, std::nullopt, std::nullopt, {}};

    if (!root.contains("pre_state")) {
        throw ValidationError("missing key 'pre_state'");
    }
    if (root["pre_state"].is_string()) {
        std::string name = root["pre_state"].get<std::string>();
        if (name != "plus") {
            throw ValidationError("pre_state preset '" + name + "' unknown (use \"plus\")");
        }
        cfg.pre_state = ket_plus();
        cfg.pre_text = name;
    } else {
        cfg.pre_state = parse_amplitudes(root["pre_state"], "pre_state");
        cfg.pre_text = root["pre_state"].dump();
    }

    if (!root.contains("post_select")) {
        throw ValidationError("missing key 'post_select'");
    }
    const json& post = root["post_select"];
    if (post.is_object() && post.contains("theta_deg_start")) {
        reject_unknown_keys(post, {"theta_deg_start", "theta_deg_stop", "theta_deg_step"},
                            "post_select");
        SweepSpec sweep{require_number(post, "theta_deg_start", "post_select"),
                        require_number(post, "theta_deg_stop", "post_select"),
                        require_number(post, "theta_deg_step", "post_select")};
        if (!(sweep.step_deg > 0.0) || sweep.stop_deg < sweep.start_deg) {
            throw ValidationError("post_select sweep: need step > 0 and stop >= start");
        }
        cfg.sweep = sweep;
    } else if (post.is_object() && post.contains("theta_deg")) {
        reject_unknown_keys(post, {"theta_deg"}, "post_select");
        double theta = require_number(post, "theta_deg", "post_select");
        cfg.post_theta_deg = theta;
        double rad = theta * M_PI / 180.0;
        cfg.post_state = Ket2::normalized(std::cos(rad), std::sin(rad));
    } else {
        cfg.post_state = parse_amplitudes(post, "post_select");
    }

    if (!root.contains("modules") || !root["modules"].is_array() || root["modules"].empty()) {
        throw ValidationError("modules: need a non-empty array (N >= 1)");
    }
    if (root["modules"].size() > static_cast<std::size_t>(kMaxModules)) {
        throw ValidationError("modules: at most 12 entries");
    }
    for (const auto& entry : root["modules"]) {
        if (!entry.is_object()) {
            throw ParseError("modules: each entry must be an object");
        }
        reject_unknown_keys(entry, {"observable", "gamma_deg"}, "modules entry");
        if (!entry.contains("observable") || !entry["observable"].is_string()) {
            throw ValidationError("modules entry: missing string 'observable'");
        }
        double gamma_deg = require_number(entry, "gamma_deg", "modules entry");
        if (!(gamma_deg > 0.0 && gamma_deg <= 45.0)) {
            throw ValidationError("gamma_deg must lie in (0, 45]");
        }
        std::string obs_text = entry["observable"].get<std::string>();
        cfg.modules.push_back({parse_observable(obs_text), gamma_deg * M_PI / 180.0, obs_text,
                               gamma_deg});
    }

    if (root.contains("mode")) {
        std::string mode = root["mode"].is_string() ? root["mode"].get<std::string>() : "";
        if (mode == "exact") {
            cfg.mode = RunMode::Exact;
        } else if (mode == "sampled") {
            cfg.mode = RunMode::Sampled;
        } else {
            throw ValidationError("mode must be \"exact\" or \"sampled\"");
        }
    }
    if (root.contains("extraction")) {
        std::string ex =
            root["extraction"].is_string() ? root["extraction"].get<std::string>() : "";
        if (ex == "firstorder") {
            cfg.extraction = Extraction::FirstOrder;
        } else if (ex == "exact_pauli") {
            cfg.extraction = Extraction::ExactPauli;
        } else {
            throw ValidationError("extraction must be \"firstorder\" or \"exact_pauli\"");
        }
    }
    if (root.contains("shots")) {
        double shots = require_number(root, "shots", "config");
        if (shots < 1.0 || shots != std::floor(shots)) {
            throw ValidationError("shots must be a positive integer");
        }
        cfg.shots = static_cast<std::uint64_t>(shots);
    }
    if (root.contains("seed")) {
        double seed = require_number(root, "seed", "config");
        if (seed < 0.0 || seed != std::floor(seed)) {
            throw ValidationError("seed must be a nonnegative integer");
        }
        cfg.seed = static_cast<std::uint64_t>(seed);
    }
    if (root.contains("resamples")) {
        double rs = require_number(root, "resamples", "config");
        if (rs < 1.0 || rs != std::floor(rs)) {
            throw ValidationError("resamples must be a positive integer");
        }
        cfg.resamples = static_cast<int>(rs);
    }
    if (root.contains("output_path")) {
        if (!root["output_path"].is_string()) {
            throw ParseError("field 'output_path': expected a string");
        }
        cfg.output_path = root["output_path"].get<std::string>();
    }

    if (cfg.mode == RunMode::Sampled) {
        if (cfg.shots < 10000) {
            throw ValidationError("sampled mode needs shots >= 10^4");
        }
        if (cfg.resamples < 100) {
            throw ValidationError("sampled mode needs resamples >= 100");
        }
    }
    if (cfg.extraction == Extraction::FirstOrder && cfg.modules.size() > 3) {
        throw ValidationError("firstorder extraction supports at most 3 modules");
    }
    return cfg;
}

namespace {

ordered_json config_json(const RunConfig& cfg);

} // namespace

std::string config_to_json(const RunConfig& cfg)
{
    return config_json(cfg).dump(2);
}

std::string sidecar_json(const RunConfig& cfg)
{
    ordered_json doc;
    doc["version"] = kVersion;
    doc["seed"] = cfg.seed;
    doc["config"] = config_json(cfg);
    return doc.dump(2) + "\n";
}

namespace {

ordered_json config_json(const RunConfig& cfg)
{
    ordered_json j;
    if (cfg.pre_text == "plus") {
        j["pre_state"] = "plus";
    } else {
        j["pre_state"] = ordered_json::array({cfg.pre_state.a0().real(), cfg.pre_state.a0().imag(),
                                              cfg.pre_state.a1().real(),
                                              cfg.pre_state.a1().imag()});
    }
    if (cfg.sweep) {
        j["post_select"] = {{"theta_deg_start", cfg.sweep->start_deg},
                            {"theta_deg_stop", cfg.sweep->stop_deg},
                            {"theta_deg_step", cfg.sweep->step_deg}};
    } else if (cfg.post_theta_deg) {
        j["post_select"] = {{"theta_deg", *cfg.post_theta_deg}};
    } else {
        j["post_select"] =
            ordered_json::array({cfg.post_state->a0().real(), cfg.post_state->a0().imag(),
                                 cfg.post_state->a1().real(), cfg.post_state->a1().imag()});
    }
    j["modules"] = ordered_json::array();
    for (const ModuleSpec& m : cfg.modules) {
        j["modules"].push_back({{"observable", m.obs_text}, {"gamma_deg", m.gamma_deg}});
    }
    j["mode"] = cfg.mode == RunMode::Exact ? "exact" : "sampled";
    j["extraction"] = cfg.extraction == Extraction::FirstOrder ? "firstorder" : "exact_pauli";
    j["shots"] = cfg.shots;
    j["seed"] = cfg.seed;
    j["resamples"] = cfg.resamples;
    j["output_path"] = cfg.output_path;
    return j;
}

} // namespace

} // namespace swm
