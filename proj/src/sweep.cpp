#include "swm/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "swm/sampler.hpp"

namespace swm {

namespace {

constexpr double kDivergenceTol = 1e-6;

struct Point {
    Ket2 psi_f;
    double theta_deg;
    bool has_theta;
};

std::vector<Point> sweep_points(const RunConfig& cfg)
{
    std::vector<Point> pts;
    if (cfg.sweep) {
        int steps = static_cast<int>(
            std::floor((cfg.sweep->stop_deg - cfg.sweep->start_deg) / cfg.sweep->step_deg + 1e-9));
        for (int i = 0; i <= steps; i++) {
            double deg = cfg.sweep->start_deg + i * cfg.sweep->step_deg;
            double rad = deg * M_PI / 180.0;
            pts.push_back({Ket2::normalized(std::cos(rad), std::sin(rad)), deg, true});
        }
    } else {
        pts.push_back({*cfg.post_state, cfg.post_theta_deg.value_or(0.0),
                       cfg.post_theta_deg.has_value()});
    }
    return pts;
}

} // namespace

SweepResult run_sweep(const RunConfig& cfg)
{
    std::vector<WeakModule> modules;
    std::vector<PauliObservable> obs_list;
    for (const ModuleSpec& m : cfg.modules) {
        modules.push_back({m.obs, m.gamma});
        obs_list.push_back(m.obs);
    }
    const std::uint32_t full_mask = (1u << modules.size()) - 1;

    // Theta-independent part of the exact pipeline.
    SubsetStates states(cfg.pre_state, modules);

    std::vector<Point> pts = sweep_points(cfg);
    SweepResult result;
    result.rows.resize(pts.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pts.size()); i++) {
        SweepRow& row = result.rows[i];
        const Point& pt = pts[i];
        row.theta_deg = pt.theta_deg;
        row.has_theta = pt.has_theta;

        PointerState full = post_select(states.state(full_mask), pt.psi_f);
        row.p_pass = full.norm_sq;
        row.has_p_pass = true;

        if (std::abs(inner(pt.psi_f, cfg.pre_state)) <= kDivergenceTol) {
            row.flags = "divergent";
            continue;
        }

        try {
            row.oracle = weak_value_oracle(cfg.pre_state, pt.psi_f, obs_list);
            row.has_oracle = true;
        } catch (const Error&) {
            row.flags = "divergent";
            continue;
        }

        try {
            if (cfg.mode == RunMode::Exact) {
                MeasureFn measure = [&](std::uint32_t mask,
                                        std::span<const PointerSetting> plus_s,
                                        std::span<const PointerSetting> odd_s) {
                    return measure_exact(states, mask, pt.psi_f, plus_s, odd_s);
                };
                Chain chain{cfg.pre_state, modules, pt.psi_f};
                SwvTable table = extract_hierarchy(chain, measure, cfg.extraction);
                row.est = table.w[full_mask];
                row.has_est = true;
            } else {
                Chain chain{cfg.pre_state, modules, pt.psi_f};
                SwvEstimate est = estimate_swv_pipeline(chain, cfg.shots, cfg.seed,
                                                        cfg.resamples, cfg.extraction,
                                                        static_cast<std::uint64_t>(i));
                row.est = est.swv.value;
                row.has_est = true;
                row.re_sd = est.re_sd;
                row.im_sd = est.im_sd;
                row.has_sd = true;
                row.n_pass = est.n_pass_min;
                row.has_n_pass = true;
                row.p_pass = est.pass_fraction_full;
            }
        } catch (const Error& err) {
            row.flags = std::string("failed:") + err.what();
        }
    }
    return result;
}

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string sidecar_path(const std::string& path)
{
    std::size_t slash = path.find_last_of('/');
    std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + ".json";
    }
    return path.substr(0, dot) + ".json";
}

} // namespace

void write_output(const RunConfig& cfg, const SweepResult& result, const std::string& path)
{
    if (result.rows.empty()) {
        throw ValidationError("write_output: empty result table");
    }
    std::string csv =
        "theta_deg,re_oracle,im_oracle,re_est,im_est,re_err,im_err,p_pass,n_pass,re_sd,im_sd,"
        "flags\n";
    for (const SweepRow& row : result.rows) {
        csv += row.has_theta ? fmt(row.theta_deg) : "";
        csv += ',';
        if (row.has_oracle) {
            csv += fmt(row.oracle.real()) + "," + fmt(row.oracle.imag()) + ",";
        } else {
            csv += ",,";
        }
        if (row.has_est && row.has_oracle) {
            csv += fmt(row.est.real()) + "," + fmt(row.est.imag()) + ",";
            csv += fmt(std::abs(row.est.real() - row.oracle.real())) + "," +
                   fmt(std::abs(row.est.imag() - row.oracle.imag())) + ",";
        } else {
            csv += ",,,,";
        }
        csv += row.has_p_pass ? fmt(row.p_pass) : "";
        csv += ',';
        csv += row.has_n_pass ? std::to_string(row.n_pass) : "";
        csv += ',';
        if (row.has_sd) {
            csv += fmt(row.re_sd) + "," + fmt(row.im_sd) + ",";
        } else {
            csv += ",,";
        }
        csv += row.flags;
        csv += '\n';
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("write_output: cannot open " + path);
    }
    out << csv;
    if (!out) {
        throw IoError("write_output: write failed for " + path);
    }
    out.close();

    std::string side = sidecar_path(path);
    std::ofstream meta(side, std::ios::binary);
    if (!meta) {
        throw IoError("write_output: cannot open " + side);
    }
    meta << sidecar_json(cfg);
    if (!meta) {
        throw IoError("write_output: write failed for " + side);
    }
}

} // namespace swm
