#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swm/config.hpp"
#include "swm/sweep.hpp"

using namespace swm;

namespace {

const char* kFig2Config = R"({
  "pre_state": "plus",
  "post_select": {"theta_deg_start": 0, "theta_deg_stop": 180, "theta_deg_step": 5},
  "modules": [
    {"observable": "sy", "gamma_deg": 25.0},
    {"observable": "sz", "gamma_deg": 25.0},
    {"observable": "sigma_phi:60", "gamma_deg": 25.0}
  ],
  "mode": "exact",
  "extraction": "exact_pauli",
  "shots": 1000000,
  "seed": 1,
  "resamples": 200,
  "output_path": "fig2.csv"
})";

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_exact_config()
{
    RunConfig cfg = parse_config(R"({
      "pre_state": "plus",
      "post_select": {"theta_deg_start": 0, "theta_deg_stop": 180, "theta_deg_step": 45},
      "modules": [{"observable": "sz", "gamma_deg": 25.0}],
      "mode": "exact"
    })");
    return cfg;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("parse_config accepts the shipped experiment description")
    {
        RunConfig cfg = parse_config(kFig2Config);
        CHECK(cfg.pre_text == "plus");
        REQUIRE(cfg.modules.size() == 3);
        CHECK(cfg.modules[0].obs.ny() == doctest::Approx(1.0));
        CHECK(cfg.modules[1].obs.nz() == doctest::Approx(1.0));
        CHECK(cfg.modules[2].obs.nx() == doctest::Approx(std::sqrt(3.0) / 2.0));
        CHECK(cfg.modules[2].gamma == doctest::Approx(25.0 * M_PI / 180.0));
        REQUIRE(cfg.sweep.has_value());
        CHECK(cfg.sweep->step_deg == 5.0);
        CHECK(cfg.mode == RunMode::Exact);
        CHECK(cfg.extraction == Extraction::ExactPauli);
        CHECK(cfg.shots == 1000000);
        CHECK(cfg.output_path == "fig2.csv");
    }

    TEST_CASE("parse_config rejects bad inputs")
    {
        CHECK_THROWS_AS(parse_config("{"), ParseError);
        try {
            parse_config("{\n\n  \"pre_state\": garbage\n}");
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }

        CHECK_THROWS_AS(
            parse_config(R"({"pre_state":"plus","post_select":{"theta_deg":0},
                             "modules":[{"observable":"sz","gamma_deg":-5}]})"),
            ValidationError);
        CHECK_THROWS_AS(parse_config(R"({"pre_state":"plus","post_select":{"theta_deg":0},
                                         "modules":[]})"),
                        ValidationError);
        CHECK_THROWS_AS(parse_config(R"({"pre_state":"plus","post_select":{"theta_deg":0},
                                         "modules":[{"observable":"sz","gamma_deg":5}],
                                         "bogus": 1})"),
                        ValidationError);
        CHECK_THROWS_AS(parse_config(R"({"post_select":{"theta_deg":0},
                                         "modules":[{"observable":"sz","gamma_deg":5}]})"),
                        ValidationError);
        CHECK_THROWS_AS(
            parse_config(R"({"pre_state":"plus","post_select":{"theta_deg":0},
                             "modules":[{"observable":"blorp","gamma_deg":5}]})"),
            ValidationError);
        CHECK_THROWS_AS(
            parse_config(R"({"pre_state":"plus","post_select":{"theta_deg":0},
                             "modules":[{"observable":"sz","gamma_deg":5}],
                             "mode":"sampled","shots":100})"),
            ValidationError);
    }

    TEST_CASE("parse_config accepts explicit states and bloch observables")
    {
        RunConfig cfg = parse_config(R"({
          "pre_state": [1, 0, 1, 0],
          "post_select": [0.6, 0, 0.8, 0],
          "modules": [{"observable": "bloch:0,0,2", "gamma_deg": 10}]
        })");
        CHECK(cfg.pre_state.a0().real() == doctest::Approx(1.0 / std::sqrt(2.0)));
        REQUIRE(cfg.post_state.has_value());
        CHECK(cfg.post_state->a1().real() == doctest::Approx(0.8));
        CHECK(cfg.modules[0].obs.nz() == doctest::Approx(1.0));
    }

    TEST_CASE("run_sweep exact mode matches the oracle row by row")
    {
        RunConfig cfg = small_exact_config();
        SweepResult res = run_sweep(cfg);
        REQUIRE(res.rows.size() == 5); // 0, 45, 90, 135, 180

        for (const SweepRow& row : res.rows) {
            if (row.theta_deg == 135.0) {
                CHECK(row.flags == "divergent");
                CHECK_FALSE(row.has_est);
                CHECK_FALSE(row.has_oracle);
                continue;
            }
            CHECK(row.flags.empty());
            REQUIRE(row.has_est);
            CHECK(std::abs(row.est.real() - row.oracle.real()) < 1e-9);
            CHECK(std::abs(row.est.imag() - row.oracle.imag()) < 1e-9);
        }
        // theta = 45: psi_f = psi_i = |+>, so <sz>_w = 0
        CHECK(res.rows[1].oracle.real() == doctest::Approx(0.0).epsilon(1e-12));
        // theta = 0: W = 1
        CHECK(res.rows[0].oracle.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.rows[0].p_pass == doctest::Approx(0.5).epsilon(1e-9));
    }

    TEST_CASE("run_sweep first-order extraction converges with gamma")
    {
        auto err_at = [](double gamma_deg) {
            RunConfig cfg = small_exact_config();
            cfg.extraction = Extraction::FirstOrder;
            cfg.modules[0].gamma = gamma_deg * M_PI / 180.0;
            cfg.modules[0].gamma_deg = gamma_deg;
            SweepResult res = run_sweep(cfg);
            double worst = 0.0;
            for (const SweepRow& row : res.rows) {
                if (!row.has_est) {
                    continue;
                }
                worst = std::max(worst, std::abs(row.est - row.oracle));
            }
            return worst;
        };
        CHECK(err_at(2.0) < err_at(10.0) / 5.0);
    }

    TEST_CASE("sampled sweep rows carry uncertainties and pass counts")
    {
        RunConfig cfg = small_exact_config();
        cfg.mode = RunMode::Sampled;
        cfg.shots = 20000;
        cfg.resamples = 100;
        cfg.seed = 9;
        SweepResult res = run_sweep(cfg);
        int with_est = 0;
        for (const SweepRow& row : res.rows) {
            if (row.flags == "divergent") {
                continue;
            }
            REQUIRE(row.has_est);
            CHECK(row.has_sd);
            CHECK(row.has_n_pass);
            CHECK(row.n_pass > 0);
            CHECK(std::abs(row.est.real() - row.oracle.real()) <
                  std::max(5.0 * row.re_sd, 5e-2));
            with_est++;
        }
        CHECK(with_est == 4);
    }

    TEST_CASE("write_output emits the documented CSV header and is byte-stable")
    {
        RunConfig cfg = small_exact_config();
        SweepResult res = run_sweep(cfg);
        auto dir = std::filesystem::temp_directory_path();
        auto p1 = dir / "swm_test_out1.csv";
        auto p2 = dir / "swm_test_out2.csv";
        write_output(cfg, res, p1.string());
        write_output(cfg, run_sweep(cfg), p2.string());

        std::string text = slurp(p1);
        CHECK(text.rfind("theta_deg,re_oracle,im_oracle,re_est,im_est,re_err,im_err,p_pass,"
                         "n_pass,re_sd,im_sd,flags\n",
                         0) == 0);
        CHECK(text == slurp(p2));

        // exact mode leaves n_pass and the sd columns empty
        std::istringstream lines(text);
        std::string header, first;
        std::getline(lines, header);
        std::getline(lines, first);
        CHECK(first.find(",,,") != std::string::npos);

        std::string side = slurp(dir / "swm_test_out1.json");
        CHECK(side.find("\"version\"") != std::string::npos);
        CHECK(side.find("\"seed\": 1") != std::string::npos);
        CHECK(side == slurp(dir / "swm_test_out2.json"));

        CHECK_THROWS_AS(write_output(cfg, SweepResult{}, p1.string()), ValidationError);
        CHECK_THROWS_AS(write_output(cfg, res, "/nonexistent-dir/x.csv"), IoError);
    }

    TEST_CASE("divergent rows never contain SWV numbers")
    {
        RunConfig cfg = small_exact_config();
        SweepResult res = run_sweep(cfg);
        auto dir = std::filesystem::temp_directory_path();
        auto p = dir / "swm_test_divergent.csv";
        write_output(cfg, res, p.string());
        std::istringstream lines(slurp(p));
        std::string line;
        bool saw_divergent = false;
        while (std::getline(lines, line)) {
            if (line.find("divergent") != std::string::npos) {
                saw_divergent = true;
                CHECK(line.rfind("135,,,,,,,", 0) == 0);
            }
        }
        CHECK(saw_divergent);
    }

    TEST_CASE("config_to_json round-trips through the parser")
    {
        RunConfig cfg = parse_config(kFig2Config);
        std::string dumped = config_to_json(cfg);
        RunConfig again = parse_config(dumped);
        CHECK(again.modules.size() == cfg.modules.size());
        CHECK(again.shots == cfg.shots);
        CHECK(again.sweep->stop_deg == cfg.sweep->stop_deg);
        CHECK(config_to_json(again) == dumped);
    }
}
