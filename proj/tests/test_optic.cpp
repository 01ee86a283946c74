#include <doctest.h>

#include <cmath>
#include <vector>

#include "swm/optic.hpp"
#include "swm/rng.hpp"
#include "swm/sampler.hpp"

using namespace swm;

namespace {

const double kDeg = M_PI / 180.0;

Mat2 waveplate_product(std::span<const Element> elements)
{
    Mat2 acc = mat_identity();
    for (const Element& e : elements) {
        if (e.kind == ElementKind::HWP || e.kind == ElementKind::QWP) {
            acc = mat_mul(jones_matrix(e), acc);
        }
    }
    return acc;
}

Mat2 eigen_rotation(const PauliObservable& obs)
{
    auto [vp, vm] = eigenbasis(obs);
    return {vp.a0(), vm.a0(), vp.a1(), vm.a1()};
}

} // namespace

TEST_SUITE("optic")
{
    TEST_CASE("jones_matrix spot values")
    {
        Mat2 h0 = jones_matrix({ElementKind::HWP, 0.0, Arm::Down});
        CHECK(std::abs(h0[0] - 1.0) < 1e-15);
        CHECK(std::abs(h0[3] + 1.0) < 1e-15);

        // HWP at pi/8 prepares (|H> + |V>)/sqrt(2) from |H>.
        Vec2 plus = mat_apply(jones_matrix({ElementKind::HWP, M_PI / 8.0, Arm::Down}),
                              ket_H().amps());
        CHECK(std::abs(plus[0] - 1.0 / std::sqrt(2.0)) < 1e-12);
        CHECK(std::abs(plus[1] - 1.0 / std::sqrt(2.0)) < 1e-12);

        // QWP at pi/4 maps |H> to a circular state (|L> in this convention).
        Vec2 circ = mat_apply(jones_matrix({ElementKind::QWP, M_PI / 4.0, Arm::Down}),
                              ket_H().amps());
        Complex overlap = std::conj(ket_L().a0()) * circ[0] + std::conj(ket_L().a1()) * circ[1];
        CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-12));

        CHECK_THROWS_AS(jones_matrix({ElementKind::BD, 0.0, Arm::Both}), NotAWaveplate);
    }

    TEST_CASE("waveplates are unitary; HWP is Hermitian")
    {
        for (double t : {0.0, 0.2, -0.7, 1.3}) {
            for (ElementKind k : {ElementKind::HWP, ElementKind::QWP}) {
                Mat2 j = jones_matrix({k, t, Arm::Down});
                Mat2 prod = mat_mul(mat_adjoint(j), j);
                CHECK(mat_frobenius_dist(prod, mat_identity()) < 1e-12);
            }
            Mat2 h = jones_matrix({ElementKind::HWP, t, Arm::Down});
            CHECK(mat_frobenius_dist(h, mat_adjoint(h)) < 1e-12);
        }
    }

    TEST_CASE("compile_module uses a single half-wave basis change for planar observables")
    {
        CircuitModule cm = compile_module(sigma_phi(M_PI / 3.0), 25.0 * kDeg,
                                          PointerSetting::Plus);
        REQUIRE(cm.prolog.size() == 1);
        CHECK(cm.prolog[0].kind == ElementKind::HWP);
        CHECK(cm.prolog[0].angle == doctest::Approx(M_PI / 6.0)); // phi/2 with phi = 60 deg
        CHECK(cm.epilog.back().kind == ElementKind::HWP);
        CHECK(cm.epilog.back().angle == doctest::Approx(M_PI / 6.0));
        // core: BD, H17 at pi/4 up, H18 at -g/2 down, H19 at +g/2 up
        REQUIRE(cm.core.size() == 4);
        CHECK(cm.core[0].kind == ElementKind::BD);
        CHECK(cm.core[1].angle == doctest::Approx(M_PI / 4.0));
        CHECK(cm.core[2].angle == doctest::Approx(-12.5 * kDeg));
        CHECK(cm.core[3].angle == doctest::Approx(12.5 * kDeg));
        CHECK_THROWS_AS(compile_module(sigma_z(), 0.1, PointerSetting::Identity),
                        ValidationError);
        CHECK_THROWS_AS(compile_module(sigma_z(), 1.0, PointerSetting::Plus), ValidationError);
    }

    TEST_CASE("verify_module passes on the full grid")
    {
        for (double phi : {0.0, M_PI / 8.0, M_PI / 4.0, M_PI / 3.0}) {
            for (double g : {0.0, 10.0 * kDeg, 25.0 * kDeg, 30.0 * kDeg}) {
                for (PointerSetting s : {PointerSetting::Plus, PointerSetting::Circular}) {
                    PauliObservable obs = sigma_phi(phi);
                    double dev = verify_module(compile_module(obs, g, s), obs, g);
                    CHECK(dev < kOpticVerifyTol);
                }
            }
        }
        for (double g : {10.0 * kDeg, 25.0 * kDeg, 30.0 * kDeg}) {
            for (PointerSetting s : {PointerSetting::Plus, PointerSetting::Circular}) {
                double dev = verify_module(compile_module(sigma_y(), g, s), sigma_y(), g);
                CHECK(dev < kOpticVerifyTol);
            }
        }
    }

    TEST_CASE("verify_module passes for random Bloch directions")
    {
        CounterRng rng(41, 0);
        for (int i = 0; i < 20; i++) {
            PauliObservable obs = PauliObservable::from_direction(
                rng.gaussian(), rng.gaussian(), rng.gaussian());
            double g = rng.uniform() * (M_PI / 4.0);
            PointerSetting s =
                rng.uniform() < 0.5 ? PointerSetting::Plus : PointerSetting::Circular;
            CHECK(verify_module(compile_module(obs, g, s), obs, g) < kOpticVerifyTol);
        }
    }

    TEST_CASE("mid-module composite state matches the quoted form")
    {
        // The quote describes the state after the weak interaction for a
        // photon entering the displacer as alpha|H> + beta|V>.
        double g = 25.0 * kDeg;
        CircuitModule cm = compile_module(sigma_z(), g, PointerSetting::Plus);
        Complex alpha(0.6, 0.0), beta(0.0, 0.8);
        PathState st{alpha, beta, 0.0, 0.0};
        st = apply_elements(cm.core, st);
        // alpha |down> (cos g |H> - sin g |V>) + beta |up> (cos g |H> + sin g |V>)
        CHECK(std::abs(st[0] - alpha * std::cos(g)) < 1e-12);
        CHECK(std::abs(st[1] + alpha * std::sin(g)) < 1e-12);
        CHECK(std::abs(st[2] - beta * std::cos(g)) < 1e-12);
        CHECK(std::abs(st[3] - beta * std::sin(g)) < 1e-12);
    }

    TEST_CASE("simulate_circuit branch structure")
    {
        SUBCASE("empty module is the identity with one branch")
        {
            CircuitModule empty{{}, {}, {}, {}, sigma_z(), 0.0, PointerSetting::Plus};
            auto branches = simulate_circuit(empty, ket_R());
            REQUIRE(branches.size() == 1);
            CHECK(std::abs(branches[0].out[0] - ket_R().a0()) < 1e-15);
            CHECK(std::abs(branches[0].out[1] - ket_R().a1()) < 1e-15);
        }
        SUBCASE("sigma_z module branch norms are (1 +- sin 2g)/2 for |H>")
        {
            double g = 0.3;
            CircuitModule cm = compile_module(sigma_z(), g, PointerSetting::Plus);
            auto branches = simulate_circuit(cm, ket_H());
            REQUIRE(branches.size() == 2);
            double n_plus = norm_sq(branches[0].out);
            double n_minus = norm_sq(branches[1].out);
            CHECK(n_plus == doctest::Approx((1.0 + std::sin(2.0 * g)) / 2.0).epsilon(1e-12));
            CHECK(n_minus == doctest::Approx((1.0 - std::sin(2.0 * g)) / 2.0).epsilon(1e-12));
        }
        SUBCASE("branch norms sum to one for any input")
        {
            CounterRng rng(42, 0);
            for (int i = 0; i < 10; i++) {
                Ket2 in = Ket2::normalized(Complex(rng.gaussian(), rng.gaussian()),
                                           Complex(rng.gaussian(), rng.gaussian()));
                CircuitModule cm =
                    compile_module(sigma_phi(0.9), 0.35, PointerSetting::Circular);
                auto branches = simulate_circuit(cm, in);
                double total = 0.0;
                for (const BranchResult& b : branches) {
                    total += norm_sq(b.out);
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
        SUBCASE("gamma 0 with a pointer-basis analyzer keeps one branch")
        {
            // Hand-assembled module analyzing the pointer in {|0>,|1>}:
            // outcome |0> passes the PBS directly, outcome |1> after a swap.
            CircuitModule cm = compile_module(sigma_z(), 0.0, PointerSetting::Plus);
            cm.analyzer[0].elements = {{ElementKind::PBS, 0.0, Arm::Both}};
            cm.analyzer[1].elements = {{ElementKind::HWP, M_PI / 4.0, Arm::Down},
                                       {ElementKind::HWP, M_PI / 4.0, Arm::Up},
                                       {ElementKind::PBS, 0.0, Arm::Both}};
            auto branches = simulate_circuit(cm, ket_R());
            CHECK(norm_sq(branches[0].out) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(norm_sq(branches[1].out) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(std::abs(branches[0].out[0] - ket_R().a0()) < 1e-12);
            CHECK(std::abs(branches[0].out[1] - ket_R().a1()) < 1e-12);
        }
    }

    TEST_CASE("tampered plates are detected")
    {
        double g = 25.0 * kDeg;
        SUBCASE("a 1-degree error on a coupling plate shows up as Kraus deviation")
        {
            CircuitModule cm = compile_module(sigma_z(), g, PointerSetting::Plus);
            cm.core[2].angle += 1.0 * kDeg; // H18
            CHECK(verify_module(cm, sigma_z(), g) > 1e-3);
        }
        SUBCASE("a 1-degree error on the recombination plate breaks the layout")
        {
            CircuitModule cm = compile_module(sigma_z(), g, PointerSetting::Plus);
            cm.epilog[0].angle += 1.0 * kDeg; // H21
            CHECK_THROWS_AS(verify_module(cm, sigma_z(), g), InvalidLayout);
        }
        SUBCASE("displacing occupied up-arm V light is rejected")
        {
            PathState st{0.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0)};
            std::vector<Element> bd = {{ElementKind::BD, 0.0, Arm::Both}};
            CHECK_THROWS_AS(apply_elements(bd, st), InvalidLayout);
        }
    }

    TEST_CASE("PathSwap exchanges the arms")
    {
        PathState st{1.0, 2.0, 3.0, 4.0};
        std::vector<Element> swap = {{ElementKind::PathSwap, 0.0, Arm::Both}};
        PathState out = apply_elements(swap, st);
        CHECK(out[0] == Complex(3.0, 0.0));
        CHECK(out[1] == Complex(4.0, 0.0));
        CHECK(out[2] == Complex(1.0, 0.0));
        CHECK(out[3] == Complex(2.0, 0.0));
    }

    TEST_CASE("prolog and epilog compose to the eigenbasis rotation")
    {
        for (const PauliObservable& obs :
             {sigma_y(), sigma_phi(M_PI / 3.0),
              PauliObservable::from_direction(0.3, -0.8, 0.5)}) {
            CircuitModule cm = compile_module(obs, 0.2, PointerSetting::Plus);
            Mat2 prolog = waveplate_product(cm.prolog);
            Mat2 v = eigen_rotation(obs);
            CHECK(mat_dist_up_to_phase(prolog, mat_adjoint(v)) < 1e-10);

            // restore part of the epilog: everything after H21, BD, H22
            std::vector<Element> restore(cm.epilog.begin() + 3, cm.epilog.end());
            Mat2 rest = waveplate_product(restore);
            Mat2 sz = observable_matrix(sigma_z());
            Mat2 conj = mat_mul(rest, mat_mul(sz, prolog));
            CHECK(mat_dist_up_to_phase(conj, observable_matrix(obs)) < 1e-10);
        }
    }

    TEST_CASE("compiled three-module pipeline reproduces the sampler distribution")
    {
        double g = 25.0 * kDeg;
        std::vector<PauliObservable> obs = {sigma_y(), sigma_z(), sigma_phi(M_PI / 3.0)};
        std::vector<CircuitModule> mods;
        for (const PauliObservable& o : obs) {
            mods.push_back(compile_module(o, g, PointerSetting::Plus));
        }

        Chain chain{ket_plus(), {{obs[0], g}, {obs[1], g}, {obs[2], g}}, ket_H()};
        MeasurementPlan plan{chain, std::vector<PointerSetting>(3, PointerSetting::Plus), true};
        OutcomeDistribution dist = outcome_distribution(plan);

        Ket2 fail_state = orthogonal(chain.psi_f);
        for (std::size_t tuple = 0; tuple < 8; tuple++) {
            Vec2 v = chain.psi_i.amps();
            for (int k = 0; k < 3; k++) {
                std::size_t branch = (tuple >> k) & 1 ? 1 : 0;
                v = mat_apply(simulated_kraus(mods[k], branch), v);
            }
            Complex pass_amp =
                std::conj(chain.psi_f.a0()) * v[0] + std::conj(chain.psi_f.a1()) * v[1];
            Complex fail_amp =
                std::conj(fail_state.a0()) * v[0] + std::conj(fail_state.a1()) * v[1];
            CHECK(std::abs(std::norm(pass_amp) - dist.p[tuple << 1]) < 1e-10);
            CHECK(std::abs(std::norm(fail_amp) - dist.p[(tuple << 1) | 1]) < 1e-10);
        }
    }

    TEST_CASE("export_circuit golden file for the sigma_z module")
    {
        CircuitModule cm = compile_module(sigma_z(), 25.0 * kDeg, PointerSetting::Plus);
        std::string expected = "# prolog\n"
                               "HWP 0.0 down\n"
                               "# core\n"
                               "BD 0.0 both\n"
                               "HWP 45.0 up\n"
                               "HWP -12.5 down\n"
                               "HWP 12.5 up\n"
                               "# analyzer +1\n"
                               "QWP -45.0 down\n"
                               "QWP -45.0 up\n"
                               "HWP -22.5 down\n"
                               "HWP -22.5 up\n"
                               "PBS 0.0 both\n"
                               "# analyzer -1\n"
                               "QWP 45.0 down\n"
                               "QWP 45.0 up\n"
                               "HWP 22.5 down\n"
                               "HWP 22.5 up\n"
                               "PBS 0.0 both\n"
                               "# epilog\n"
                               "HWP 45.0 down\n"
                               "BD 0.0 both\n"
                               "HWP 45.0 up\n"
                               "HWP 0.0 up\n";
        CHECK(export_circuit(cm) == expected);
    }
}
