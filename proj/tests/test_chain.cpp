#include <doctest.h>

#include <cmath>
#include <vector>

#include "swm/chain.hpp"
#include "swm/rng.hpp"

using namespace swm;

namespace {

PauliObservable random_obs(CounterRng& rng)
{
    return PauliObservable::from_direction(rng.gaussian(), rng.gaussian(), rng.gaussian());
}

Ket2 random_ket(CounterRng& rng)
{
    return Ket2::normalized(Complex(rng.gaussian(), rng.gaussian()),
                            Complex(rng.gaussian(), rng.gaussian()));
}

double state_dist(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); i++) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

// Test-side tensor-product oracle for factorized states.
std::vector<Complex> kron(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    std::vector<Complex> out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); i++) {
        for (std::size_t j = 0; j < b.size(); j++) {
            out[i * b.size() + j] = a[i] * b[j];
        }
    }
    return out;
}

} // namespace

TEST_SUITE("chain")
{
    TEST_CASE("coupling_unitary at gamma 0 is the identity")
    {
        Mat4 u = coupling_unitary(sigma_z(), 0.0);
        for (int r = 0; r < 4; r++) {
            for (int c = 0; c < 4; c++) {
                CHECK(std::abs(u[r * 4 + c] - (r == c ? 1.0 : 0.0)) < 1e-15);
            }
        }
    }

    TEST_CASE("coupling_unitary rotates the pointer per sigma_z eigenvalue")
    {
        double g = 0.37;
        Mat4 u = coupling_unitary(sigma_z(), g);
        // |H>|0> -> |H> (cos |0> + sin |1>)
        CHECK(std::abs(u[0 * 4 + 0] - std::cos(g)) < 1e-14);
        CHECK(std::abs(u[1 * 4 + 0] - std::sin(g)) < 1e-14);
        CHECK(std::abs(u[2 * 4 + 0]) < 1e-14);
        CHECK(std::abs(u[3 * 4 + 0]) < 1e-14);
        // |V>|0> -> |V> (cos |0> - sin |1>)
        CHECK(std::abs(u[2 * 4 + 2] - std::cos(g)) < 1e-14);
        CHECK(std::abs(u[3 * 4 + 2] + std::sin(g)) < 1e-14);
    }

    TEST_CASE("coupling_unitary is unitary for random observables")
    {
        CounterRng rng(11, 0);
        for (int i = 0; i < 25; i++) {
            Mat4 u = coupling_unitary(random_obs(rng), rng.uniform() * (M_PI / 4.0));
            for (int r = 0; r < 4; r++) {
                for (int c = 0; c < 4; c++) {
                    Complex dot(0.0, 0.0);
                    for (int k = 0; k < 4; k++) {
                        dot += std::conj(u[k * 4 + r]) * u[k * 4 + c];
                    }
                    CHECK(std::abs(dot - (r == c ? 1.0 : 0.0)) < 1e-12);
                }
            }
        }
    }

    TEST_CASE("evolve spot checks")
    {
        SUBCASE("gamma 0 leaves psi (x) |0>")
        {
            Chain chain{ket_plus(), {{sigma_y(), 0.0}}, ket_H()};
            JointState js = evolve(chain);
            CHECK(std::abs(js.amps[0] - ket_plus().a0()) < 1e-15);
            CHECK(std::abs(js.amps[2] - ket_plus().a1()) < 1e-15);
            CHECK(std::abs(js.amps[1]) < 1e-15);
            CHECK(std::abs(js.amps[3]) < 1e-15);
        }
        SUBCASE("sigma_z eigenstate input factorizes")
        {
            double g = 0.31;
            Chain chain{ket_H(), {{sigma_z(), g}}, ket_H()};
            JointState js = evolve(chain);
            std::vector<Complex> want =
                kron({1.0, 0.0}, {std::cos(g), std::sin(g)});
            CHECK(state_dist(js.amps, want) < 1e-14);
        }
        SUBCASE("two sigma_z modules factorize into both pointers")
        {
            double g = 0.22;
            Chain chain{ket_H(), {{sigma_z(), g}, {sigma_z(), g}}, ket_H()};
            JointState js = evolve(chain);
            std::vector<Complex> pointer = {std::cos(g), std::sin(g)};
            std::vector<Complex> want = kron(kron({1.0, 0.0}, pointer), pointer);
            CHECK(state_dist(js.amps, want) < 1e-14);
        }
    }

    TEST_CASE("evolve output stays normalized")
    {
        CounterRng rng(12, 0);
        for (int i = 0; i < 10; i++) {
            Chain chain{random_ket(rng), {}, ket_H()};
            int n = 1 + static_cast<int>(rng.uniform() * 5.0);
            for (int k = 0; k < n; k++) {
                chain.modules.push_back({random_obs(rng), rng.uniform() * (M_PI / 4.0)});
            }
            JointState js = evolve(chain);
            double nsq = 0.0;
            for (const Complex& a : js.amps) {
                nsq += std::norm(a);
            }
            CHECK(std::abs(nsq - 1.0) < 1e-12);
        }
    }

    TEST_CASE("serial and parallel kernels agree bit for bit")
    {
        CounterRng rng(13, 0);
        Chain chain{random_ket(rng), {}, ket_H()};
        for (int k = 0; k < 7; k++) {
            chain.modules.push_back({random_obs(rng), rng.uniform() * (M_PI / 4.0)});
        }
        JointState a = evolve(chain, Exec::Serial);
        JointState b = evolve(chain, Exec::Parallel);
        for (std::size_t i = 0; i < a.amps.size(); i++) {
            CHECK(a.amps[i] == b.amps[i]);
        }
    }

    TEST_CASE("evolve rejects bad chains")
    {
        Chain too_long{ket_plus(), std::vector<WeakModule>(13, {sigma_z(), 0.1}), ket_H()};
        CHECK_THROWS_AS(evolve(too_long), ChainTooLong);
        Chain empty{ket_plus(), {}, ket_H()};
        CHECK_THROWS_AS(evolve(empty), ValidationError);
        Chain bad_gamma{ket_plus(), {{sigma_z(), 1.0}}, ket_H()};
        CHECK_THROWS_AS(evolve(bad_gamma), ValidationError);
    }

    TEST_CASE("post_select spot checks")
    {
        SUBCASE("gamma 0: norm is the overlap squared")
        {
            Chain chain{ket_plus(), {{sigma_z(), 0.0}, {sigma_y(), 0.0}}, ket_H()};
            PointerState ps = post_select(evolve(chain), ket_H());
            CHECK(ps.norm_sq == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(std::abs(ps.amps[0]) == doctest::Approx(std::sqrt(0.5)));
            for (std::size_t i = 1; i < ps.amps.size(); i++) {
                CHECK(std::abs(ps.amps[i]) < 1e-15);
            }
        }
        SUBCASE("post-selecting the pre state at gamma 0 keeps everything")
        {
            Chain chain{ket_plus(), {{sigma_z(), 0.0}}, ket_plus()};
            PointerState ps = post_select(evolve(chain), ket_plus());
            CHECK(ps.norm_sq == doctest::Approx(1.0).epsilon(1e-12));
        }
        SUBCASE("single sigma_z module, W = 1 chain")
        {
            double g = 0.29;
            Chain chain{ket_plus(), {{sigma_z(), g}}, ket_H()};
            PointerState ps = post_select(evolve(chain), ket_H());
            CHECK(ps.norm_sq == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(std::abs(ps.amps[0] - std::cos(g) / std::sqrt(2.0)) < 1e-14);
            CHECK(std::abs(ps.amps[1] - std::sin(g) / std::sqrt(2.0)) < 1e-14);
        }
    }

    TEST_CASE("pointer_joint_expectation matches the exact single-Pauli response")
    {
        double g = 25.0 * M_PI / 180.0;
        Chain chain{ket_plus(), {{sigma_z(), g}}, ket_H()};
        PointerState ps = post_select(evolve(chain), ket_H());
        std::vector<PointerSetting> plus = {PointerSetting::Plus};
        std::vector<PointerSetting> circ = {PointerSetting::Circular};
        std::vector<PointerSetting> iden = {PointerSetting::Identity};
        CHECK(pointer_joint_expectation(ps, plus) ==
              doctest::Approx(std::sin(2.0 * g)).epsilon(1e-12));
        CHECK(pointer_joint_expectation(ps, circ) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(pointer_joint_expectation(ps, iden) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("pointer_joint_expectation error paths")
    {
        double g = 0.3;
        Chain chain{ket_plus(), {{sigma_z(), g}}, ket_H()};
        PointerState ps = post_select(evolve(chain), ket_H());
        std::vector<PointerSetting> wrong = {PointerSetting::Plus, PointerSetting::Plus};
        CHECK_THROWS_AS(pointer_joint_expectation(ps, wrong), MissingSetting);

        // Orthogonal post-selection of a gamma = 0 chain leaves nothing.
        Chain zero{ket_plus(), {{sigma_z(), 0.0}}, ket_minus()};
        PointerState dead = post_select(evolve(zero), ket_minus());
        std::vector<PointerSetting> plus = {PointerSetting::Plus};
        CHECK_THROWS_AS(pointer_joint_expectation(dead, plus), ZeroPostSelection);
    }

    TEST_CASE("expectation values stay in [-1, 1]")
    {
        CounterRng rng(14, 0);
        for (int i = 0; i < 25; i++) {
            int n = 1 + static_cast<int>(rng.uniform() * 3.0);
            Chain chain{random_ket(rng), {}, random_ket(rng)};
            std::vector<PointerSetting> settings;
            for (int k = 0; k < n; k++) {
                chain.modules.push_back({random_obs(rng), rng.uniform() * (M_PI / 4.0)});
                double u = rng.uniform();
                settings.push_back(u < 0.4   ? PointerSetting::Plus
                                   : u < 0.8 ? PointerSetting::Circular
                                             : PointerSetting::Identity);
            }
            PointerState ps = post_select(evolve(chain), chain.psi_f);
            if (ps.norm_sq <= kZeroPostSelectionTol) {
                continue;
            }
            double e = pointer_joint_expectation(ps, settings);
            CHECK(e <= 1.0 + 1e-12);
            CHECK(e >= -1.0 - 1e-12);
        }
    }

    TEST_CASE("kraus_branch spot values")
    {
        WeakModule off{sigma_z(), 0.0};
        Mat2 k0 = kraus_branch(off, ket_H());
        CHECK(std::abs(k0[0] - 1.0) < 1e-15);
        CHECK(std::abs(k0[3] - 1.0) < 1e-15);
        Mat2 k1 = kraus_branch(off, ket_V());
        for (int i = 0; i < 4; i++) {
            CHECK(std::abs(k1[i]) < 1e-15);
        }

        double g = 0.41;
        Mat2 kp = kraus_branch({sigma_z(), g}, ket_plus());
        double r = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(kp[0] - r * (std::cos(g) + std::sin(g))) < 1e-14);
        CHECK(std::abs(kp[3] - r * (std::cos(g) - std::sin(g))) < 1e-14);
        CHECK(std::abs(kp[1]) < 1e-15);
    }

    TEST_CASE("Kraus completeness over random modules and outcome bases")
    {
        CounterRng rng(15, 0);
        for (int i = 0; i < 40; i++) {
            WeakModule mod{random_obs(rng), rng.uniform() * (M_PI / 4.0)};
            Ket2 v = random_ket(rng);
            Mat2 ka = kraus_branch(mod, v);
            Mat2 kb = kraus_branch(mod, orthogonal(v));
            Mat2 sum = mat_add(mat_mul(mat_adjoint(ka), ka), mat_mul(mat_adjoint(kb), kb));
            CHECK(std::abs(sum[0] - 1.0) < 1e-12);
            CHECK(std::abs(sum[3] - 1.0) < 1e-12);
            CHECK(std::abs(sum[1]) < 1e-12);
            CHECK(std::abs(sum[2]) < 1e-12);
        }
    }

    TEST_CASE("non-commuting order matters, commuting order does not")
    {
        double g = 0.3;
        Chain yz{ket_plus(), {{sigma_y(), g}, {sigma_z(), g}}, ket_H()};
        Chain zy{ket_plus(), {{sigma_z(), g}, {sigma_y(), g}}, ket_H()};
        CHECK(state_dist(evolve(yz).amps, evolve(zy).amps) > 1e-3);

        // Commuting pair: sigma_z and -sigma_z with distinct strengths.
        PauliObservable minus_z(0.0, 0.0, -1.0);
        Chain ab{ket_plus(), {{sigma_z(), 0.2}, {minus_z, 0.35}}, ket_H()};
        Chain ba{ket_plus(), {{minus_z, 0.35}, {sigma_z(), 0.2}}, ket_H()};
        PointerState pa = post_select(evolve(ab), ket_H());
        PointerState pb = post_select(evolve(ba), ket_H());
        std::vector<PointerSetting> s_ab = {PointerSetting::Plus, PointerSetting::Circular};
        std::vector<PointerSetting> s_ba = {PointerSetting::Circular, PointerSetting::Plus};
        CHECK(pointer_joint_expectation(pa, s_ab) ==
              doctest::Approx(pointer_joint_expectation(pb, s_ba)).epsilon(1e-12));
        CHECK(pa.norm_sq == doctest::Approx(pb.norm_sq).epsilon(1e-12));
    }

    TEST_CASE("gamma = 0 modules are exact identities")
    {
        double g = 0.33;
        Chain bare{ket_plus(), {{sigma_y(), g}, {sigma_phi(1.1), g}}, ket_H()};
        Chain padded{ket_plus(),
                     {{sigma_z(), 0.0}, {sigma_y(), g}, {sigma_x(), 0.0}, {sigma_phi(1.1), g},
                      {sigma_y(), 0.0}},
                     ket_H()};
        PointerState pb = post_select(evolve(bare), ket_H());
        PointerState pp = post_select(evolve(padded), ket_H());
        CHECK(pb.norm_sq == doctest::Approx(pp.norm_sq).epsilon(1e-12));

        std::vector<PointerSetting> sb = {PointerSetting::Plus, PointerSetting::Circular};
        std::vector<PointerSetting> sp = {PointerSetting::Identity, PointerSetting::Plus,
                                          PointerSetting::Identity, PointerSetting::Circular,
                                          PointerSetting::Identity};
        CHECK(pointer_joint_expectation(pb, sb) ==
              doctest::Approx(pointer_joint_expectation(pp, sp)).epsilon(1e-12));
    }

    TEST_CASE("weak-coupling limit: post-selected pointer approaches the AAV form")
    {
        // || Phi_exact - <f|i> exp(-i g W sigma_y)|0> || = O(g^2), checked by
        // halving g and expecting >= 3.9x error reduction.
        Ket2 psi_i = ket_plus();
        Ket2 psi_f = Ket2::normalized(0.9, Complex(0.1, 0.4));
        PauliObservable obs = sigma_y();

        Complex denom = inner(psi_f, psi_i);
        Complex num = inner(psi_f.amps(), mat_apply(observable_matrix(obs), psi_i.amps()));
        Complex w = num / denom;

        auto err = [&](double g) {
            Chain chain{psi_i, {{obs, g}}, psi_f};
            PointerState ps = post_select(evolve(chain), psi_f);
            // exp(-i g W sigma_y)|0> = (cos(gW), sin(gW)) for complex gW
            Complex z = g * w;
            Complex a0 = denom * std::cos(z);
            Complex a1 = denom * std::sin(z);
            return std::sqrt(std::norm(ps.amps[0] - a0) + std::norm(ps.amps[1] - a1));
        };
        CHECK(err(0.08) / err(0.04) >= 3.9);
        CHECK(err(0.04) / err(0.02) >= 3.9);
    }
}
