#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/thermo_sim.hpp"
#include "vbnet/vb_core.hpp"

using namespace vbnet;

namespace {

const AcUnitSpec kAc1 = default_fleet(4).units[0];

/// Euler-integrated closed-loop run with one substep per hour.
Trajectory euler_run(const AcUnitSpec& unit, int days, std::uint64_t seed) {
    SimOptions opts;
    opts.substeps = 1;
    opts.integrator = Integrator::Euler;
    return simulate_unit(unit, synth_env(days, seed), 0.5 * (unit.T_min + unit.T_max), opts);
}

std::vector<double> start_states(const Trajectory& tr) {
    std::vector<double> s(tr.size());
    s[0] = tr.T_init;
    for (std::size_t k = 1; k < tr.size(); ++k) s[k] = tr.T_in[k - 1];
    return s;
}

}  // namespace

TEST(SocMapping, Examples) {
    EXPECT_DOUBLE_EQ(soc_from_temp(24.0, 21.0, 24.0), 0.0);
    EXPECT_DOUBLE_EQ(soc_from_temp(21.0, 21.0, 24.0), 1.0);
    EXPECT_DOUBLE_EQ(soc_from_temp(22.5, 21.0, 24.0), 0.5);
    EXPECT_DOUBLE_EQ(soc_from_temp(25.0, 21.0, 24.0), 0.0);
    EXPECT_DOUBLE_EQ(soc_from_temp(19.0, 21.0, 24.0), 1.0);
    EXPECT_DOUBLE_EQ(temp_from_soc(0.25, 21.0, 24.0), 23.25);
}

TEST(SocMapping, Errors) {
    EXPECT_THROW(soc_from_temp(22.0, 24.0, 24.0), DomainError);
    EXPECT_THROW(soc_from_temp(22.0, 25.0, 24.0), DomainError);
    EXPECT_THROW(temp_from_soc(1.2, 21.0, 24.0), DomainError);
    EXPECT_THROW(temp_from_soc(-0.1, 21.0, 24.0), DomainError);
    EXPECT_THROW(temp_from_soc(0.5, 24.0, 24.0), DomainError);
}

TEST(SocMapping, RoundTripOverBand) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lo(15.0, 25.0), width(0.5, 6.0), u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = lo(rng), b = a + width(rng);
        const double S = u(rng);
        EXPECT_NEAR(soc_from_temp(temp_from_soc(S, a, b), a, b), S, 1e-12);
        const double T = a + (b - a) * u(rng);
        EXPECT_NEAR(temp_from_soc(soc_from_temp(T, a, b), a, b), T, 1e-12);
    }
}

TEST(SocMapping, MonotoneDecreasingInTemperature) {
    double prev = 2.0;
    for (double T = 20.0; T <= 25.0; T += 0.05) {
        const double S = soc_from_temp(T, 21.0, 24.0);
        EXPECT_LE(S, prev);
        prev = S;
    }
}

TEST(OracleParams, CapacityAndLossExamples) {
    EXPECT_DOUBLE_EQ(oracle_capacity(kAc1), 5.4e7);
    const std::vector<double> T_out = {30.0, 24.0, 20.0};
    const std::vector<double> T_state = {24.0, 24.0, 23.0};
    const VbParams p = oracle_params(kAc1, T_out, T_state);
    EXPECT_DOUBLE_EQ(p.C_f, 5.4e7);
    ASSERT_EQ(p.P_loss.size(), 3u);
    EXPECT_DOUBLE_EQ(p.P_loss[0], 2.0);
    EXPECT_DOUBLE_EQ(p.P_loss[1], 0.0);
    EXPECT_DOUBLE_EQ(p.P_loss[2], -1.0);
    EXPECT_TRUE(std::isnan(p.gamma));
}

TEST(OracleParams, CapacityIgnoresDrivers) {
    const VbParams a = oracle_params(kAc1, std::vector<double>{30.0}, std::vector<double>{22.0});
    const VbParams b = oracle_params(kAc1, std::vector<double>{40.0, 10.0},
                                     std::vector<double>{21.0, 23.0});
    EXPECT_EQ(a.C_f, b.C_f);
    EXPECT_THROW(oracle_params(kAc1, std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}),
                 DomainError);
}

TEST(VbStep, ReferenceValues) {
    // 3600·(0.97·12 − 2)·1000 / 5.4e7
    const double delta = 3600.0 * (0.97 * 12.0 - 2.0) * 1000.0 / 5.4e7;
    EXPECT_NEAR(delta, 0.64267, 1e-5);
    EXPECT_DOUBLE_EQ(vb_step(0.5, 12.0, 2.0, 5.4e7, 0.97, 3600.0), 1.0);
    EXPECT_NEAR(vb_step(0.2, 12.0, 2.0, 5.4e7, 0.97, 3600.0), 0.2 + delta, 1e-12);
    EXPECT_NEAR(vb_step(0.2, 12.0, 2.0, 5.4e7, 0.97, 3600.0), 0.84267, 1e-5);
    EXPECT_DOUBLE_EQ(vb_step(0.1, 0.0, 5.0, 5.4e7, 0.97, 3600.0), 0.0);
    EXPECT_DOUBLE_EQ(vb_step(0.4, 0.0, 0.0, 5.4e7, 0.97, 3600.0), 0.4);
}

TEST(VbStep, OutputInUnitIntervalAndMonotone) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> S(0.0, 1.0), P(0.0, 15.0), L(-6.0, 6.0), C(1e7, 2e8);
    for (int i = 0; i < 2000; ++i) {
        const double s = S(rng), p = P(rng), l = L(rng), c = C(rng);
        const double out = vb_step(s, p, l, c, 0.97, 3600.0);
        EXPECT_GE(out, 0.0);
        EXPECT_LE(out, 1.0);
        EXPECT_GE(vb_step(s, p + 0.5, l, c, 0.97, 3600.0), out);
        EXPECT_LE(vb_step(s, p, l + 0.5, c, 0.97, 3600.0), out);
        EXPECT_GE(vb_step(std::min(1.0, s + 0.1), p, l, c, 0.97, 3600.0), out);
    }
}

TEST(VbRollout, ChainsSteps) {
    const std::vector<double> P = {3.0, 0.0, 8.0};
    const std::vector<double> L = {1.0, 2.0, 1.5};
    const auto out = vb_rollout(0.5, P, L, 5.4e7, 0.97, 3600.0);
    double S = 0.5;
    for (std::size_t i = 0; i < 3; ++i) {
        S = vb_step(S, P[i], L[i], 5.4e7, 0.97, 3600.0);
        EXPECT_DOUBLE_EQ(out[i], S);
    }
    EXPECT_THROW(vb_rollout(0.5, P, std::vector<double>{1.0}, 5.4e7, 0.97, 3600.0), DomainError);
}

TEST(Isomorphism, EulerTrajectoryMatchesBatteryRollout) {
    const Trajectory tr = euler_run(kAc1, 60, 7);
    ASSERT_GE(tr.size(), 1000u);
    for (double T : tr.T_in) {
        ASSERT_GE(T, kAc1.T_min);
        ASSERT_LE(T, kAc1.T_max);
    }
    const VbParams p = oracle_params(kAc1, tr.env.T_out, start_states(tr));
    const double S0 = soc_from_temp(tr.T_init, kAc1.T_min, kAc1.T_max);
    const auto S = vb_rollout(S0, tr.P_ac, p.P_loss, p.C_f, kAc1.eta, 3600.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) worst = std::max(worst, std::abs(S[k] - tr.soc[k]));
    EXPECT_LT(worst, 1e-9);
}

TEST(Isomorphism, RandomInBandStepsAgree) {
    std::mt19937_64 rng(21);
    const FleetSpec fleet = default_fleet(8);
    std::uniform_int_distribution<std::size_t> pick(0, fleet.units.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0), To(22.0, 38.0);
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
        AcUnitSpec unit = fleet.units[pick(rng)];
        const double T = unit.T_min + unit.band() * u(rng);
        const double T_out = To(rng);
        const double P = unit.P_max * u(rng);
        const double T_next = step_euler(T, T_out, P, unit, 3600.0);
        if (T_next < unit.T_min || T_next > unit.T_max) continue;
        const VbParams p = oracle_params(unit, std::vector<double>{T_out}, std::vector<double>{T});
        const double S = vb_step(soc_from_temp(T, unit.T_min, unit.T_max), P, p.P_loss[0], p.C_f,
                                 unit.eta, 3600.0);
        EXPECT_NEAR(S, soc_from_temp(T_next, unit.T_min, unit.T_max), 1e-12);
        ++checked;
    }
    EXPECT_GT(checked, 500);
}

TEST(VbParamsJson, RoundTripWithMissingGamma) {
    VbParams p;
    p.unit_id = 2;
    p.C_f = 5.4e7;
    p.P_loss = {1.5, -0.25};
    p.gamma = std::numeric_limits<double>::quiet_NaN();
    const nlohmann::json j = to_json(p);
    EXPECT_TRUE(j.at("gamma").is_null());
    EXPECT_DOUBLE_EQ(j.at("C_f_J").get<double>(), 5.4e7);
    const VbParams back = vb_params_from_json(j);
    EXPECT_EQ(back.unit_id, 2);
    EXPECT_EQ(back.P_loss, p.P_loss);
    EXPECT_TRUE(std::isnan(back.gamma));

    p.gamma = 0.31;
    EXPECT_DOUBLE_EQ(vb_params_from_json(to_json(p)).gamma, 0.31);
}
