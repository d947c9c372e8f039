#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vbnet/data_pipeline.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/thermo_sim.hpp"
#include "vbnet/vb_core.hpp"

using namespace vbnet;
using vbnet::testing::TempDir;

namespace {

EnvSynthOptions quiet() {
    EnvSynthOptions o;
    o.ar_sigma = 0.0;
    o.price_noise = 0.0;
    return o;
}

const AcUnitSpec kAc1 = default_fleet(4).units[0];

Trajectory ac1_run(int days, std::uint64_t seed = 7) {
    return simulate_unit(kAc1, synth_env(days, seed), 22.5);
}

std::size_t ingestion_row(const std::filesystem::path& path) {
    try {
        import_env_csv(path);
    } catch (const IngestionError& e) {
        return e.row();
    }
    ADD_FAILURE() << "expected IngestionError";
    return 9999;
}

}  // namespace

TEST(SynthEnv, DeterministicPerSeed) {
    const EnvSeries a = synth_env(10, 3), b = synth_env(10, 3), c = synth_env(10, 4);
    EXPECT_EQ(a.T_out, b.T_out);
    EXPECT_EQ(a.price, b.price);
    EXPECT_NE(a.T_out, c.T_out);
    EXPECT_NO_THROW(a.validate());
    EXPECT_THROW(synth_env(1, 3), DomainError);
}

TEST(SynthEnv, QuarterLength) {
    const EnvSeries env = synth_env(92, 7);
    EXPECT_EQ(env.size(), 2208u);
    EXPECT_EQ(env.t.back() - env.t.front(), 2207 * 3600);
}

TEST(SynthEnv, NoiselessProfilePeaksMidAfternoon) {
    const EnvSeries env = synth_env(3, 1, quiet());
    for (std::size_t k = 0; k < env.size(); ++k) {
        const std::size_t hour = k % 24;
        if (hour == 15) {
            EXPECT_NEAR(env.T_out[k], 33.0, 1e-12);
        }
        if (hour == 3) {
            EXPECT_NEAR(env.T_out[k], 25.0, 1e-12);
        }
        EXPECT_LE(env.T_out[k], 33.0 + 1e-12);
        EXPECT_GE(env.T_out[k], 25.0 - 1e-12);
        EXPECT_DOUBLE_EQ(env.price[k], tou_price(static_cast<int>(hour)));
    }
}

TEST(SynthEnv, TariffLevelsOrdered) {
    EXPECT_LT(tou_price(3), tou_price(9));
    EXPECT_LT(tou_price(9), tou_price(15));
    EXPECT_DOUBLE_EQ(tou_price(10), tou_price(18));
    EXPECT_DOUBLE_EQ(tou_price(12), tou_price(20));
}

TEST(EnvCsv, RoundTripIsExact) {
    TempDir dir("env");
    const EnvSeries env = synth_env(4, 2);
    export_env_csv(env, dir.path() / "env.csv");
    const EnvSeries back = import_env_csv(dir.path() / "env.csv");
    EXPECT_EQ(back.t, env.t);
    EXPECT_EQ(back.T_out, env.T_out);
    EXPECT_EQ(back.price, env.price);
}

TEST(EnvCsv, MissingColumnRejected) {
    TempDir dir("env");
    const auto path = dir.path() / "env.csv";
    std::ofstream(path) << "timestamp,T_out\n1593561600,25.0\n";
    try {
        import_env_csv(path);
        FAIL();
    } catch (const IngestionError& e) {
        EXPECT_NE(std::string(e.what()).find("price"), std::string::npos);
    }
}

TEST(EnvCsv, GapReportsRow) {
    TempDir dir("env");
    const auto path = dir.path() / "env.csv";
    std::ofstream(path) << "timestamp,T_out,price\n"
                        << "1593561600,25,0.3\n1593565200,25,0.3\n1593572400,26,0.3\n";
    EXPECT_EQ(ingestion_row(path), 3u);
}

TEST(EnvCsv, NonFiniteAndGarbageRejected) {
    TempDir dir("env");
    const auto nan_path = dir.path() / "nan.csv";
    std::ofstream(nan_path) << "timestamp,T_out,price\n1593561600,25,0.3\n1593565200,nan,0.3\n";
    EXPECT_EQ(ingestion_row(nan_path), 2u);
    const auto bad_path = dir.path() / "bad.csv";
    std::ofstream(bad_path) << "timestamp,T_out,price\n1593561600,warm,0.3\n";
    EXPECT_EQ(ingestion_row(bad_path), 1u);
}

TEST(MakeSamples, QuarterProducesNinetyOneWindows) {
    const Trajectory tr = ac1_run(92);
    const auto samples = make_samples(tr, kAc1);
    ASSERT_EQ(samples.size(), 91u);
    const Sample& s = samples.front();
    EXPECT_EQ(s.start, 0u);
    EXPECT_EQ(s.horizon_start(), 24u);
    EXPECT_EQ(s.ctx_T_in.size(), 24u);
    EXPECT_EQ(s.hz_P_ac.size(), 24u);
    EXPECT_EQ(s.S_true.size(), 24u);
    EXPECT_DOUBLE_EQ(s.S0, tr.soc[23]);
    EXPECT_DOUBLE_EQ(s.S_true[0], tr.soc[24]);
    EXPECT_DOUBLE_EQ(s.hz_T_out[0], tr.env.T_out[24]);
    EXPECT_EQ(s.start_time, tr.env.t[0]);
    EXPECT_DOUBLE_EQ(s.dT_range(), 3.0);
    EXPECT_EQ(samples[1].start, 24u);
}

TEST(MakeSamples, ContextMomentsMatchWindow) {
    const auto samples = make_samples(ac1_run(6), kAc1);
    for (const Sample& s : samples) {
        double m = 0.0;
        for (double v : s.ctx_T_in) m += v;
        m /= s.ctx_T_in.size();
        double var = 0.0;
        for (double v : s.ctx_T_in) var += (v - m) * (v - m);
        var /= s.ctx_T_in.size();
        EXPECT_NEAR(s.mu_Tin, m, 1e-10);
        EXPECT_NEAR(s.sigma_Tin, std::sqrt(var), 1e-6);
    }
}

TEST(MakeSamples, ConstantIndoorTemperatureHasZeroSpread) {
    EnvSeries env = synth_env(3, 1, quiet());
    std::fill(env.T_out.begin(), env.T_out.end(), 22.5);
    std::fill(env.price.begin(), env.price.end(), 0.5);
    const auto samples = make_samples(simulate_unit(kAc1, env, 22.5), kAc1);
    ASSERT_FALSE(samples.empty());
    EXPECT_NEAR(samples[0].sigma_Tin, 0.0, 1e-6);
    EXPECT_NEAR(samples[0].mu_Tin, 22.5, 1e-12);
}

TEST(MakeSamples, WindowsReassembleTrajectory) {
    const Trajectory tr = ac1_run(10);
    const auto samples = make_samples(tr, kAc1);
    for (const Sample& s : samples) {
        for (std::size_t i = 0; i < s.ctx_T_in.size(); ++i) {
            EXPECT_EQ(s.ctx_T_in[i], tr.T_in[s.start + i]);
            EXPECT_EQ(s.ctx_T_out[i], tr.env.T_out[s.start + i]);
            EXPECT_EQ(s.ctx_P_ac[i], tr.P_ac[s.start + i]);
        }
        for (std::size_t h = 0; h < s.S_true.size(); ++h) {
            EXPECT_EQ(s.S_true[h], tr.soc[s.horizon_start() + h]);
            EXPECT_EQ(s.hz_P_ac[h], tr.P_ac[s.horizon_start() + h]);
        }
    }
}

TEST(MakeSamples, ShortTrajectoryYieldsNothing) {
    Trajectory tr = ac1_run(2);
    tr.T_in.resize(40);
    tr.P_ac.resize(40);
    tr.soc.resize(40);
    EXPECT_TRUE(make_samples(tr, kAc1).empty());
    EXPECT_THROW(make_samples(tr, kAc1, 0, 24, 24), DomainError);
}

TEST(MakeSamples, HorizonIndoorTemperatureOnlyReachesTargets) {
    const Trajectory tr = ac1_run(5);
    Trajectory perturbed = tr;
    const auto base = make_samples(tr, kAc1)[0];
    for (std::size_t k = base.horizon_start(); k < base.horizon_start() + 24; ++k) {
        perturbed.T_in[k] += 0.7;
        perturbed.soc[k] = soc_from_temp(perturbed.T_in[k], kAc1.T_min, kAc1.T_max);
    }
    const auto moved = make_samples(perturbed, kAc1)[0];
    EXPECT_EQ(moved.ctx_T_in, base.ctx_T_in);
    EXPECT_EQ(moved.ctx_T_out, base.ctx_T_out);
    EXPECT_EQ(moved.ctx_P_ac, base.ctx_P_ac);
    EXPECT_EQ(moved.hz_T_out, base.hz_T_out);
    EXPECT_EQ(moved.hz_P_ac, base.hz_P_ac);
    EXPECT_EQ(moved.S0, base.S0);
    EXPECT_EQ(moved.mu_Tin, base.mu_Tin);
    EXPECT_EQ(moved.sigma_Tin, base.sigma_Tin);
    EXPECT_NE(moved.S_true, base.S_true);
}

TEST(ChronoSplit, EightyTwentyOnQuarter) {
    const auto samples = make_samples(ac1_run(92), kAc1);
    const auto [train, test] = chrono_split(samples);
    EXPECT_EQ(train.size(), 73u);
    EXPECT_EQ(test.size(), 18u);
    for (const Sample& a : train) {
        for (const Sample& b : test) EXPECT_LT(a.start_time, b.start_time);
    }
    EXPECT_EQ(test.front().start, train.back().start + 24);
}

TEST(ColdStart, KeepsMostRecentSuffix) {
    const auto samples = make_samples(ac1_run(92), kAc1);
    const auto train = chrono_split(samples).first;
    const auto two = cold_start_subset(train, 0.02);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two.back().start, train.back().start);
    EXPECT_EQ(two.front().start, train[71].start);
    EXPECT_EQ(cold_start_subset(train, 1.0).size(), train.size());
    for (double alpha : {0.04, 0.06, 0.08, 0.10, 0.25, 0.5}) {
        const auto sub = cold_start_subset(train, alpha);
        EXPECT_EQ(sub.size(), static_cast<std::size_t>(std::ceil(alpha * 73 - 1e-9)));
        const std::size_t off = train.size() - sub.size();
        for (std::size_t i = 0; i < sub.size(); ++i) EXPECT_EQ(sub[i].start, train[off + i].start);
    }
    EXPECT_THROW(cold_start_subset({}, 0.5), DomainError);
    EXPECT_THROW(cold_start_subset(train, 0.0), DomainError);
    EXPECT_THROW(cold_start_subset(train, 1.5), DomainError);
}

TEST(NormStats, UsesTrainingWindowsOnly) {
    const auto samples = make_samples(ac1_run(92), kAc1);
    auto [train, test] = chrono_split(samples);
    const NormStats a = compute_norm_stats(train);
    for (Sample& s : test) {
        for (double& v : s.ctx_T_out) v += 50.0;
    }
    std::vector<Sample> train_copy = train;
    const NormStats b = compute_norm_stats(train_copy);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
    const NormStats all = compute_norm_stats(samples);
    EXPECT_NE(all.mean, a.mean);
}

TEST(NormStats, StdFloorAndJsonRoundTrip) {
    const auto samples = make_samples(ac1_run(6), kAc1);
    const NormStats s = compute_norm_stats(samples);
    EXPECT_DOUBLE_EQ(s.std[static_cast<std::size_t>(Feature::dT_range)], NormStats::kStdFloor);
    EXPECT_DOUBLE_EQ(s.mean[static_cast<std::size_t>(Feature::dT_range)], 3.0);
    for (double v : s.std) EXPECT_GE(v, NormStats::kStdFloor);
    const NormStats back = NormStats::from_json(s.to_json());
    EXPECT_EQ(back.mean, s.mean);
    EXPECT_EQ(back.std, s.std);
    EXPECT_NEAR(s.apply(Feature::dT_range, 3.0), 0.0, 1e-9);
}

TEST(FleetData, SharedEnvironmentAndPerUnitSplits) {
    ExperimentConfig cfg = vbnet::testing::small_config(20, 4);
    const auto data = vbnet::testing::small_fleet(cfg);
    ASSERT_EQ(data.size(), 4u);
    for (const UnitData& d : data) {
        EXPECT_EQ(d.traj.env.T_out, data[0].traj.env.T_out);
        EXPECT_EQ(d.train.size() + d.test.size(), 19u);
        EXPECT_EQ(d.train.size(), 16u);
        for (const Sample& s : d.train) EXPECT_EQ(s.unit_id, d.unit.id);
    }
}

TEST(Dataset, WriteReadRoundTrip) {
    TempDir dir("ds");
    ExperimentConfig cfg = vbnet::testing::small_config(8, 4);
    const auto data = vbnet::testing::small_fleet(cfg);
    write_dataset(dir.path(), data, cfg);
    const Dataset ds = read_dataset(dir.path());
    ASSERT_EQ(ds.trajectories.size(), 4u);
    EXPECT_EQ(ds.seq_len, 24);
    EXPECT_EQ(ds.rollout_len, 24);
    EXPECT_EQ(ds.split_index, data[0].train.size());
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(ds.trajectories[i].T_in, data[i].traj.T_in);
        EXPECT_EQ(ds.trajectories[i].P_ac, data[i].traj.P_ac);
        EXPECT_DOUBLE_EQ(ds.fleet.units[i].R, data[i].unit.R);
    }
    const NormStats expected = compute_norm_stats(vbnet::testing::all_train(data));
    EXPECT_EQ(ds.norm_stats.mean, expected.mean);

    std::filesystem::remove(dir.path() / "manifest.json");
    EXPECT_THROW(read_dataset(dir.path()), IngestionError);
}
