#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tnsim/config.hpp"
#include "tnsim/drivers.hpp"
#include "tnsim/verify.hpp"

using namespace tnsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SimConfig maximal_config() {
    SimConfig cfg;
    cfg.nu = 0.02;
    cfg.N = 6;
    cfg.N_ref = 12;
    cfg.scheme = SchemeKind::stratonovich_conservative;
    cfg.theta_family = ThetaFamily::power;
    cfg.theta_alpha = 0.5;
    cfg.theta_cutoff = 5;
    cfg.T = 0.25;
    cfg.dt = 5e-4;
    cfg.checkpoints = 9;
    cfg.delta = 0.75;
    cfg.p = 2.0;
    cfg.seed = 123456789ULL;
    cfg.samples = 3;
    cfg.N_list = {2, 4, 6};
    cfg.initial.preset = InitialDataSpec::Preset::explicit_modes;
    cfg.initial.modes = {{1, 0, 0.5}, {2, -1, -0.3}};
    cfg.passive_scalar = PassiveScalarSpec{{{1, 0, 1.0}}, {2.0, 4.0}};
    cfg.track_modes = {{1, 0}, {1, 1}};
    cfg.noise_scale = 0.9;
    cfg.ns_rk2 = false;
    return cfg;
}

}  // namespace

TEST_CASE("config serialization round trip", "[harness]") {
    SECTION("maximal config survives serialize -> parse") {
        const SimConfig cfg = maximal_config();
        const SimConfig back = config_from_json(to_json(cfg));
        REQUIRE(back == cfg);
    }
    SECTION("presets survive the round trip") {
        for (auto preset : {InitialDataSpec::Preset::single_mode, InitialDataSpec::Preset::two_mode,
                            InitialDataSpec::Preset::random_spectrum}) {
            SimConfig cfg;
            cfg.initial.preset = preset;
            cfg.initial.mode = {2, 1};
            cfg.initial.decay = 1.5;
            cfg.initial.seed = 17;
            REQUIRE(config_from_json(to_json(cfg)) == cfg);
        }
    }
    SECTION("standard ensemble preset is valid and round trips") {
        const SimConfig cfg = standard_ensemble_config();
        REQUIRE(config_from_json(to_json(cfg)) == cfg);
        REQUIRE(cfg.N_list == std::vector<int>{4, 8, 16, 32});
        REQUIRE(cfg.samples == 64);
    }
}

TEST_CASE("config validation reports every offending field", "[harness]") {
    json j;
    j["nu"] = -1.0;
    j["delta"] = 0.0;
    j["N"] = 4;
    j["N_ref"] = 2;      // violates N_ref >= N
    j["tyop"] = 1;       // unknown key
    try {
        config_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.issues.size() >= 4);
        bool saw_nu = false, saw_delta = false, saw_ref = false, saw_unknown = false;
        for (const std::string& s : e.issues) {
            saw_nu |= s.find("nu") == 0;
            saw_delta |= s.find("delta") == 0;
            saw_ref |= s.find("N_ref") == 0;
            saw_unknown |= s.find("tyop") != std::string::npos;
        }
        REQUIRE(saw_nu);
        REQUIRE(saw_delta);
        REQUIRE(saw_ref);
        REQUIRE(saw_unknown);
    }
}

TEST_CASE("time step resolution rule", "[harness]") {
    SimConfig cfg;
    cfg.nu = 0.01;
    SECTION("explicit dt wins") {
        cfg.dt = 2e-3;
        REQUIRE(resolved_dt(cfg, 64) == 2e-3);
    }
    SECTION("default caps at 1e-3 for small cutoffs") {
        cfg.dt = 0.0;
        REQUIRE(resolved_dt(cfg, 4) == Approx(1e-3));
    }
    SECTION("default resolves the fastest mode for large cutoffs") {
        cfg.dt = 0.0;
        REQUIRE(resolved_dt(cfg, 32) ==
                Approx(0.1 / (0.01 * 4.0 * pi * pi * 32.0 * 32.0)));
    }
}

TEST_CASE("initial data construction", "[harness]") {
    SECTION("two-mode preset projects away unresolved modes") {
        SimConfig cfg;
        const FourierField coarse = build_initial_field(cfg.initial, 1);
        REQUIRE(coarse.at({1, 0}) == 1.0);
        REQUIRE(coarse.l2_norm() == 1.0);  // (1,1) dropped at N=1
        const FourierField fine = build_initial_field(cfg.initial, 4);
        REQUIRE(fine.at({1, 1}) == 1.0);
    }
    SECTION("random spectrum obeys the amplitude bound and is reproducible") {
        InitialDataSpec spec;
        spec.preset = InitialDataSpec::Preset::random_spectrum;
        spec.decay = 1.5;
        spec.seed = 99;
        const FourierField a = build_initial_field(spec, 6);
        const FourierField b = build_initial_field(spec, 6);
        REQUIRE((a - b).l2_norm() == 0.0);
        for (const LatticeIndex k : modes_up_to(6))
            REQUIRE(std::abs(a.at(k)) <=
                    std::pow(static_cast<double>(norm_sq(k)), -0.75) * (1.0 + 1e-12));
    }
}

TEST_CASE("checkpoint layout", "[harness]") {
    const auto cps = checkpoint_steps(1000, 32);
    REQUIRE(cps.front() == 0);
    REQUIRE(cps.back() == 1000);
    REQUIRE(cps.size() == 32);
    REQUIRE(std::is_sorted(cps.begin(), cps.end()));
    const auto tiny = checkpoint_steps(3, 32);  // duplicates collapse
    REQUIRE(tiny.size() == 4);
}

TEST_CASE("single trajectory driver", "[harness]") {
    SECTION("deterministic single-mode run lands on the closed-form value") {
        SimConfig cfg;
        cfg.nu = 0.01;
        cfg.N = 4;
        cfg.N_ref = 4;
        cfg.scheme = SchemeKind::deterministic_ns;
        cfg.T = 1.0;
        cfg.dt = 1e-3;
        cfg.initial.preset = InitialDataSpec::Preset::single_mode;
        cfg.initial.mode = {1, 0};
        cfg.track_modes = {{1, 0}};
        TrajectorySpec spec;
        spec.cutoff = 4;
        spec.dt = 1e-3;
        spec.scheme = cfg.scheme;
        const TrajectoryOutput out = run_trajectory(cfg, spec);
        REQUIRE_FALSE(out.record.failed);
        REQUIRE(out.record.t.size() == 32);
        REQUIRE(std::abs(out.record.pairings[0].back() - std::exp(-4.0 * pi * pi * 0.01)) <=
                1e-8);
        // enstrophy column non-increasing
        for (std::size_t i = 1; i < out.record.enstrophy.size(); ++i)
            REQUIRE(out.record.enstrophy[i] <= out.record.enstrophy[i - 1]);
    }
    SECTION("conservative scheme keeps the enstrophy column flat") {
        SimConfig cfg;
        cfg.nu = 0.01;
        cfg.N = 8;
        cfg.T = 0.1;
        cfg.dt = 1e-3;
        cfg.checkpoints = 8;
        cfg.seed = 4242;
        cfg.scheme = SchemeKind::stratonovich_conservative;
        TrajectorySpec spec;
        spec.cutoff = 8;
        spec.dt = cfg.dt;
        spec.scheme = cfg.scheme;
        const TrajectoryOutput out = run_trajectory(cfg, spec);
        for (const double v : out.record.enstrophy)
            REQUIRE(v == Approx(out.record.enstrophy.front()).epsilon(1e-6));
    }
    SECTION("passive scalar norms are recorded and conserved") {
        SimConfig cfg;
        cfg.nu = 0.01;
        cfg.N = 4;
        cfg.T = 0.05;
        cfg.dt = 1e-3;
        cfg.checkpoints = 5;
        cfg.scheme = SchemeKind::stratonovich_conservative;
        cfg.passive_scalar = PassiveScalarSpec{{{1, 0, 1.0}}, {2.0}};
        TrajectorySpec spec;
        spec.cutoff = 4;
        spec.dt = cfg.dt;
        spec.scheme = cfg.scheme;
        const TrajectoryOutput out = run_trajectory(cfg, spec);
        REQUIRE_FALSE(out.record.failed);
        REQUIRE(out.record.rho_norms.size() == 1);
        for (const double v : out.record.rho_norms[0]) REQUIRE(v == Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("simulate command writes record, snapshots and manifest", "[harness]") {
    const fs::path dir = fresh_dir("tnsim_sim_test");
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 4;
    cfg.N_ref = 6;
    cfg.scheme = SchemeKind::ito_dissipative;
    cfg.T = 0.02;
    cfg.dt = 1e-3;
    cfg.checkpoints = 5;
    cfg.seed = 31337;
    REQUIRE(cmd_simulate(cfg, dir) == exit_ok);

    REQUIRE(fs::exists(dir / "trajectory.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));
    for (int i = 0; i < 5; ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "snapshots/checkpoint_%03d.tnf", i);
        REQUIRE(fs::exists(dir / name));
    }
    SECTION("manifest echoes the exact config") {
        const json m = json::parse(slurp(dir / "manifest.json"));
        REQUIRE(config_from_json(m.at("config")) == cfg);
        REQUIRE(m.at("samples").size() == 1);
        REQUIRE(m.at("samples")[0].at("status") == "completed");
    }
    SECTION("snapshots round trip through the binary format") {
        const FourierField snap = read_snapshot(dir / "snapshots/checkpoint_000.tnf");
        REQUIRE(snap.cutoff() == 4);
        REQUIRE(snap.at({1, 0}) == 1.0);  // two_mode initial data at t = 0
    }
    SECTION("csv has the documented column header") {
        const std::string csv = slurp(dir / "trajectory.csv");
        REQUIRE(csv.find("t,energy,enstrophy,h_neg,h_pos") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("simulate command reports blow-up with the numerical exit code", "[harness]") {
    const fs::path dir = fresh_dir("tnsim_blowup_test");
    SimConfig cfg;
    cfg.nu = 1e-12;
    cfg.N = 4;
    cfg.N_ref = 4;
    cfg.scheme = SchemeKind::deterministic_ns;
    cfg.ns_rk2 = false;
    cfg.T = 0.01;
    cfg.dt = 1e-3;
    cfg.checkpoints = 2;
    cfg.initial.preset = InitialDataSpec::Preset::explicit_modes;
    cfg.initial.modes = {{1, 0, 1e200}, {1, 1, 1e200}};
    REQUIRE(cmd_simulate(cfg, dir) == exit_numerical_failure);
    const json m = json::parse(slurp(dir / "manifest.json"));
    REQUIRE(m.at("samples")[0].at("status") == "failed");
    fs::remove_all(dir);
}

TEST_CASE("ensemble command", "[harness]") {
    SimConfig cfg;
    cfg.nu = 0.01;
    cfg.N = 4;
    cfg.N_ref = 8;
    cfg.scheme = SchemeKind::ito_dissipative;
    cfg.T = 0.05;
    cfg.dt = 1e-3;
    cfg.checkpoints = 6;
    cfg.seed = 99;
    cfg.samples = 3;
    cfg.N_list = {2, 4};

    SECTION("summary schema and identical bytes across thread counts") {
        const fs::path d1 = fresh_dir("tnsim_ens_t1");
        const fs::path d2 = fresh_dir("tnsim_ens_t3");
        REQUIRE(cmd_ensemble(cfg, d1, 1) == exit_ok);
        REQUIRE(cmd_ensemble(cfg, d2, 3) == exit_ok);
        const std::string s1 = slurp(d1 / "summary.json");
        REQUIRE(s1 == slurp(d2 / "summary.json"));

        const json summary = json::parse(s1);
        REQUIRE(summary.at("kind") == "ensemble_summary");
        REQUIRE(summary.at("entries").size() == 2);
        for (const auto& e : summary.at("entries")) {
            REQUIRE(e.at("samples").get<int>() == 3);
            REQUIRE(e.at("completed").get<int>() + 0 >= 0);
            REQUIRE(e.at("completed").get<int>() == 3 - e.at("failures").get<int>());
            const double p = e.at("prob_decay").at("p").get<double>();
            REQUIRE((p >= 0.0 && p <= 1.0));
            REQUIRE(e.at("D").get<double>() >= 0.0);
        }
        REQUIRE(fs::exists(d1 / "N_2" / "trajectory_0.csv"));
        REQUIRE(fs::exists(d1 / "N_4" / "trajectory_2.csv"));
        fs::remove_all(d1);
        fs::remove_all(d2);
    }
    SECTION("zero-noise degenerate run collapses onto the reference") {
        const fs::path dir = fresh_dir("tnsim_ens_zero");
        SimConfig zero = cfg;
        zero.samples = 1;
        zero.noise_scale = 0.0;
        zero.N_list = {8};  // equal to N_ref
        zero.ns_rk2 = false;  // identical stepper settings on both sides
        REQUIRE(cmd_ensemble(zero, dir, 1) == exit_ok);
        const json summary = json::parse(slurp(dir / "summary.json"));
        REQUIRE(summary.at("entries")[0].at("D").get<double>() <= 1e-8);
        fs::remove_all(dir);
    }
}

TEST_CASE("corrector study command", "[harness]") {
    const fs::path dir = fresh_dir("tnsim_corr_test");
    REQUIRE(cmd_corrector_study(ThetaFamily::indicator, 0.0, 0.01, {4, 8, 16}, {{1, 0}}, dir) ==
            exit_ok);
    const std::string csv = slurp(dir / "corrector_study.csv");
    REQUIRE(csv.find("family,alpha,nu,N,j1,j2,corrector_error,tail,epsilon") == 0);

    // parse the rows: error strictly decreasing, epsilon matches the formula
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    double prev_err = 1e300;
    int n_expected = 0;
    const int n_values[3] = {4, 8, 16};
    while (std::getline(lines, line)) {
        char fam[32];
        double alpha, nu, err, tail, eps;
        int n, j1, j2;
        REQUIRE(std::sscanf(line.c_str(), "%31[^,],%lf,%lf,%d,%d,%d,%lf,%lf,%lf", fam, &alpha,
                            &nu, &n, &j1, &j2, &err, &tail, &eps) == 9);
        REQUIRE(n == n_values[n_expected]);
        REQUIRE(err < prev_err);
        prev_err = err;
        REQUIRE(eps == Approx(epsilon_scaling(ThetaSequence::indicator(n), nu)).epsilon(1e-15));
        ++n_expected;
    }
    REQUIRE(n_expected == 3);

    SECTION("out-of-range exponents are accepted as a diagnostic") {
        const fs::path d2 = fresh_dir("tnsim_corr_alpha2");
        REQUIRE(cmd_corrector_study(ThetaFamily::power, 2.0, 0.01, {4, 8}, {{1, 0}}, d2) ==
                exit_ok);
        fs::remove_all(d2);
    }
    fs::remove_all(dir);
}

TEST_CASE("verification suite", "[harness]") {
    SECTION("fast level is green on a healthy build") {
        for (const CheckResult& r : run_verification(VerifyLevel::fast)) {
            INFO(r.name << ": measured " << r.measured << " bound " << r.bound);
            REQUIRE(r.pass);
        }
    }
    SECTION("mutation: flipping the viscous sign must fail the drift check") {
        REQUIRE_FALSE(checks::ito_drift_inequality(-1.0).pass);
    }
}
