#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tnsim/config.hpp"
#include "tnsim/corrector.hpp"
#include "tnsim/manifest.hpp"
#include "tnsim/observables.hpp"
#include "tnsim/snapshot.hpp"

namespace tnsim {

/// Shortest round-trip decimal form; used for all CSV payloads so output
/// bytes do not depend on locale or stream state.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct TrajectorySpec {
    int sample = 0;
    int cutoff = 8;
    double dt = 1e-3;
    SchemeKind scheme = SchemeKind::ito_dissipative;
    bool keep_snapshots = false;
};

struct TrajectoryOutput {
    TrajectoryRecord record;
    std::vector<FourierField> snapshots;  // at checkpoint times, when requested
};

/// Checkpoint step indices: `count` nearly equispaced steps covering [0, T],
/// always including step 0 and the final step.
inline std::vector<std::uint64_t> checkpoint_steps(std::uint64_t steps, int count) {
    std::vector<std::uint64_t> idx;
    for (int i = 0; i < count; ++i) {
        const double frac = count > 1 ? static_cast<double>(i) / (count - 1) : 1.0;
        idx.push_back(static_cast<std::uint64_t>(std::llround(frac * static_cast<double>(steps))));
    }
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

/// Run one sample path, recording observables (and optionally full snapshots)
/// at the checkpoints. A blow-up marks the record failed instead of throwing.
inline TrajectoryOutput run_trajectory(const SimConfig& cfg, const TrajectorySpec& spec) {
    const int n = spec.cutoff;
    const double dt = spec.dt;
    const std::uint64_t steps = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(cfg.T / dt)));
    const auto cps = checkpoint_steps(steps, cfg.checkpoints);

    StepperSettings settings = [&] {
        switch (spec.scheme) {
            case SchemeKind::ito_dissipative:
                return StepperSettings::ito(cfg.nu, n, dt, theta_for(cfg, n), cfg.noise_scale);
            case SchemeKind::stratonovich_conservative:
                return StepperSettings::stratonovich(cfg.nu, n, dt, theta_for(cfg, n),
                                                     cfg.noise_scale);
            case SchemeKind::deterministic_ns:
                return StepperSettings::navier_stokes(cfg.nu, n, dt, cfg.ns_rk2);
        }
        throw std::logic_error("run_trajectory: unknown scheme");
    }();

    SimState state(build_initial_field(cfg.initial, n));
    if (cfg.passive_scalar) state.rho = build_scalar_field(*cfg.passive_scalar, n);

    const RngStream stream{cfg.seed, static_cast<std::uint64_t>(spec.sample)};
    StepStats stats;

    TrajectoryOutput out;
    TrajectoryRecord& rec = out.record;
    rec.sample = spec.sample;
    rec.scheme = to_string(spec.scheme);
    rec.cutoff = n;
    rec.seed = cfg.seed;
    rec.delta = cfg.delta;
    if (cfg.passive_scalar) {
        rec.rho_p = cfg.passive_scalar->p_norms;
        rec.rho_norms.assign(rec.rho_p.size(), {});
    }
    rec.tracked = cfg.track_modes;
    rec.pairings.assign(rec.tracked.size(), {});

    auto record_at = [&](const SimState& s) {
        rec.t.push_back(s.t);
        rec.energy.push_back(energy(s.xi));
        rec.enstrophy.push_back(enstrophy(s.xi));
        rec.h_neg.push_back(sobolev_norm(s.xi, -cfg.delta));
        rec.h_pos.push_back(sobolev_norm(s.xi, cfg.delta));
        for (std::size_t i = 0; i < rec.rho_p.size(); ++i)
            rec.rho_norms[i].push_back(s.rho ? lp_norm(*s.rho, rec.rho_p[i]) : 0.0);
        for (std::size_t i = 0; i < rec.tracked.size(); ++i)
            rec.pairings[i].push_back(s.xi.at(rec.tracked[i]));
        if (spec.keep_snapshots) out.snapshots.push_back(s.xi);
    };

    std::size_t next_cp = 0;
    try {
        for (std::uint64_t i = 0; i <= steps; ++i) {
            if (next_cp < cps.size() && i == cps[next_cp]) {
                record_at(state);
                ++next_cp;
            }
            if (i < steps) state = advance(state, settings, stream, &stats);
        }
    } catch (const BlowupError& e) {
        rec.failed = true;
        rec.failure_reason = e.what();
    }
    rec.rejected_steps = stats.rejected_steps;
    return out;
}

/// Run fn(0..count-1) on a small worker pool. Work items are claimed through
/// an atomic counter; all post-processing happens in index order afterwards,
/// so the thread count never changes any output byte.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                while (true) {
                    const int i = next.fetch_add(1);
                    if (i >= count) break;
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

struct EnsembleEntry {
    int cutoff = 0;
    int samples = 0;
    int completed = 0;
    int failures = 0;
    double D = 0.0;           // p-th-moment sup distance to the reference
    double sup_mean = 0.0;    // mean over samples of sup_t ||. - ref||_{H^-delta}
    double sup_stddev = 0.0;
    WilsonInterval prob_decay;
    WilsonInterval prob_energy;
    std::optional<WilsonInterval> prob_growth;  // Stratonovich runs only
};

struct EnsembleResult {
    std::vector<EnsembleEntry> entries;
    std::vector<std::vector<TrajectoryRecord>> records;  // [N index][sample]
    double dt = 0.0;

    json summary_json(const SimConfig& cfg) const {
        json j;
        j["kind"] = "ensemble_summary";
        j["config"] = to_json(cfg);
        j["dt"] = dt;
        json list = json::array();
        for (const EnsembleEntry& e : entries) {
            json row;
            row["N"] = e.cutoff;
            row["samples"] = e.samples;
            row["completed"] = e.completed;
            row["failures"] = e.failures;
            row["D"] = e.D;
            row["sup_mean"] = e.sup_mean;
            row["sup_stddev"] = e.sup_stddev;
            row["prob_decay"] = {{"p", e.prob_decay.p}, {"lo", e.prob_decay.lo}, {"hi", e.prob_decay.hi}};
            row["prob_energy"] = {{"p", e.prob_energy.p}, {"lo", e.prob_energy.lo}, {"hi", e.prob_energy.hi}};
            if (e.prob_growth)
                row["prob_growth"] = {{"p", e.prob_growth->p}, {"lo", e.prob_growth->lo}, {"hi", e.prob_growth->hi}};
            list.push_back(row);
        }
        j["entries"] = list;
        return j;
    }
};

/// The scaling-limit experiment: one deterministic reference at N_ref, then M
/// stochastic samples per cutoff in N_list; per-N ensemble distances and
/// bound-event probabilities. Failed samples are excluded from the statistics
/// and counted.
inline EnsembleResult run_ensemble(const SimConfig& cfg, int threads) {
    const std::vector<int> n_list = cfg.N_list.empty() ? std::vector<int>{cfg.N} : cfg.N_list;
    const double dt = resolved_dt(cfg, *std::max_element(n_list.begin(), n_list.end()));

    TrajectorySpec ref_spec;
    ref_spec.sample = 0;
    ref_spec.cutoff = cfg.N_ref;
    ref_spec.dt = dt;
    ref_spec.scheme = SchemeKind::deterministic_ns;
    ref_spec.keep_snapshots = true;
    const TrajectoryOutput reference = run_trajectory(cfg, ref_spec);
    if (reference.record.failed)
        throw BlowupError("reference trajectory failed: " + reference.record.failure_reason);

    EnsembleResult result;
    result.dt = dt;
    for (const int n : n_list) {
        std::vector<TrajectoryRecord> records(static_cast<std::size_t>(cfg.samples));
        std::vector<double> sup(static_cast<std::size_t>(cfg.samples), 0.0);
        std::vector<char> ok(static_cast<std::size_t>(cfg.samples), 0);
        parallel_for(cfg.samples, threads, [&](int m) {
            TrajectorySpec spec;
            spec.sample = m;
            spec.cutoff = n;
            spec.dt = dt;
            spec.scheme = cfg.scheme;
            spec.keep_snapshots = true;
            TrajectoryOutput out = run_trajectory(cfg, spec);
            if (!out.record.failed)
                sup[static_cast<std::size_t>(m)] =
                    sup_hneg_distance(out.snapshots, reference.snapshots, cfg.delta);
            ok[static_cast<std::size_t>(m)] = out.record.failed ? 0 : 1;
            records[static_cast<std::size_t>(m)] = std::move(out.record);
        });

        EnsembleEntry entry;
        entry.cutoff = n;
        entry.samples = cfg.samples;
        double acc_p = 0.0, acc = 0.0, acc2 = 0.0;
        int n_decay = 0, n_energy = 0, n_growth = 0;
        for (int m = 0; m < cfg.samples; ++m) {
            if (!ok[static_cast<std::size_t>(m)]) {
                entry.failures += 1;
                continue;
            }
            entry.completed += 1;
            const double s = sup[static_cast<std::size_t>(m)];
            acc_p += std::pow(s, cfg.p);
            acc += s;
            acc2 += s * s;
            const TrajectoryRecord& rec = records[static_cast<std::size_t>(m)];
            if (decay_bound_indicator(rec, cfg.nu, 0.2 * rec.enstrophy.front(), cfg.delta))
                n_decay += 1;
            if (energy_bound_indicator(rec, cfg.nu, 0.2 * rec.energy.front())) n_energy += 1;
            if (cfg.scheme == SchemeKind::stratonovich_conservative &&
                growth_bound_indicator(rec, cfg.nu, cfg.delta))
                n_growth += 1;
        }
        if (entry.completed > 0) {
            entry.D = std::pow(acc_p / entry.completed, 1.0 / cfg.p);
            entry.sup_mean = acc / entry.completed;
            const double var =
                std::max(0.0, acc2 / entry.completed - entry.sup_mean * entry.sup_mean);
            entry.sup_stddev = std::sqrt(var);
            entry.prob_decay = wilson_interval(n_decay, entry.completed);
            entry.prob_energy = wilson_interval(n_energy, entry.completed);
            if (cfg.scheme == SchemeKind::stratonovich_conservative)
                entry.prob_growth = wilson_interval(n_growth, entry.completed);
        }
        result.entries.push_back(entry);
        result.records.push_back(std::move(records));
    }
    return result;
}

inline void write_record_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "# trajectory record: sample=" << rec.sample << " scheme=" << rec.scheme
        << " N=" << rec.cutoff << " seed=" << rec.seed << "\n";
    out << "# t: time; energy: 0.5*||K*xi||_L2^2; enstrophy: ||xi||_L2^2;\n";
    out << "# h_neg / h_pos: H^{-delta} / H^{+delta} norms of xi with delta="
        << format_double(rec.delta) << ";\n";
    if (!rec.rho_p.empty())
        out << "# rho_lp<p>: L^p norm of the passive scalar at the listed exponent;\n";
    if (!rec.tracked.empty()) out << "# pair_<k1>_<k2>: coefficient <xi, e_k>;\n";
    if (rec.failed) out << "# FAILED: " << rec.failure_reason << "\n";
    out << "t,energy,enstrophy,h_neg,h_pos";
    for (const double p : rec.rho_p) out << ",rho_lp" << format_double(p);
    for (const LatticeIndex k : rec.tracked) out << ",pair_" << k.k1 << "_" << k.k2;
    out << "\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out << format_double(rec.t[i]) << ',' << format_double(rec.energy[i]) << ','
            << format_double(rec.enstrophy[i]) << ',' << format_double(rec.h_neg[i]) << ','
            << format_double(rec.h_pos[i]);
        for (const auto& series : rec.rho_norms) out << ',' << format_double(series[i]);
        for (const auto& series : rec.pairings) out << ',' << format_double(series[i]);
        out << "\n";
    }
}

// exit codes shared with the CLI
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_failure = 3;
inline constexpr int exit_verification_failure = 4;

/// Single-trajectory driver: CSV record, snapshots at checkpoints, manifest.
inline int cmd_simulate(const SimConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "snapshots");

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config_echo = to_json(cfg);
    manifest.created_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");  // config echo lands before the run starts

    const int cutoff = cfg.scheme == SchemeKind::deterministic_ns ? cfg.N_ref : cfg.N;
    TrajectorySpec spec;
    spec.sample = 0;
    spec.cutoff = cutoff;
    spec.dt = resolved_dt(cfg, cutoff);
    spec.scheme = cfg.scheme;
    spec.keep_snapshots = true;
    const TrajectoryOutput out = run_trajectory(cfg, spec);

    write_record_csv(out_dir / "trajectory.csv", out.record);
    manifest.outputs["trajectory"] = (out_dir / "trajectory.csv").string();
    for (std::size_t i = 0; i < out.snapshots.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "snapshots/checkpoint_%03zu.tnf", i);
        write_snapshot(out_dir / name, out.snapshots[i]);
    }
    manifest.outputs["snapshots"] = (out_dir / "snapshots").string();

    RunManifest::Sample s;
    s.index = 0;
    s.status = out.record.failed ? "failed" : "completed";
    s.reason = out.record.failure_reason;
    manifest.samples.push_back(s);
    manifest.finalized_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");
    return out.record.failed ? exit_numerical_failure : exit_ok;
}

/// Ensemble driver: summary.json plus per-N trajectory CSVs.
inline int cmd_ensemble(const SimConfig& cfg, const std::filesystem::path& out_dir, int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.command = "ensemble";
    manifest.config_echo = to_json(cfg);
    manifest.created_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");

    EnsembleResult result;
    try {
        result = run_ensemble(cfg, threads);
    } catch (const BlowupError& e) {
        RunManifest::Sample s;
        s.index = -1;
        s.status = "failed";
        s.reason = e.what();
        manifest.samples.push_back(s);
        manifest.finalized_at = timestamp_now();
        manifest.write(out_dir / "manifest.json");
        return exit_numerical_failure;
    }

    {
        std::ofstream out(out_dir / "summary.json");
        out << result.summary_json(cfg).dump(2) << "\n";
    }
    manifest.outputs["summary"] = (out_dir / "summary.json").string();

    int global_index = 0;
    for (std::size_t ni = 0; ni < result.records.size(); ++ni) {
        const int n = result.entries[ni].cutoff;
        const fs::path dir = out_dir / ("N_" + std::to_string(n));
        fs::create_directories(dir);
        for (const TrajectoryRecord& rec : result.records[ni]) {
            write_record_csv(dir / ("trajectory_" + std::to_string(rec.sample) + ".csv"), rec);
            RunManifest::Sample s;
            s.index = global_index++;
            s.status = rec.failed ? "failed" : "completed";
            s.reason = rec.failure_reason;
            manifest.samples.push_back(s);
        }
    }
    manifest.finalized_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");
    return exit_ok;
}

/// Corrector study: per (N, j) the L2 misfit of (eps^2/2) C_N e_j against
/// nu Delta e_j, the lattice tail diagnostic, and eps_N.
inline int cmd_corrector_study(ThetaFamily family, double alpha, double nu,
                               const std::vector<int>& n_list,
                               const std::vector<LatticeIndex>& j_list,
                               const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.command = "corrector-study";
    manifest.config_echo = {{"family", to_string(family)}, {"alpha", alpha}, {"nu", nu}};
    manifest.created_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");

    std::ofstream out(out_dir / "corrector_study.csv");
    out << "family,alpha,nu,N,j1,j2,corrector_error,tail,epsilon\n";
    for (const int n : n_list) {
        const ThetaSequence theta = family == ThetaFamily::indicator
                                        ? ThetaSequence::indicator(n)
                                        : ThetaSequence::power(alpha, n);
        const double eps = epsilon_scaling(theta, nu);
        for (const LatticeIndex j : j_list) {
            if (norm_sq(j) > static_cast<long long>(n) * n)
                throw ConfigError({"corrector-study: tracked mode outside |j| <= N for N = " +
                                   std::to_string(n)});
            FourierField ej(n);
            ej.set(j, 1.0);
            FourierField diff = corrector_apply(theta, ej);
            diff *= 0.5 * eps * eps;
            diff.add(j, 4.0 * pi * pi * static_cast<double>(norm_sq(j)) * nu);  // - nu Delta e_j
            out << to_string(family) << ',' << format_double(alpha) << ',' << format_double(nu)
                << ',' << n << ',' << j.k1 << ',' << j.k2 << ',' << format_double(diff.l2_norm())
                << ',' << format_double(corrector_tail(theta, j)) << ',' << format_double(eps)
                << "\n";
        }
    }
    out.close();
    manifest.outputs["table"] = (out_dir / "corrector_study.csv").string();
    manifest.finalized_at = timestamp_now();
    manifest.write(out_dir / "manifest.json");
    return exit_ok;
}

}  // namespace tnsim
