#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tnsim/config.hpp"
#include "tnsim/drivers.hpp"
#include "tnsim/verify.hpp"
#include "tnsim/version.hpp"

namespace {

using tnsim::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tnsim::ConfigError({"cannot open config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw tnsim::ConfigError({"config file is not valid JSON: " + std::string(e.what())});
    }
}

// --set key=value with dotted paths; the value is parsed as JSON when it is,
// and taken as a string otherwise.
void apply_overrides(json& j, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw tnsim::ConfigError({"--set expects key=value, got '" + kv + "'"});
        std::string path = "/" + kv.substr(0, eq);
        for (char& c : path)
            if (c == '.') c = '/';
        const std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;
        }
        j[json::json_pointer(path)] = value;
    }
}

tnsim::SimConfig resolve_config(const std::string& path, const std::vector<std::string>& sets,
                                bool seed_given, std::uint64_t seed) {
    json j = path.empty() ? json::object() : load_json_file(path);
    apply_overrides(j, sets);
    if (seed_given) j["seed"] = seed;
    return tnsim::config_from_json(j);
}

std::vector<tnsim::LatticeIndex> parse_j_list(const std::string& text) {
    std::vector<tnsim::LatticeIndex> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        int k1 = 0, k2 = 0;
        if (std::sscanf(item.c_str(), "%d,%d", &k1, &k2) != 2 || (k1 == 0 && k2 == 0))
            throw tnsim::ConfigError({"--j-list entries must be 'k1,k2' with k != 0"});
        out.push_back({k1, k2});
    }
    if (out.empty()) throw tnsim::ConfigError({"--j-list is empty"});
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin simulator for 2D Euler dynamics with transport noise"};
    app.set_version_flag("--version", tnsim::version_string);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    std::vector<std::string> sets;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "config JSON file");
        if (needs_config) c->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "master seed override")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--set", sets, "override a config key, e.g. --set theta.family=power");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one trajectory");
    add_common(sim, true);

    CLI::App* ens = app.add_subcommand("ensemble", "run the scaling-limit ensemble");
    add_common(ens, true);
    std::vector<int> n_list_cli;
    ens->add_option("--N-list", n_list_cli, "cutoffs to sweep (overrides config N_list)");

    CLI::App* cor = app.add_subcommand("corrector-study", "corrector vs nu*Laplacian table");
    std::string family = "indicator";
    double alpha = 0.0;
    double nu = 0.01;
    std::vector<int> cor_n_list = {4, 8, 16, 32, 64};
    std::string j_list_text = "1,0";
    cor->add_option("--family", family, "theta family: indicator | power");
    cor->add_option("--alpha", alpha, "power-family exponent");
    cor->add_option("--nu", nu, "viscosity")->check(CLI::PositiveNumber);
    cor->add_option("--N-list", cor_n_list, "cutoffs");
    cor->add_option("--j-list", j_list_text, "tracked modes, e.g. '1,0;2,1'");
    cor->add_option("--out", out_dir, "output directory");

    CLI::App* ver = app.add_subcommand("verify", "run the invariant check suite");
    std::string level = "fast";
    ver->add_option("--level", level, "fast | full")
        ->check(CLI::IsMember({"fast", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const tnsim::SimConfig cfg = resolve_config(config_path, sets, seed_given, seed);
            return tnsim::cmd_simulate(cfg, out_dir);
        }
        if (ens->parsed()) {
            tnsim::SimConfig cfg = resolve_config(config_path, sets, seed_given, seed);
            if (!n_list_cli.empty()) {
                cfg.N_list = n_list_cli;
                for (std::size_t i = 1; i < cfg.N_list.size(); ++i)
                    if (cfg.N_list[i] <= cfg.N_list[i - 1])
                        throw tnsim::ConfigError({"--N-list must be strictly increasing"});
            }
            return tnsim::cmd_ensemble(cfg, out_dir, threads);
        }
        if (cor->parsed()) {
            tnsim::ThetaFamily fam;
            if (family == "indicator") fam = tnsim::ThetaFamily::indicator;
            else if (family == "power") fam = tnsim::ThetaFamily::power;
            else throw tnsim::ConfigError({"--family must be 'indicator' or 'power'"});
            return tnsim::cmd_corrector_study(fam, alpha, nu, cor_n_list,
                                              parse_j_list(j_list_text), out_dir);
        }
        if (ver->parsed()) {
            return tnsim::cmd_verify(level == "fast" ? tnsim::VerifyLevel::fast
                                                     : tnsim::VerifyLevel::full);
        }
    } catch (const tnsim::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return tnsim::exit_config_error;
    } catch (const tnsim::BlowupError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return tnsim::exit_numerical_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
