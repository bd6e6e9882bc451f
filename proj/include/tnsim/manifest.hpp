#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "tnsim/version.hpp"

namespace tnsim {

inline std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Run manifest: config echo written before the first sample starts,
/// per-sample statuses and output paths filled in as the run finalizes.
struct RunManifest {
    nlohmann::json config_echo;
    std::string command;
    std::string created_at;
    std::string finalized_at;

    struct Sample {
        int index = 0;
        std::string status;  // completed | failed
        std::string reason;
    };
    std::vector<Sample> samples;
    std::map<std::string, std::string> outputs;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = version_string;
        j["command"] = command;
        j["config"] = config_echo;
        j["created_at"] = created_at;
        j["finalized_at"] = finalized_at;
        nlohmann::json samp = nlohmann::json::array();
        for (const Sample& s : samples) {
            nlohmann::json e{{"index", s.index}, {"status", s.status}};
            if (!s.reason.empty()) e["reason"] = s.reason;
            samp.push_back(e);
        }
        j["samples"] = samp;
        j["outputs"] = outputs;
        return j;
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("manifest: cannot open " + path.string());
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace tnsim
