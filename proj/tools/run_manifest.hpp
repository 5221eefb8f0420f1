#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ulam::cli {

inline constexpr const char* tool_version = "0.1.0";

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Written once before any result file and again, with `finished`, afterwards.
// `parameters` holds exactly what is needed to rebuild the command line.
struct RunManifest {
    std::string command;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    nlohmann::ordered_json derived = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    std::string started, finished;
    std::vector<std::string> output_paths;
    std::filesystem::path path;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["parameters"] = parameters;
        j["derived"] = derived;
        j["seed"] = seed;
        j["tool_version"] = tool_version;
        j["started"] = started;
        j["finished"] = finished.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(finished);
        j["output_paths"] = output_paths;
        return j;
    }

    void write() const {
        if (path.empty()) return;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write manifest " + path.string());
        os << to_json().dump(2) << '\n';
    }

    void begin() {
        started = utc_now();
        write();
    }

    void end() {
        finished = utc_now();
        write();
    }
};

// Command line rebuilt from a manifest: the subcommand followed by --key=value
// pairs; boolean parameters become bare flags when true and vanish otherwise.
// Keys that also appear in `overrides` are left to the caller.
inline std::vector<std::string> replay_arguments(const nlohmann::json& manifest,
                                                 const std::vector<std::string>& overrides = {}) {
    if (!manifest.contains("command") || !manifest.contains("parameters"))
        throw std::invalid_argument("manifest lacks command or parameters");
    std::vector<std::string> args{manifest.at("command").get<std::string>()};
    auto overridden = [&](const std::string& key) {
        for (const auto& a : overrides)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [key, value] : manifest.at("parameters").items()) {
        if (overridden(key)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
        } else if (value.is_string()) {
            args.push_back("--" + key + "=" + value.get<std::string>());
        } else if (!value.is_null()) {
            args.push_back("--" + key + "=" + value.dump());
        }
    }
    return args;
}

// key=value lines; '#' and ';' start comments, blank lines ignored.
inline std::map<std::string, std::string> read_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::invalid_argument("cannot read config file " + file.string());
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(file.string() + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key[0] == '-') key.erase(0, 1);
        if (key.empty()) throw std::invalid_argument(file.string() + ":" + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

// Splices config entries into argv for every key not already given on the
// command line, so explicit flags win.
inline std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::vector<std::string> files;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            files.push_back(args[++i]);
        } else if (args[i].rfind("--config=", 0) == 0) {
            files.push_back(args[i].substr(9));
        } else {
            kept.push_back(args[i]);
        }
    }
    if (files.empty()) return kept;
    auto given = [&](const std::string& key) {
        for (const auto& a : kept)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& f : files) {
        for (const auto& [key, value] : read_config(f)) {
            if (given(key)) continue;
            if (value == "true") kept.push_back("--" + key);
            else if (value != "false") kept.push_back("--" + key + "=" + value);
        }
    }
    return kept;
}

}  // namespace ulam::cli
