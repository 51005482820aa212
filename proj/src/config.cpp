#include "nsflow/config.hpp"

#include <fstream>

#include <json.hpp>

#include "nsflow/dns_client.hpp"
#include "nsflow/errors.hpp"
#include "nsflow/util.hpp"

namespace nsflow {

using nlohmann::json;

RunConfig RunConfig::defaults() {
    RunConfig config;
    config.groups["BRICS"] = {".br", ".cn", ".in", ".ru", ".za"};
    config.groups["EU"] = {".eu"};
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw UsageError("config: cannot open " + path.string());

    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        throw FormatError("config: " + path.string() + ": " + e.what());
    }

    RunConfig config = defaults();
    config.tranco_path = doc.value("tranco", "");
    config.prefix2as_v4_path = doc.value("prefix2as_v4", "");
    config.prefix2as_v6_path = doc.value("prefix2as_v6", "");
    config.as2org_path = doc.value("as2org", "");
    config.store_path = doc.value("store", config.store_path);
    config.backend = doc.value("backend", config.backend);
    if (doc.contains("run_date")) {
        std::string date = doc.at("run_date").get<std::string>();
        if (!looks_like_date(date)) {
            throw FormatError("config: run_date must be YYYY-MM-DD, got " + date);
        }
        config.run_date = date;
    }
    if (doc.contains("resolver")) {
        const auto& r = doc.at("resolver");
        config.policy.timeout =
            std::chrono::milliseconds(r.value("timeout_ms", config.policy.timeout.count()));
        config.policy.retries = r.value("retries", config.policy.retries);
        config.policy.max_in_flight = r.value("max_in_flight", config.policy.max_in_flight);
        config.policy.queries_per_second =
            r.value("queries_per_second", config.policy.queries_per_second);
        config.policy.unreachable_window =
            r.value("unreachable_window", config.policy.unreachable_window);
        if (r.contains("upstreams")) {
            config.policy.upstreams.clear();
            for (const auto& u : r.at("upstreams")) {
                config.policy.upstreams.push_back(u.get<std::string>());
            }
        }
    }
    if (config.policy.timeout.count() <= 0) throw FormatError("config: timeout must be > 0");
    if (config.policy.max_in_flight < 1) throw FormatError("config: max_in_flight must be >= 1");
    if (config.policy.queries_per_second <= 0) {
        throw FormatError("config: queries_per_second must be > 0");
    }
    if (doc.contains("groups")) {
        for (const auto& [name, suffixes] : doc.at("groups").items()) {
            std::vector<std::string> list;
            for (const auto& s : suffixes) {
                std::string suffix = s.get<std::string>();
                if (suffix.empty() || suffix.front() != '.') {
                    throw FormatError("config: group " + name + ": suffix must start with '.'");
                }
                list.push_back(std::move(suffix));
            }
            config.groups[name] = std::move(list);
        }
    }
    return config;
}

void RunConfig::validate_dataset_paths() const {
    for (const auto& [label, path] :
         {std::pair{"tranco", tranco_path}, {"prefix2as_v4", prefix2as_v4_path},
          {"prefix2as_v6", prefix2as_v6_path}, {"as2org", as2org_path}}) {
        if (path.empty()) {
            throw UsageError(std::string("config: missing dataset path: ") + label);
        }
        if (!std::filesystem::exists(path)) {
            throw UsageError(std::string(label) + ": no such file: " + path);
        }
    }
}

const std::vector<std::string>& RunConfig::group(const std::string& name) const {
    auto it = groups.find(name);
    if (it == groups.end()) throw UsageError("unknown ccTLD group: " + name);
    return it->second;
}

std::shared_ptr<DnsBackend> make_backend(const RunConfig& config) {
    if (config.backend == "live") {
        if (config.policy.upstreams.empty()) {
            throw UsageError("live backend requires resolver.upstreams in the config");
        }
        return std::make_shared<LiveDnsBackend>(config.policy.upstreams);
    }
    if (config.backend.rfind("fixture:", 0) == 0) {
        std::string path = config.backend.substr(8);
        std::ifstream in(path);
        if (!in.is_open()) throw UsageError("fixture backend: cannot open " + path);
        return FixtureBackend::load(in);
    }
    throw UsageError("backend must be 'live' or 'fixture:PATH', got '" + config.backend + "'");
}

}  // namespace nsflow
