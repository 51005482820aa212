#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsflow/resolver.hpp"

namespace nsflow {

/// Declarative run configuration. Flags override file values; the effective
/// config is echoed into every report for provenance.
struct RunConfig {
    std::string tranco_path;
    std::string prefix2as_v4_path;
    std::string prefix2as_v6_path;
    std::string as2org_path;
    std::string store_path = "nsflow.store";
    std::string backend = "live";  // "live" or "fixture:PATH"
    ResolverPolicy policy;
    std::optional<std::string> run_date;  // YYYY-MM-DD; defaults to today (UTC)
    // Named ccTLD groups; defaults: BRICS and EU per their political scopes.
    std::map<std::string, std::vector<std::string>> groups;

    static RunConfig defaults();
    static RunConfig load(const std::filesystem::path& path);

    /// Throws UsageError naming the first missing dataset path.
    void validate_dataset_paths() const;

    const std::vector<std::string>& group(const std::string& name) const;
};

/// Builds the configured backend. "fixture:PATH" loads a fixture snapshot;
/// "live" builds the UDP/TCP stub client from policy.upstreams.
std::shared_ptr<DnsBackend> make_backend(const RunConfig& config);

}  // namespace nsflow
