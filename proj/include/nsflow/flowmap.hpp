#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "nsflow/ip2as.hpp"
#include "nsflow/net.hpp"
#include "nsflow/resolver.hpp"

namespace nsflow {

/// Attribution of one NS IP inside a flow. When the origin ASN has no entry
/// in the org dataset, identity falls back to a synthetic "AS<asn>" org with
/// country "??", which keeps "unknown org" distinct from "unmapped IP".
struct AttributionEdge {
    IpNetwork prefix;
    std::uint32_t asn = 0;
    std::string as_name;
    std::string org_id;
    std::string org_name;
    std::string country;

    auto operator<=>(const AttributionEdge&) const = default;
};

/// Layered per-domain graph: domain -> NS hosts -> IPs -> AS/org/country.
struct ResolutionFlow {
    DomainName domain;
    ResolveStatus status = ResolveStatus::resolution_failed;
    std::time_t queried_at = 0;
    std::string error_detail;
    std::set<DomainName> ns_hosts;
    std::map<DomainName, std::set<IpAddress>> ns_addresses;
    std::map<IpAddress, AttributionEdge> attributions;  // IPs with an LPM match
    std::set<IpAddress> unmapped_ips;                   // IPs without one

    bool operator==(const ResolutionFlow&) const = default;
};

struct SnapshotMeta {
    std::string run_date;  // YYYY-MM-DD, UTC
    std::string tranco_label;
    std::string prefix2as_v4_label;
    std::string prefix2as_v6_label;
    std::string as2org_label;

    bool operator==(const SnapshotMeta&) const = default;
};

struct SnapshotCounters {
    std::uint64_t input = 0;  // accepted flows; equals ok + no_ns + failed + timed_out
    std::uint64_t ok = 0;
    std::uint64_t no_ns = 0;
    std::uint64_t failed = 0;
    std::uint64_t timed_out = 0;
    std::uint64_t unmapped_ip = 0;          // sum of per-flow unmapped IP counts
    std::uint64_t duplicate_domains = 0;    // rejected duplicate-domain flows

    bool operator==(const SnapshotCounters&) const = default;
};

struct MeasurementSnapshot {
    std::string snapshot_id;
    SnapshotMeta meta;
    SnapshotCounters counters;
    std::vector<ResolutionFlow> flows;  // insertion order, one per domain

    bool operator==(const MeasurementSnapshot&) const = default;
};

/// Joins one NsRecordSet with the LPM index: v4 addresses go to the v4
/// table, v6 to the v6 table; misses land in unmapped_ips. Degenerate inputs
/// produce flows with empty layers and the carried status.
ResolutionFlow map_flow(const NsRecordSet& records, const LpmIndex& index,
                        const std::map<std::uint32_t, AsOrg>& orgs);

/// Content-derived snapshot id: run date plus a hash over meta and flows,
/// excluding queried_at so reruns of the same fixtures are idempotent.
std::string compute_snapshot_id(const std::vector<ResolutionFlow>& flows,
                                const SnapshotMeta& meta);

/// Single-file append-only tabular store. Rows are line-delimited JSON
/// objects tagged with their table; a snapshot becomes visible only once its
/// commit row is written, so interrupted writes leave nothing visible.
/// One writer per file; any number of concurrent readers of committed data.
class SnapshotStore {
public:
    explicit SnapshotStore(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    /// Persists one run. Duplicate domains within the stream are rejected and
    /// counted. Re-persisting content that hashes to an existing committed id
    /// is a no-op returning that id. Throws IoError and leaves no partial
    /// snapshot visible on write failure.
    std::string persist(const std::vector<ResolutionFlow>& flows, const SnapshotMeta& meta);

    /// Throws NotFoundError for unknown ids.
    MeasurementSnapshot load(const std::string& snapshot_id) const;

    bool contains(const std::string& snapshot_id) const;
    std::vector<std::string> list() const;  // committed ids in commit order

    struct Audit {
        bool ok = true;
        std::string detail;
    };
    /// Recomputes counters from stored rows and checks the arithmetic
    /// (input = ok + no_ns + failed + timed_out, unmapped sum).
    Audit audit(const std::string& snapshot_id) const;

    /// Line-delimited export: the fixture schema plus attribution fields.
    void export_snapshot(const std::string& snapshot_id, std::ostream& out) const;

private:
    std::filesystem::path path_;
};

}  // namespace nsflow
