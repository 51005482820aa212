#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsflow/net.hpp"

namespace nsflow {

enum class ResolveStatus : std::uint8_t { ok, no_ns_records, resolution_failed, timed_out };

std::string to_string(ResolveStatus status);
std::optional<ResolveStatus> resolve_status_from_string(std::string_view text);

/// NS answers for one domain plus the A/AAAA answers for each NS hostname.
/// status reflects the NS query outcome only; per-host address failures leave
/// an empty address set behind for audit.
struct NsRecordSet {
    DomainName domain;
    ResolveStatus status = ResolveStatus::resolution_failed;
    std::set<DomainName> ns_hosts;
    std::map<DomainName, std::set<IpAddress>> ns_addresses;  // keys ⊆ ns_hosts
    std::time_t queried_at = 0;  // UTC epoch seconds
    std::string error_detail;

    bool operator==(const NsRecordSet& other) const {
        return domain == other.domain && status == other.status && ns_hosts == other.ns_hosts &&
               ns_addresses == other.ns_addresses && error_detail == other.error_detail;
        // queried_at intentionally excluded: runs differ only by clock
    }
};

struct ResolverPolicy {
    std::chrono::milliseconds timeout{3000};  // per query, first attempt
    int retries = 2;                          // exponential backoff, 2x per attempt
    int max_in_flight = 64;
    double queries_per_second = 200.0;
    std::vector<std::string> upstreams;  // "ip" or "ip:port" for the live backend
    // Consecutive domains failing at the transport level before the batch
    // aborts as backend-unreachable. SERVFAIL/REFUSED/NXDOMAIN reset the
    // window since they prove the upstream is alive.
    int unreachable_window = 100;
};

enum class QueryType : std::uint8_t { ns, a, aaaa };

enum class QueryStatus : std::uint8_t {
    ok,             // answer present (may still carry zero records of the asked type)
    nxdomain,
    servfail,
    refused,
    timeout,
    network_error,  // transport-level failure, upstream possibly unreachable
};

/// One backend answer. For NS queries `names` holds NS targets; for A/AAAA
/// queries `addresses` holds terminal addresses and `cname` an alias target
/// when the upstream answered with an unterminated CNAME chain.
struct QueryAnswer {
    QueryStatus status = QueryStatus::network_error;
    std::vector<DomainName> names;
    std::vector<IpAddress> addresses;
    std::optional<DomainName> cname;
    std::string detail;
};

/// Pluggable resolution backend. Implementations must be safe for concurrent
/// query() calls.
class DnsBackend {
public:
    virtual ~DnsBackend() = default;
    virtual QueryAnswer query(const DomainName& name, QueryType type,
                              std::chrono::milliseconds timeout) = 0;
};

/// Deterministic backend answering from an in-memory snapshot; the offline
/// counterpart of the live stub client. Loadable from the line-delimited
/// fixture format described in docs/formats.md.
class FixtureBackend : public DnsBackend {
public:
    struct DomainRecord {
        ResolveStatus status = ResolveStatus::ok;
        std::vector<DomainName> ns_hosts;
        std::string error_detail;
    };

    static std::shared_ptr<FixtureBackend> load(std::istream& in);

    void add_domain(const DomainName& domain, DomainRecord record);
    void add_address(const DomainName& host, const IpAddress& address);
    void add_cname(const DomainName& from, const DomainName& to);

    QueryAnswer query(const DomainName& name, QueryType type,
                      std::chrono::milliseconds timeout) override;

private:
    std::map<DomainName, DomainRecord> domains_;
    std::map<DomainName, std::set<IpAddress>> addresses_;
    std::map<DomainName, DomainName> cnames_;
};

/// Token-bucket rate limiter. Capacity bounds the burst, refill rate is the
/// sustained budget. Clock and sleep are injectable for tests.
class TokenBucket {
public:
    using Clock = std::chrono::steady_clock;
    using NowFn = std::function<Clock::time_point()>;
    using SleepFn = std::function<void(std::chrono::microseconds)>;

    TokenBucket(double tokens_per_second, double capacity);
    TokenBucket(double tokens_per_second, double capacity, NowFn now, SleepFn sleep);

    void acquire();  // blocks until a token is available

private:
    double rate_;
    double capacity_;
    double available_;
    Clock::time_point last_refill_;
    NowFn now_;
    SleepFn sleep_;
    std::mutex mutex_;
};

struct BatchProgress {
    std::uint64_t done = 0;
    std::uint64_t ok = 0;
    std::uint64_t failed = 0;  // any non-ok final status
};

using ProgressSink = std::function<void(const BatchProgress&)>;

/// Thrown when the backend looks unreachable for a sustained window; carries
/// how far the batch got so the operator can checkpoint and resume.
struct BatchAborted : std::runtime_error {
    BatchAborted(std::string message, std::uint64_t completed_count)
        : std::runtime_error(std::move(message)), completed(completed_count) {}
    std::uint64_t completed;
};

/// NS for the domain, then A and AAAA for every NS host. CNAME chains at the
/// address step are followed up to 8 hops, then cut and flagged in
/// error_detail.
NsRecordSet resolve_domain(const DomainName& domain, const ResolverPolicy& policy,
                           DnsBackend& backend);

/// Resolves every domain, bounded by policy.max_in_flight concurrent domains
/// and the query budget. Output order matches input order; every input yields
/// exactly one record set.
std::vector<NsRecordSet> resolve_batch(const std::vector<DomainName>& domains,
                                       const ResolverPolicy& policy, DnsBackend& backend,
                                       const ProgressSink& progress = {});

}  // namespace nsflow
