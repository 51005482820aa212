#include "nsflow/resolver.hpp"

#include <atomic>
#include <ctime>
#include <thread>

#include <json.hpp>

#include "nsflow/errors.hpp"

namespace nsflow {

std::string to_string(ResolveStatus status) {
    switch (status) {
        case ResolveStatus::ok: return "ok";
        case ResolveStatus::no_ns_records: return "no_ns_records";
        case ResolveStatus::resolution_failed: return "resolution_failed";
        case ResolveStatus::timed_out: return "timed_out";
    }
    return "resolution_failed";
}

std::optional<ResolveStatus> resolve_status_from_string(std::string_view text) {
    if (text == "ok") return ResolveStatus::ok;
    if (text == "no_ns_records") return ResolveStatus::no_ns_records;
    if (text == "resolution_failed") return ResolveStatus::resolution_failed;
    if (text == "timed_out") return ResolveStatus::timed_out;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// FixtureBackend

std::shared_ptr<FixtureBackend> FixtureBackend::load(std::istream& in) {
    if (in.fail()) throw IoError("fixture: unreadable stream");
    auto backend = std::make_shared<FixtureBackend>();

    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("fixture line " + std::to_string(line_no) + ": " + e.what());
        }

        if (record.contains("cname")) {
            const auto& c = record.at("cname");
            backend->add_cname(normalize_domain(c.at("from").get<std::string>()),
                               normalize_domain(c.at("to").get<std::string>()));
            continue;
        }

        DomainRecord rec;
        DomainName domain = normalize_domain(record.at("domain").get<std::string>());
        if (record.contains("status")) {
            auto status = resolve_status_from_string(record.at("status").get<std::string>());
            if (!status) {
                throw FormatError("fixture line " + std::to_string(line_no) +
                                  ": unknown status");
            }
            rec.status = *status;
        }
        if (record.contains("error_detail")) {
            rec.error_detail = record.at("error_detail").get<std::string>();
        }
        if (record.contains("ns_hosts")) {
            for (const auto& h : record.at("ns_hosts")) {
                rec.ns_hosts.push_back(normalize_domain(h.get<std::string>()));
            }
        }
        if (rec.status == ResolveStatus::ok && rec.ns_hosts.empty()) {
            throw FormatError("fixture line " + std::to_string(line_no) +
                              ": status ok requires ns_hosts");
        }
        if (record.contains("ns_addresses")) {
            for (const auto& [host, ips] : record.at("ns_addresses").items()) {
                DomainName key = normalize_domain(host);
                for (const auto& ip_text : ips) {
                    auto ip = IpAddress::parse(ip_text.get<std::string>());
                    if (!ip) {
                        throw FormatError("fixture line " + std::to_string(line_no) +
                                          ": bad address " + ip_text.get<std::string>());
                    }
                    backend->add_address(key, *ip);
                }
            }
        }
        backend->add_domain(domain, std::move(rec));
    }
    if (in.bad()) throw IoError("fixture: stream read failure");
    return backend;
}

void FixtureBackend::add_domain(const DomainName& domain, DomainRecord record) {
    domains_[domain] = std::move(record);
}

void FixtureBackend::add_address(const DomainName& host, const IpAddress& address) {
    addresses_[host].insert(address);
}

void FixtureBackend::add_cname(const DomainName& from, const DomainName& to) {
    cnames_[from] = to;
}

QueryAnswer FixtureBackend::query(const DomainName& name, QueryType type,
                                  std::chrono::milliseconds) {
    QueryAnswer answer;
    if (type == QueryType::ns) {
        auto it = domains_.find(name);
        if (it == domains_.end()) {
            answer.status = QueryStatus::nxdomain;
            return answer;
        }
        switch (it->second.status) {
            case ResolveStatus::ok:
                answer.status = QueryStatus::ok;
                answer.names = it->second.ns_hosts;
                return answer;
            case ResolveStatus::no_ns_records:
                answer.status = QueryStatus::ok;  // NODATA: empty NS answer
                return answer;
            case ResolveStatus::resolution_failed:
                answer.status = QueryStatus::servfail;
                answer.detail = it->second.error_detail;
                return answer;
            case ResolveStatus::timed_out:
                answer.status = QueryStatus::timeout;
                return answer;
        }
    }

    // A/AAAA step
    auto cname = cnames_.find(name);
    if (cname != cnames_.end()) {
        answer.status = QueryStatus::ok;
        answer.cname = cname->second;
        return answer;
    }
    answer.status = QueryStatus::ok;
    auto it = addresses_.find(name);
    if (it != addresses_.end()) {
        IpFamily want = type == QueryType::a ? IpFamily::v4 : IpFamily::v6;
        for (const auto& ip : it->second) {
            if (ip.family == want) answer.addresses.push_back(ip);
        }
    }
    return answer;
}

// ---------------------------------------------------------------------------
// TokenBucket

TokenBucket::TokenBucket(double tokens_per_second, double capacity)
    : TokenBucket(tokens_per_second, capacity, [] { return Clock::now(); },
                  [](std::chrono::microseconds d) { std::this_thread::sleep_for(d); }) {}

TokenBucket::TokenBucket(double tokens_per_second, double capacity, NowFn now, SleepFn sleep)
    : rate_(tokens_per_second),
      capacity_(capacity < 1.0 ? 1.0 : capacity),
      available_(capacity_),
      now_(std::move(now)),
      sleep_(std::move(sleep)) {
    last_refill_ = now_();
}

void TokenBucket::acquire() {
    while (true) {
        std::chrono::microseconds wait{0};
        {
            std::lock_guard lock(mutex_);
            auto now = now_();
            auto elapsed = std::chrono::duration<double>(now - last_refill_).count();
            last_refill_ = now;
            available_ = std::min(capacity_, available_ + elapsed * rate_);
            if (available_ >= 1.0) {
                available_ -= 1.0;
                return;
            }
            double deficit_seconds = (1.0 - available_) / rate_;
            wait = std::chrono::microseconds(static_cast<std::int64_t>(deficit_seconds * 1e6) + 1);
        }
        sleep_(wait);
    }
}

// ---------------------------------------------------------------------------
// resolve_domain / resolve_batch

namespace {

constexpr int kMaxCnameDepth = 8;

// Retries apply to timeouts only; each attempt doubles its timeout.
QueryAnswer query_with_retries(DnsBackend& backend, const DomainName& name, QueryType type,
                               const ResolverPolicy& policy) {
    auto timeout = policy.timeout;
    QueryAnswer answer;
    for (int attempt = 0; attempt <= policy.retries; ++attempt) {
        answer = backend.query(name, type, timeout);
        if (answer.status != QueryStatus::timeout) return answer;
        timeout *= 2;
    }
    return answer;
}

void collect_addresses(DnsBackend& backend, const ResolverPolicy& policy,
                       const DomainName& host, QueryType type, std::set<IpAddress>& out,
                       std::string& error_detail) {
    DomainName current = host;
    for (int depth = 0;; ++depth) {
        QueryAnswer answer = query_with_retries(backend, current, type, policy);
        if (!answer.addresses.empty()) {
            out.insert(answer.addresses.begin(), answer.addresses.end());
            return;
        }
        if (answer.status == QueryStatus::ok && answer.cname) {
            if (depth + 1 > kMaxCnameDepth) {
                if (error_detail.find("cname chain cut") == std::string::npos) {
                    if (!error_detail.empty()) error_detail += "; ";
                    error_detail += "cname chain cut at " + host;
                }
                return;
            }
            current = normalize_domain(*answer.cname);
            continue;
        }
        return;  // NODATA or per-host failure: host kept with empty set
    }
}

NsRecordSet resolve_domain_impl(const DomainName& domain, const ResolverPolicy& policy,
                                DnsBackend& backend, bool& transport_failure) {
    NsRecordSet record;
    record.domain = normalize_domain(domain);
    record.queried_at = std::time(nullptr);
    transport_failure = false;

    QueryAnswer ns = query_with_retries(backend, record.domain, QueryType::ns, policy);
    switch (ns.status) {
        case QueryStatus::ok:
            if (ns.names.empty()) {
                record.status = ResolveStatus::no_ns_records;
                return record;
            }
            record.status = ResolveStatus::ok;
            break;
        case QueryStatus::nxdomain:
            record.status = ResolveStatus::no_ns_records;
            return record;
        case QueryStatus::servfail:
        case QueryStatus::refused:
            record.status = ResolveStatus::resolution_failed;
            record.error_detail = ns.detail.empty()
                                      ? (ns.status == QueryStatus::servfail ? "SERVFAIL" : "REFUSED")
                                      : ns.detail;
            return record;
        case QueryStatus::network_error:
            record.status = ResolveStatus::resolution_failed;
            record.error_detail = ns.detail.empty() ? "network error" : ns.detail;
            transport_failure = true;
            return record;
        case QueryStatus::timeout:
            record.status = ResolveStatus::timed_out;
            transport_failure = true;
            return record;
    }

    for (const auto& raw_host : ns.names) {
        DomainName host = normalize_domain(raw_host);
        if (host.empty()) continue;
        record.ns_hosts.insert(host);
    }
    for (const auto& host : record.ns_hosts) {
        auto& addrs = record.ns_addresses[host];
        collect_addresses(backend, policy, host, QueryType::a, addrs, record.error_detail);
        collect_addresses(backend, policy, host, QueryType::aaaa, addrs, record.error_detail);
    }
    return record;
}

/// Charges one token per backend query so the batch honors the budget.
class RateLimitedBackend : public DnsBackend {
public:
    RateLimitedBackend(DnsBackend& inner, TokenBucket& bucket) : inner_(inner), bucket_(bucket) {}
    QueryAnswer query(const DomainName& name, QueryType type,
                      std::chrono::milliseconds timeout) override {
        bucket_.acquire();
        return inner_.query(name, type, timeout);
    }

private:
    DnsBackend& inner_;
    TokenBucket& bucket_;
};

}  // namespace

NsRecordSet resolve_domain(const DomainName& domain, const ResolverPolicy& policy,
                           DnsBackend& backend) {
    bool transport_failure = false;
    return resolve_domain_impl(domain, policy, backend, transport_failure);
}

std::vector<NsRecordSet> resolve_batch(const std::vector<DomainName>& domains,
                                       const ResolverPolicy& policy, DnsBackend& backend,
                                       const ProgressSink& progress) {
    std::vector<NsRecordSet> results(domains.size());
    if (domains.empty()) return results;

    TokenBucket bucket(policy.queries_per_second,
                       static_cast<double>(std::max(policy.max_in_flight, 1)));
    RateLimitedBackend limited(backend, bucket);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    std::mutex state_mutex;
    BatchProgress counts;
    int consecutive_transport_failures = 0;

    auto worker = [&] {
        while (!abort.load(std::memory_order_relaxed)) {
            std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= domains.size()) return;

            bool transport_failure = false;
            results[i] = resolve_domain_impl(domains[i], policy, limited, transport_failure);

            std::lock_guard lock(state_mutex);
            ++counts.done;
            if (results[i].status == ResolveStatus::ok) {
                ++counts.ok;
            } else {
                ++counts.failed;
            }
            if (transport_failure) {
                ++consecutive_transport_failures;
                if (policy.unreachable_window > 0 &&
                    consecutive_transport_failures >= policy.unreachable_window) {
                    abort.store(true, std::memory_order_relaxed);
                }
            } else {
                consecutive_transport_failures = 0;
            }
            if (progress) progress(counts);
        }
    };

    std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(policy.max_in_flight, 1)),
                              domains.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (abort.load()) {
        std::uint64_t completed;
        {
            std::lock_guard lock(state_mutex);
            completed = counts.done;
        }
        throw BatchAborted("backend unreachable for " +
                               std::to_string(policy.unreachable_window) +
                               " consecutive domains",
                           completed);
    }
    return results;
}

}  // namespace nsflow
