// Manual live-network smoke check (not part of ctest): resolves wikipedia.org
// through a real recursive resolver and expects a non-empty NS set. No
// assertions on specific IPs or organizations; the live DNS state drifts.
//
// Usage: live_smoke [resolver-ip[:port]] (default 9.9.9.9)

#include <cstdio>
#include <iostream>

#include "nsflow/dns_client.hpp"
#include "nsflow/resolver.hpp"

using namespace nsflow;

int main(int argc, char** argv) {
    std::string upstream = argc > 1 ? argv[1] : "9.9.9.9";
    try {
        LiveDnsBackend backend({upstream});
        ResolverPolicy policy;
        policy.timeout = std::chrono::milliseconds(3000);
        policy.retries = 2;

        NsRecordSet record = resolve_domain("wikipedia.org", policy, backend);
        std::printf("status: %s\n", to_string(record.status).c_str());
        for (const auto& host : record.ns_hosts) {
            std::printf("ns: %s\n", host.c_str());
            auto it = record.ns_addresses.find(host);
            if (it != record.ns_addresses.end()) {
                for (const auto& ip : it->second) std::printf("  %s\n", ip.to_string().c_str());
            }
        }
        if (record.status != ResolveStatus::ok || record.ns_hosts.empty()) {
            std::printf("SMOKE FAIL: no NS records via %s\n", upstream.c_str());
            return 1;
        }
        std::printf("SMOKE PASS: %zu NS hosts via %s\n", record.ns_hosts.size(),
                    upstream.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::printf("SMOKE FAIL: %s\n", e.what());
        return 1;
    }
}
