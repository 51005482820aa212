#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsflow/resolver.hpp"

namespace nsflow {

/// Live stub-resolver backend: standard DNS over UDP port 53 against one or
/// more recursive resolvers, with TCP fallback on truncation. Each query uses
/// its own socket, so concurrent use is safe.
class LiveDnsBackend : public DnsBackend {
public:
    /// upstreams: "ip" or "ip:port" entries, tried in order per query.
    explicit LiveDnsBackend(const std::vector<std::string>& upstreams);

    QueryAnswer query(const DomainName& name, QueryType type,
                      std::chrono::milliseconds timeout) override;

private:
    struct Endpoint {
        IpAddress address;
        std::uint16_t port = 53;
    };
    std::vector<Endpoint> endpoints_;
};

}  // namespace nsflow
