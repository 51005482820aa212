#include "nsflow/dns_client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <random>

#include "nsflow/dns_wire.hpp"
#include "nsflow/errors.hpp"

namespace nsflow {

namespace {

struct SocketGuard {
    int fd = -1;
    ~SocketGuard() {
        if (fd >= 0) ::close(fd);
    }
};

std::uint16_t random_id() {
    thread_local std::mt19937 rng{std::random_device{}()};
    return static_cast<std::uint16_t>(rng() & 0xFFFF);
}

std::uint16_t qtype_of(QueryType type) {
    switch (type) {
        case QueryType::ns: return dns::kTypeNS;
        case QueryType::a: return dns::kTypeA;
        case QueryType::aaaa: return dns::kTypeAAAA;
    }
    return dns::kTypeA;
}

int make_sockaddr(const IpAddress& ip, std::uint16_t port, sockaddr_storage& storage,
                  socklen_t& len) {
    std::memset(&storage, 0, sizeof(storage));
    if (ip.family == IpFamily::v4) {
        auto* sa = reinterpret_cast<sockaddr_in*>(&storage);
        sa->sin_family = AF_INET;
        sa->sin_port = htons(port);
        std::memcpy(&sa->sin_addr, ip.bytes.data(), 4);
        len = sizeof(sockaddr_in);
        return AF_INET;
    }
    auto* sa = reinterpret_cast<sockaddr_in6*>(&storage);
    sa->sin6_family = AF_INET6;
    sa->sin6_port = htons(port);
    std::memcpy(&sa->sin6_addr, ip.bytes.data(), 16);
    len = sizeof(sockaddr_in6);
    return AF_INET6;
}

enum class ExchangeResult { ok, timeout, network_error };

ExchangeResult udp_exchange(const IpAddress& ip, std::uint16_t port,
                            const std::vector<std::uint8_t>& request,
                            std::chrono::milliseconds timeout,
                            std::vector<std::uint8_t>& response) {
    sockaddr_storage addr{};
    socklen_t addr_len = 0;
    int family = make_sockaddr(ip, port, addr, addr_len);

    SocketGuard sock{::socket(family, SOCK_DGRAM, 0)};
    if (sock.fd < 0) return ExchangeResult::network_error;

    if (::sendto(sock.fd, request.data(), request.size(), 0,
                 reinterpret_cast<sockaddr*>(&addr), addr_len) < 0) {
        return ExchangeResult::network_error;
    }

    pollfd pfd{sock.fd, POLLIN, 0};
    int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (ready == 0) return ExchangeResult::timeout;
    if (ready < 0) return ExchangeResult::network_error;

    response.resize(65536);
    ssize_t n = ::recvfrom(sock.fd, response.data(), response.size(), 0, nullptr, nullptr);
    if (n <= 0) return ExchangeResult::network_error;
    response.resize(static_cast<std::size_t>(n));
    return ExchangeResult::ok;
}

ExchangeResult tcp_exchange(const IpAddress& ip, std::uint16_t port,
                            const std::vector<std::uint8_t>& request,
                            std::chrono::milliseconds timeout,
                            std::vector<std::uint8_t>& response) {
    sockaddr_storage addr{};
    socklen_t addr_len = 0;
    int family = make_sockaddr(ip, port, addr, addr_len);

    SocketGuard sock{::socket(family, SOCK_STREAM, 0)};
    if (sock.fd < 0) return ExchangeResult::network_error;

    timeval tv{};
    tv.tv_sec = timeout.count() / 1000;
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(sock.fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(sock.fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

    if (::connect(sock.fd, reinterpret_cast<sockaddr*>(&addr), addr_len) < 0) {
        return ExchangeResult::network_error;
    }

    // Two-byte length prefix per RFC 1035 4.2.2.
    std::vector<std::uint8_t> framed;
    framed.reserve(request.size() + 2);
    framed.push_back(static_cast<std::uint8_t>(request.size() >> 8));
    framed.push_back(static_cast<std::uint8_t>(request.size() & 0xFF));
    framed.insert(framed.end(), request.begin(), request.end());
    if (::send(sock.fd, framed.data(), framed.size(), 0) !=
        static_cast<ssize_t>(framed.size())) {
        return ExchangeResult::network_error;
    }

    auto read_exact = [&](std::uint8_t* buf, std::size_t want) -> ExchangeResult {
        std::size_t got = 0;
        while (got < want) {
            ssize_t n = ::recv(sock.fd, buf + got, want - got, 0);
            if (n == 0) return ExchangeResult::network_error;
            if (n < 0) {
                return (errno == EAGAIN || errno == EWOULDBLOCK) ? ExchangeResult::timeout
                                                                 : ExchangeResult::network_error;
            }
            got += static_cast<std::size_t>(n);
        }
        return ExchangeResult::ok;
    };

    std::uint8_t len_buf[2];
    auto r = read_exact(len_buf, 2);
    if (r != ExchangeResult::ok) return r;
    std::size_t length = (static_cast<std::size_t>(len_buf[0]) << 8) | len_buf[1];
    response.resize(length);
    return read_exact(response.data(), length);
}

}  // namespace

LiveDnsBackend::LiveDnsBackend(const std::vector<std::string>& upstreams) {
    for (const auto& entry : upstreams) {
        Endpoint ep;
        std::string host = entry;
        // "ip:port" applies to v4 only; bracketless v6 keeps its colons.
        auto colon = entry.rfind(':');
        if (colon != std::string::npos && entry.find(':') == colon) {
            host = entry.substr(0, colon);
            ep.port = static_cast<std::uint16_t>(std::stoi(entry.substr(colon + 1)));
        }
        auto ip = IpAddress::parse(host);
        if (!ip) throw UsageError("live backend: bad upstream address: " + entry);
        ep.address = *ip;
        endpoints_.push_back(ep);
    }
    if (endpoints_.empty()) throw UsageError("live backend: no upstream resolvers configured");
}

QueryAnswer LiveDnsBackend::query(const DomainName& name, QueryType type,
                                  std::chrono::milliseconds timeout) {
    QueryAnswer answer;
    std::uint16_t qtype = qtype_of(type);
    std::uint16_t id = random_id();
    std::vector<std::uint8_t> request;
    try {
        request = dns::encode_query(id, name, qtype);
    } catch (const FormatError& e) {
        answer.status = QueryStatus::network_error;
        answer.detail = e.what();
        return answer;
    }

    ExchangeResult last = ExchangeResult::network_error;
    for (const auto& ep : endpoints_) {
        std::vector<std::uint8_t> wire;
        last = udp_exchange(ep.address, ep.port, request, timeout, wire);
        if (last != ExchangeResult::ok) continue;

        auto msg = dns::parse_message(wire);
        if (!msg || msg->id != id) {
            last = ExchangeResult::network_error;
            continue;
        }
        if (msg->truncated) {
            last = tcp_exchange(ep.address, ep.port, request, timeout, wire);
            if (last != ExchangeResult::ok) continue;
            msg = dns::parse_message(wire);
            if (!msg || msg->id != id) {
                last = ExchangeResult::network_error;
                continue;
            }
        }

        switch (msg->rcode) {
            case dns::kRcodeNoError: break;
            case dns::kRcodeNxDomain: answer.status = QueryStatus::nxdomain; return answer;
            case dns::kRcodeServFail: answer.status = QueryStatus::servfail; return answer;
            case dns::kRcodeRefused: answer.status = QueryStatus::refused; return answer;
            default:
                answer.status = QueryStatus::servfail;
                answer.detail = "rcode " + std::to_string(msg->rcode);
                return answer;
        }

        answer.status = QueryStatus::ok;
        std::string last_cname;
        for (const auto& rr : msg->answers) {
            if (rr.klass != dns::kClassIN) continue;
            if (rr.type == dns::kTypeNS && qtype == dns::kTypeNS) {
                answer.names.push_back(normalize_domain(rr.rdata_name));
            } else if (rr.type == dns::kTypeA && qtype == dns::kTypeA && rr.rdata.size() == 4) {
                IpAddress ip;
                ip.family = IpFamily::v4;
                std::copy(rr.rdata.begin(), rr.rdata.end(), ip.bytes.begin());
                answer.addresses.push_back(ip);
            } else if (rr.type == dns::kTypeAAAA && qtype == dns::kTypeAAAA &&
                       rr.rdata.size() == 16) {
                IpAddress ip;
                ip.family = IpFamily::v6;
                std::copy(rr.rdata.begin(), rr.rdata.end(), ip.bytes.begin());
                answer.addresses.push_back(ip);
            } else if (rr.type == dns::kTypeCNAME) {
                last_cname = rr.rdata_name;
            }
        }
        // Recursive resolvers usually inline the full CNAME chain; if the
        // chain ended without addresses, surface the tail for re-query.
        if (answer.addresses.empty() && qtype != dns::kTypeNS && !last_cname.empty()) {
            answer.cname = normalize_domain(last_cname);
        }
        return answer;
    }

    answer.status = last == ExchangeResult::timeout ? QueryStatus::timeout
                                                    : QueryStatus::network_error;
    if (answer.status == QueryStatus::network_error) answer.detail = "no upstream reachable";
    return answer;
}

}  // namespace nsflow
