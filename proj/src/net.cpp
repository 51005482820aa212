#include "nsflow/net.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <charconv>
#include <cstring>

namespace nsflow {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
    char buf[INET6_ADDRSTRLEN];
    if (text.empty() || text.size() >= sizeof(buf)) return std::nullopt;
    std::memcpy(buf, text.data(), text.size());
    buf[text.size()] = '\0';

    IpAddress out;
    if (text.find(':') != std::string_view::npos) {
        out.family = IpFamily::v6;
        if (inet_pton(AF_INET6, buf, out.bytes.data()) != 1) return std::nullopt;
    } else {
        out.family = IpFamily::v4;
        if (inet_pton(AF_INET, buf, out.bytes.data()) != 1) return std::nullopt;
    }
    return out;
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {0};
    if (family == IpFamily::v4) {
        inet_ntop(AF_INET, bytes.data(), buf, sizeof(buf));
    } else {
        inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf));
    }
    return buf;
}

std::optional<IpNetwork> IpNetwork::parse(std::string_view text) {
    auto slash = text.rfind('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto addr = IpAddress::parse(text.substr(0, slash));
    if (!addr) return std::nullopt;

    auto len_text = text.substr(slash + 1);
    unsigned len = 0;
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size()) return std::nullopt;
    if (len > address_bits(addr->family)) return std::nullopt;

    IpNetwork net{*addr, static_cast<std::uint8_t>(len)};
    net.normalize();
    return net;
}

bool IpNetwork::contains(const IpAddress& ip) const {
    if (ip.family != address.family) return false;
    unsigned full = prefix_len / 8;
    if (full > 0 && std::memcmp(ip.bytes.data(), address.bytes.data(), full) != 0) return false;
    unsigned rem = prefix_len % 8;
    if (rem == 0) return true;
    std::uint8_t mask = static_cast<std::uint8_t>(0xFF << (8 - rem));
    return (ip.bytes[full] & mask) == (address.bytes[full] & mask);
}

bool IpNetwork::host_bits_zero() const {
    unsigned width = address.width();
    for (unsigned i = prefix_len; i < width; ++i) {
        if (address.bit(i)) return false;
    }
    return true;
}

void IpNetwork::normalize() {
    unsigned full = prefix_len / 8;
    unsigned rem = prefix_len % 8;
    unsigned total = address.width() / 8;
    if (rem != 0) {
        std::uint8_t mask = static_cast<std::uint8_t>(0xFF << (8 - rem));
        address.bytes[full] &= mask;
        ++full;
    }
    for (unsigned i = full; i < total; ++i) address.bytes[i] = 0;
}

std::string IpNetwork::to_string() const {
    return address.to_string() + "/" + std::to_string(prefix_len);
}

DomainName normalize_domain(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (!out.empty() && out.back() == '.') out.pop_back();
    return out;
}

bool is_valid_domain(std::string_view domain) {
    if (domain.empty() || domain.size() > 253) return false;
    if (domain.find('.') == std::string_view::npos) return false;
    std::size_t label_len = 0;
    for (char c : domain) {
        if (c == '.') {
            if (label_len == 0 || label_len > 63) return false;
            label_len = 0;
        } else {
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') return false;
            ++label_len;
        }
    }
    return label_len >= 1 && label_len <= 63;
}

bool has_suffix(std::string_view domain, std::string_view suffix) {
    if (suffix.empty() || suffix.front() != '.') return false;
    if (domain.size() <= suffix.size()) return false;
    return domain.substr(domain.size() - suffix.size()) == suffix;
}

}  // namespace nsflow
