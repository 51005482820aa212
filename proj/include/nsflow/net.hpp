#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nsflow {

enum class IpFamily : std::uint8_t { v4, v6 };

constexpr unsigned address_bits(IpFamily family) {
    return family == IpFamily::v4 ? 32 : 128;
}

/// An IPv4 or IPv6 address. v4 uses the first 4 bytes, v6 all 16.
struct IpAddress {
    IpFamily family = IpFamily::v4;
    std::array<std::uint8_t, 16> bytes{};

    static std::optional<IpAddress> parse(std::string_view text);

    unsigned width() const { return address_bits(family); }

    // Bit i of the address, MSB-first (bit 0 is the top bit of byte 0).
    int bit(unsigned i) const { return (bytes[i / 8] >> (7 - (i % 8))) & 1; }

    std::string to_string() const;

    auto operator<=>(const IpAddress&) const = default;
};

/// An IP network: base address plus prefix length. Host bits may be nonzero
/// until normalize() is called; parsers normalize before handing out values.
struct IpNetwork {
    IpAddress address;
    std::uint8_t prefix_len = 0;

    static std::optional<IpNetwork> parse(std::string_view text);  // "a.b.c.d/len"

    bool contains(const IpAddress& ip) const;
    bool host_bits_zero() const;
    void normalize();  // zero out bits beyond prefix_len

    std::string to_string() const;

    auto operator<=>(const IpNetwork&) const = default;
};

using DomainName = std::string;

/// Lowercases and strips one trailing dot. Does not validate.
DomainName normalize_domain(std::string_view raw);

/// Labels of 1-63 octets, total <= 253 octets, at least one dot.
bool is_valid_domain(std::string_view domain);

/// Suffix match on the domain string: ".br" matches "foo.br" but not "br"
/// itself and not "bar.brx".
bool has_suffix(std::string_view domain, std::string_view suffix);

}  // namespace nsflow
