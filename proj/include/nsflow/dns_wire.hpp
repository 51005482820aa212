#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsflow/net.hpp"

namespace nsflow {

// Minimal DNS message codec for the stub client: enough to issue NS/A/AAAA
// questions against a recursive resolver and read the answer section back,
// including compressed names.

namespace dns {

constexpr std::uint16_t kTypeA = 1;
constexpr std::uint16_t kTypeNS = 2;
constexpr std::uint16_t kTypeCNAME = 5;
constexpr std::uint16_t kTypeAAAA = 28;
constexpr std::uint16_t kClassIN = 1;

constexpr std::uint8_t kRcodeNoError = 0;
constexpr std::uint8_t kRcodeNxDomain = 3;
constexpr std::uint8_t kRcodeServFail = 2;
constexpr std::uint8_t kRcodeRefused = 5;

struct ResourceRecord {
    std::string name;
    std::uint16_t type = 0;
    std::uint16_t klass = 0;
    std::uint32_t ttl = 0;
    std::vector<std::uint8_t> rdata;
    std::string rdata_name;  // decoded target for NS/CNAME records
};

struct Message {
    std::uint16_t id = 0;
    bool truncated = false;
    bool authoritative = false;
    std::uint8_t rcode = 0;
    std::string question_name;
    std::uint16_t question_type = 0;
    std::vector<ResourceRecord> answers;
};

/// RD=1 query with a single question. Throws FormatError on an unencodable
/// name (label > 63 or total > 255 octets).
std::vector<std::uint8_t> encode_query(std::uint16_t id, const DomainName& name,
                                       std::uint16_t qtype);

/// Parses header, question, and answer section. Returns nullopt on any
/// malformed structure (bad offsets, pointer loops, truncated fields).
std::optional<Message> parse_message(std::span<const std::uint8_t> wire);

}  // namespace dns

}  // namespace nsflow
