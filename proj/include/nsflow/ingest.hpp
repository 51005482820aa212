#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "nsflow/net.hpp"

namespace nsflow {

struct TrancoEntry {
    std::uint64_t rank = 0;  // 1-based, strictly increasing in file order
    DomainName domain;       // lowercase, no trailing dot

    auto operator<=>(const TrancoEntry&) const = default;
};

enum class MoasKind : std::uint8_t { single, multi_origin, as_set };

struct PrefixOrigin {
    IpNetwork prefix;                    // normalized: host bits zero
    std::vector<std::uint32_t> origins;  // ordered, non-empty, deduplicated
    MoasKind moas_kind = MoasKind::single;

    auto operator<=>(const PrefixOrigin&) const = default;
};

struct AsOrg {
    std::uint32_t asn = 0;
    std::string as_name;
    std::string org_id;
    std::string org_name;
    std::string country;  // ISO 3166-1 Alpha-2, or "??" when unknown

    auto operator<=>(const AsOrg&) const = default;
};

inline constexpr const char* kUnknownCountry = "??";

struct DatasetDiff {
    std::set<DomainName> added;
    std::set<DomainName> removed;
    // (domain, old_rank, new_rank) for domains present in both versions
    std::set<std::tuple<DomainName, std::uint64_t, std::uint64_t>> rank_changed;

    bool empty() const { return added.empty() && removed.empty() && rank_changed.empty(); }
};

struct TrancoParseResult {
    std::vector<TrancoEntry> entries;
    std::uint64_t skipped = 0;  // malformed lines
};

struct Prefix2AsParseResult {
    std::vector<PrefixOrigin> prefixes;
    std::uint64_t skipped = 0;
};

struct As2OrgParseResult {
    std::map<std::uint32_t, AsOrg> orgs;
    std::uint64_t skipped_joins = 0;   // AS rows whose org_id had no organization row
    std::uint64_t duplicate_asns = 0;  // last-wins overwrites
    std::uint64_t skipped = 0;         // malformed rows
};

// CSV "rank,domain" records, one per line. A first line whose rank field is
// non-numeric is treated as a header and skipped without counting. Later
// malformed lines are skipped and counted; the parse never aborts on them.
// Throws IoError if the stream is bad before any data could be read.
TrancoParseResult parse_tranco(std::istream& in);

// CAIDA routeviews prefix2as: "prefix<TAB>masklen<TAB>asn_spec". The spec is
// "N", "N_M" (multi-origin), or "N,M" (AS set); mixed specs split on '_'
// first, then ',', and flatten into origins with moas_kind=multi_origin.
// '#'-prefixed comment lines are skipped silently.
Prefix2AsParseResult parse_prefix2as(std::istream& in, IpFamily family);

// CAIDA as-org2info: pipe-delimited rows under "#format:" headers that
// announce the field order of the rows that follow. AS rows joining a
// missing org_id fall back to org_name=as_name, country="??" and count as a
// skipped join. Duplicate ASNs are last-wins. A stream that never declares a
// "#format:" header is a FormatError.
As2OrgParseResult parse_as2org(std::istream& in);

DatasetDiff diff_tranco(const std::vector<TrancoEntry>& old_list,
                        const std::vector<TrancoEntry>& new_list);

// Native-format writers; round-trip with the parsers above.
std::string to_prefix2as_line(const PrefixOrigin& entry);
std::string to_as2org_lines(const AsOrg& entry);  // org row + AS row

// Dataset version label: basename plus a content hash, pinned per snapshot.
std::string dataset_label(const std::string& path_or_name, std::istream& content);

}  // namespace nsflow
