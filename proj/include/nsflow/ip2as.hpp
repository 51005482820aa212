#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsflow/ingest.hpp"
#include "nsflow/net.hpp"

namespace nsflow {

struct Attribution {
    IpAddress ip;
    std::optional<IpNetwork> matched_prefix;
    std::optional<std::uint32_t> asn;  // first-listed origin of the matched prefix
    std::optional<AsOrg> org;          // absent when the ASN is not in the org map

    bool matched() const { return matched_prefix.has_value(); }
};

/// Compiled longest-prefix-match index over both address families.
/// Immutable after build; lookups are const and safe to share across threads.
class LpmIndex {
public:
    LpmIndex() = default;

    struct BuildStats {
        std::uint64_t v4_entries = 0;
        std::uint64_t v6_entries = 0;
        std::uint64_t duplicates_collapsed = 0;  // same prefix seen again, last wins
    };

    static LpmIndex build(std::span<const PrefixOrigin> prefixes,
                          std::string dataset_label = {});

    const BuildStats& stats() const { return stats_; }
    const std::string& dataset_label() const { return label_; }

    /// Longest covering prefix for ip, or a miss with all fields absent.
    Attribution lookup(const IpAddress& ip,
                       const std::map<std::uint32_t, AsOrg>& orgs) const;

    /// Raw match without the org join: (prefix, origins, moas_kind).
    const PrefixOrigin* match(const IpAddress& ip) const;

private:
    struct Node {
        std::int32_t child[2] = {-1, -1};
        std::int32_t payload = -1;  // index into payloads_, -1 = no prefix ends here
    };

    struct Trie {
        std::vector<Node> nodes;  // nodes[0] is the root once non-empty
        void ensure_root();
        void insert(const IpNetwork& prefix, std::int32_t payload_index,
                    std::vector<std::int32_t>& slot_of_payload, std::uint64_t& collapsed);
        std::int32_t find_longest(const IpAddress& ip) const;
    };

    Trie v4_;
    Trie v6_;
    std::vector<PrefixOrigin> payloads_;
    BuildStats stats_;
    std::string label_;
};

}  // namespace nsflow
