#include "nsflow/ip2as.hpp"

namespace nsflow {

void LpmIndex::Trie::ensure_root() {
    if (nodes.empty()) nodes.emplace_back();
}

void LpmIndex::Trie::insert(const IpNetwork& prefix, std::int32_t payload_index,
                            std::vector<std::int32_t>& slot_of_payload,
                            std::uint64_t& collapsed) {
    ensure_root();
    std::int32_t current = 0;
    for (unsigned i = 0; i < prefix.prefix_len; ++i) {
        int bit = prefix.address.bit(i);
        if (nodes[current].child[bit] < 0) {
            nodes[current].child[bit] = static_cast<std::int32_t>(nodes.size());
            nodes.emplace_back();
        }
        current = nodes[current].child[bit];
    }
    if (nodes[current].payload >= 0) {
        // Same prefix again: last one wins.
        slot_of_payload[payload_index] = nodes[current].payload;
        ++collapsed;
    } else {
        nodes[current].payload = payload_index;
        slot_of_payload[payload_index] = payload_index;
    }
}

std::int32_t LpmIndex::Trie::find_longest(const IpAddress& ip) const {
    if (nodes.empty()) return -1;
    std::int32_t best = nodes[0].payload;
    std::int32_t current = 0;
    unsigned width = ip.width();
    for (unsigned i = 0; i < width; ++i) {
        current = nodes[current].child[ip.bit(i)];
        if (current < 0) break;
        if (nodes[current].payload >= 0) best = nodes[current].payload;
    }
    return best;
}

LpmIndex LpmIndex::build(std::span<const PrefixOrigin> prefixes, std::string dataset_label) {
    LpmIndex index;
    index.label_ = std::move(dataset_label);
    index.payloads_.reserve(prefixes.size());

    // slot_of_payload maps a staged entry to the payload slot it ended up in,
    // so duplicate prefixes overwrite in place (last wins).
    std::vector<std::int32_t> slot(prefixes.size(), -1);
    for (const auto& entry : prefixes) {
        auto staged = static_cast<std::int32_t>(index.payloads_.size());
        index.payloads_.push_back(entry);
        Trie& trie = entry.prefix.address.family == IpFamily::v4 ? index.v4_ : index.v6_;
        trie.insert(entry.prefix, staged, slot, index.stats_.duplicates_collapsed);
        if (slot[staged] != staged) {
            index.payloads_[slot[staged]] = entry;
            index.payloads_.pop_back();
        }
    }

    for (const auto& p : index.payloads_) {
        if (p.prefix.address.family == IpFamily::v4) {
            ++index.stats_.v4_entries;
        } else {
            ++index.stats_.v6_entries;
        }
    }
    return index;
}

const PrefixOrigin* LpmIndex::match(const IpAddress& ip) const {
    const Trie& trie = ip.family == IpFamily::v4 ? v4_ : v6_;
    std::int32_t payload = trie.find_longest(ip);
    return payload < 0 ? nullptr : &payloads_[payload];
}

Attribution LpmIndex::lookup(const IpAddress& ip,
                             const std::map<std::uint32_t, AsOrg>& orgs) const {
    Attribution result;
    result.ip = ip;
    const PrefixOrigin* hit = match(ip);
    if (!hit) return result;

    result.matched_prefix = hit->prefix;
    result.asn = hit->origins.front();  // deterministic MOAS tie-break
    auto it = orgs.find(*result.asn);
    if (it != orgs.end()) result.org = it->second;
    return result;
}

}  // namespace nsflow
