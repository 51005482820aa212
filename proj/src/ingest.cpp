#include "nsflow/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "nsflow/errors.hpp"
#include "nsflow/util.hpp"

namespace nsflow {

namespace {

bool parse_u64(std::string_view text, std::uint64_t& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_u32(std::string_view text, std::uint32_t& out) {
    std::uint64_t wide = 0;
    if (!parse_u64(text, wide) || wide > 0xFFFFFFFFull) return false;
    out = static_cast<std::uint32_t>(wide);
    return true;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

TrancoParseResult parse_tranco(std::istream& in) {
    if (in.fail()) throw IoError("tranco: unreadable stream");

    TrancoParseResult result;
    std::string raw;
    std::uint64_t line_no = 0;
    std::uint64_t last_rank = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line.empty()) {
            if (line_no > 1) ++result.skipped;
            continue;
        }
        auto comma = line.find(',');
        std::string_view rank_field = comma == std::string_view::npos ? line : line.substr(0, comma);
        std::string_view domain_field = comma == std::string_view::npos
                                            ? std::string_view{}
                                            : line.substr(comma + 1);

        std::uint64_t rank = 0;
        if (!parse_u64(rank_field, rank) || rank == 0) {
            // A non-numeric first line is a header, not data.
            if (line_no > 1) ++result.skipped;
            continue;
        }
        DomainName domain = normalize_domain(domain_field);
        // Entries must keep ranks strictly increasing and domains valid.
        if (domain.empty() || !is_valid_domain(domain) || rank <= last_rank) {
            ++result.skipped;
            continue;
        }
        last_rank = rank;
        result.entries.push_back(TrancoEntry{rank, std::move(domain)});
    }
    if (in.bad()) throw IoError("tranco: stream read failure");
    return result;
}

Prefix2AsParseResult parse_prefix2as(std::istream& in, IpFamily family) {
    if (in.fail()) throw IoError("prefix2as: unreadable stream");

    Prefix2AsParseResult result;
    std::string raw;
    while (std::getline(in, raw)) {
        std::string_view line = strip_cr(raw);
        if (line.empty() || line.front() == '#') continue;

        auto fields = split(line, '\t');
        if (fields.size() != 3) {
            ++result.skipped;
            continue;
        }

        auto addr = IpAddress::parse(fields[0]);
        std::uint64_t masklen = 0;
        if (!addr || addr->family != family || !parse_u64(fields[1], masklen) ||
            masklen > address_bits(family)) {
            ++result.skipped;
            continue;
        }

        PrefixOrigin entry;
        entry.prefix = IpNetwork{*addr, static_cast<std::uint8_t>(masklen)};
        entry.prefix.normalize();

        // '_' joins multi-origin announcements, ',' joins AS sets. Mixed
        // specs split on '_' first, then ',', flattened as multi_origin.
        bool has_underscore = fields[2].find('_') != std::string::npos;
        bool has_comma = fields[2].find(',') != std::string::npos;
        bool ok = true;
        for (const auto& group : split(fields[2], '_')) {
            for (const auto& token : split(group, ',')) {
                std::uint32_t asn = 0;
                if (!parse_u32(token, asn) || asn == 0) {
                    ok = false;
                    break;
                }
                if (std::find(entry.origins.begin(), entry.origins.end(), asn) ==
                    entry.origins.end()) {
                    entry.origins.push_back(asn);
                }
            }
            if (!ok) break;
        }
        if (!ok || entry.origins.empty()) {
            ++result.skipped;
            continue;
        }
        if (has_underscore) {
            entry.moas_kind = MoasKind::multi_origin;
        } else if (has_comma) {
            entry.moas_kind = MoasKind::as_set;
        } else {
            entry.moas_kind = MoasKind::single;
        }
        result.prefixes.push_back(std::move(entry));
    }
    if (in.bad()) throw IoError("prefix2as: stream read failure");
    return result;
}

namespace {

// Alpha-2 code uppercased, or the "??" sentinel for anything else.
std::string normalize_country(std::string_view raw) {
    if (raw.size() != 2) return kUnknownCountry;
    std::string out;
    for (char c : raw) {
        if (!std::isalpha(static_cast<unsigned char>(c))) return kUnknownCountry;
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

enum class As2OrgKind { none, org, as };

As2OrgKind classify_format(std::string_view spec) {
    // "#format:org_id|changed|name|country|source" vs
    // "#format:aut|changed|aut_name|org_id|opaque_id|source"
    auto first = spec.substr(0, spec.find('|'));
    if (first == "aut" || first == "aut_name" || first.substr(0, 3) == "aut") return As2OrgKind::as;
    if (first == "org_id") return As2OrgKind::org;
    return As2OrgKind::none;
}

}  // namespace

As2OrgParseResult parse_as2org(std::istream& in) {
    if (in.fail()) throw IoError("as2org: unreadable stream");

    struct OrgRow {
        std::string name;
        std::string country;
    };
    std::map<std::string, OrgRow> org_rows;

    struct AsRow {
        std::uint32_t asn;
        std::string as_name;
        std::string org_id;
    };
    std::vector<AsRow> as_rows;

    As2OrgParseResult result;
    As2OrgKind current = As2OrgKind::none;
    bool saw_format = false;

    std::string raw;
    while (std::getline(in, raw)) {
        std::string_view line = strip_cr(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = line.substr(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            if (body.substr(0, 7) == "format:") {
                auto spec = body.substr(7);
                while (!spec.empty() && spec.front() == ' ') spec.remove_prefix(1);
                auto kind = classify_format(spec);
                if (kind != As2OrgKind::none) {
                    current = kind;
                    saw_format = true;
                }
            }
            continue;
        }
        if (current == As2OrgKind::none) {
            throw FormatError("as2org: data before any #format header");
        }
        auto fields = split(line, '|');
        if (current == As2OrgKind::org) {
            // org_id|changed|name|country|source
            if (fields.size() < 4) {
                ++result.skipped;
                continue;
            }
            org_rows[fields[0]] = OrgRow{fields[2], fields[3]};
        } else {
            // aut|changed|aut_name|org_id|opaque_id|source
            if (fields.size() < 4) {
                ++result.skipped;
                continue;
            }
            std::uint32_t asn = 0;
            if (!parse_u32(fields[0], asn) || asn == 0) {
                ++result.skipped;
                continue;
            }
            as_rows.push_back(AsRow{asn, fields[2], fields[3]});
        }
    }
    if (in.bad()) throw IoError("as2org: stream read failure");
    if (!saw_format) throw FormatError("as2org: no #format headers found");

    for (auto& row : as_rows) {
        AsOrg entry;
        entry.asn = row.asn;
        entry.as_name = row.as_name;
        entry.org_id = row.org_id;
        auto it = org_rows.find(row.org_id);
        if (it != org_rows.end()) {
            entry.org_name = it->second.name;
            entry.country = normalize_country(it->second.country);
        } else {
            entry.org_name = entry.as_name;
            entry.country = kUnknownCountry;
            ++result.skipped_joins;
        }
        auto [pos, inserted] = result.orgs.insert_or_assign(entry.asn, std::move(entry));
        if (!inserted) ++result.duplicate_asns;
    }
    return result;
}

DatasetDiff diff_tranco(const std::vector<TrancoEntry>& old_list,
                        const std::vector<TrancoEntry>& new_list) {
    std::map<DomainName, std::uint64_t> old_ranks, new_ranks;
    for (const auto& e : old_list) old_ranks.emplace(e.domain, e.rank);
    for (const auto& e : new_list) new_ranks.emplace(e.domain, e.rank);

    DatasetDiff diff;
    for (const auto& [domain, rank] : new_ranks) {
        auto it = old_ranks.find(domain);
        if (it == old_ranks.end()) {
            diff.added.insert(domain);
        } else if (it->second != rank) {
            diff.rank_changed.emplace(domain, it->second, rank);
        }
    }
    for (const auto& [domain, rank] : old_ranks) {
        if (!new_ranks.contains(domain)) diff.removed.insert(domain);
    }
    return diff;
}

std::string to_prefix2as_line(const PrefixOrigin& entry) {
    std::string spec;
    char join = entry.moas_kind == MoasKind::as_set ? ',' : '_';
    for (std::size_t i = 0; i < entry.origins.size(); ++i) {
        if (i > 0) spec.push_back(join);
        spec += std::to_string(entry.origins[i]);
    }
    return entry.prefix.address.to_string() + "\t" + std::to_string(entry.prefix.prefix_len) +
           "\t" + spec;
}

std::string to_as2org_lines(const AsOrg& entry) {
    std::string out;
    out += "#format:org_id|changed|name|country|source\n";
    out += entry.org_id + "|" + "|" + entry.org_name + "|" + entry.country + "|nsflow\n";
    out += "#format:aut|changed|aut_name|org_id|opaque_id|source\n";
    out += std::to_string(entry.asn) + "|" + "|" + entry.as_name + "|" + entry.org_id +
           "||nsflow\n";
    return out;
}

std::string dataset_label(const std::string& path_or_name, std::istream& content) {
    std::uint64_t h = kFnvOffset;
    char buf[8192];
    while (content.read(buf, sizeof(buf)) || content.gcount() > 0) {
        h = fnv1a(std::string_view(buf, static_cast<std::size_t>(content.gcount())), h);
    }
    auto slash = path_or_name.find_last_of('/');
    std::string base =
        slash == std::string::npos ? path_or_name : path_or_name.substr(slash + 1);
    return base + ":" + hex64(h).substr(0, 12);
}

}  // namespace nsflow
