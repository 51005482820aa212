#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nsflow/flowmap.hpp"

namespace nsflow {

/// How a domain whose NS IPs attribute to several organizations counts
/// toward each of them.
enum class AttributionPolicy : std::uint8_t {
    any_ns,       // counts once for every distinct organization
    all_ns,       // counts only when all attributed IPs share one organization
    majority_ns,  // counts for the org holding a strict majority of attributed IPs
};

std::string to_string(AttributionPolicy policy);
std::optional<AttributionPolicy> attribution_policy_from_string(std::string_view text);

/// Provider identity is the organization (org_id); the AS name is the display
/// label. One org holding several ASNs counts once; its label comes from the
/// lowest observed ASN.
struct ProviderTally {
    std::string org_id;
    std::string as_name;
    std::string org_name;
    std::string country;
    std::uint64_t domain_count = 0;
};

struct RankedProvider {
    int position = 0;  // 1-based, contiguous
    std::string org_id;
    std::string as_name;
    std::string org_name;
    std::uint64_t domain_count = 0;

    bool operator==(const RankedProvider&) const = default;
};

struct ProviderRanking {
    std::string label;  // snapshot id or period label
    int k = 0;
    AttributionPolicy policy = AttributionPolicy::any_ns;
    std::vector<RankedProvider> entries;  // domain_count non-increasing;
                                          // ties by ascending as_name, then org_id
};

/// Full per-provider counts (unbounded), sorted like a ranking.
std::vector<ProviderTally> tally_providers(const MeasurementSnapshot& snapshot,
                                           AttributionPolicy policy);

/// Counting aggregates across snapshots when more than one is given (a
/// "period" is a set of snapshot ids; a domain counts once per snapshot).
ProviderRanking rank_providers(const MeasurementSnapshot& snapshot, int k,
                               AttributionPolicy policy);
ProviderRanking rank_providers(std::span<const MeasurementSnapshot> snapshots,
                               const std::string& label, int k, AttributionPolicy policy);

struct RankChange {
    std::string as_name;
    std::optional<int> old_position;  // absent = entered the top-K
    std::optional<int> new_position;  // absent = left the top-K

    bool operator==(const RankChange&) const = default;
};

/// Providers whose position changed, entered, or left. Throws UsageError when
/// the rankings disagree on K or policy.
std::vector<RankChange> diff_rankings(const ProviderRanking& old_ranking,
                                      const ProviderRanking& new_ranking);

struct SelfHostingRow {
    DomainName domain;
    bool resolved = false;  // present in the snapshot with status ok
    std::set<std::string> as_names;   // distinct hosting AS names
    std::set<std::string> countries;  // distinct hosting countries
};

std::vector<SelfHostingRow> self_hosting(const MeasurementSnapshot& snapshot,
                                         const std::vector<DomainName>& provider_domains);

enum class TopSetSource : std::uint8_t { per_snapshot_topk, fixed_set };

struct ConcentrationPoint {
    std::string date;                    // snapshot run date
    std::string snapshot_id;
    std::set<std::string> top_org_ids;   // the K provider identities used
    std::uint64_t concentrated_domains = 0;
    std::uint64_t resolved_domains = 0;  // status=ok domains
    double fraction = 0.0;
    // The top set covers every provider observed in the snapshot (e.g. K is
    // at least the distinct provider count), so the fraction is saturated by
    // construction.
    bool degenerate = false;
};

struct ConcentrationSeries {
    std::vector<ConcentrationPoint> points;
    double mean = 0.0;
    double max_fraction = 0.0;
    std::string max_date;
};

/// Fraction of resolved domains attributed (any_ns) to the top provider set,
/// per snapshot. per_snapshot_topk recomputes the top-K inside each snapshot;
/// fixed_set applies one provider set (org_ids) across the series.
ConcentrationSeries concentration(std::span<const MeasurementSnapshot> snapshots,
                                  TopSetSource source, int k,
                                  const std::set<std::string>& fixed_org_ids = {});

inline constexpr double kDefaultOthersThreshold = 0.04;

/// fractional (default): a domain attributing to n distinct countries adds
/// 1/n to each, so shares form a distribution summing to 1. any_country: the
/// domain adds a full 1 to every hosting country (a dependency measure;
/// shares may sum past 1).
enum class SovereigntyMode : std::uint8_t { fractional, any_country };

std::string to_string(SovereigntyMode mode);
std::optional<SovereigntyMode> sovereignty_mode_from_string(std::string_view text);

struct SovereigntyBreakdown {
    std::string scope;                    // ccTLD or group label
    std::map<std::string, double> shares; // country -> share, every entry >= threshold
    double others_bucket = 0.0;
    double others_threshold = kDefaultOthersThreshold;
    SovereigntyMode mode = SovereigntyMode::fractional;
    std::uint64_t eligible_domains = 0;   // resolved domains with >=1 attributed country
};

/// Hosting-country distribution for resolved domains under one ccTLD suffix.
/// Countries below the threshold fold into the others bucket. Throws
/// EmptyScopeError when nothing under the scope is attributable.
SovereigntyBreakdown sovereignty(const MeasurementSnapshot& snapshot, std::string_view cctld,
                                 double threshold = kDefaultOthersThreshold,
                                 SovereigntyMode mode = SovereigntyMode::fractional);

/// Same over the union of several ccTLDs (e.g. the BRICS group).
SovereigntyBreakdown sovereignty_aggregate(const MeasurementSnapshot& snapshot,
                                           const std::string& scope_label,
                                           std::span<const std::string> cctlds,
                                           double threshold = kDefaultOthersThreshold,
                                           SovereigntyMode mode = SovereigntyMode::fractional);

struct GovernmentalRow {
    std::string org_id;
    std::string as_name;
    std::string org_name;
    std::string country;
    std::uint64_t domain_count = 0;  // domains touching this org (any_ns)
    double share = 0.0;              // fractional, rows sum to 1 per suffix
};

struct GovernmentalBreakdown {
    std::string suffix;
    bool present = false;            // any domain under the suffix in the snapshot
    std::uint64_t matched_domains = 0;   // any status
    std::uint64_t eligible_domains = 0;  // resolved with >=1 attribution
    std::vector<GovernmentalRow> rows;   // share desc, then as_name asc
};

/// Hosting breakdown per restricted suffix (".gov.br", ...). Suffixes with no
/// matching domains are reported with present=false.
std::vector<GovernmentalBreakdown> governmental(const MeasurementSnapshot& snapshot,
                                                std::span<const std::string> gov_suffixes);

}  // namespace nsflow
