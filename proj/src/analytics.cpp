#include "nsflow/analytics.hpp"

#include <algorithm>

#include "nsflow/errors.hpp"

namespace nsflow {

std::string to_string(AttributionPolicy policy) {
    switch (policy) {
        case AttributionPolicy::any_ns: return "any_ns";
        case AttributionPolicy::all_ns: return "all_ns";
        case AttributionPolicy::majority_ns: return "majority_ns";
    }
    return "any_ns";
}

std::optional<AttributionPolicy> attribution_policy_from_string(std::string_view text) {
    if (text == "any_ns" || text == "any") return AttributionPolicy::any_ns;
    if (text == "all_ns" || text == "all") return AttributionPolicy::all_ns;
    if (text == "majority_ns" || text == "majority") return AttributionPolicy::majority_ns;
    return std::nullopt;
}

namespace {

struct OrgInfo {
    std::string as_name;
    std::string org_name;
    std::string country;
    std::uint32_t lowest_asn = 0;
};

/// Representative display data per org: taken from the edge with the lowest
/// ASN so the label is stable under iteration order.
void observe_org(std::map<std::string, OrgInfo>& orgs, const AttributionEdge& edge) {
    auto it = orgs.find(edge.org_id);
    if (it == orgs.end() || edge.asn < it->second.lowest_asn) {
        orgs[edge.org_id] = OrgInfo{edge.as_name, edge.org_name, edge.country, edge.asn};
    }
}

/// Organizations a resolved flow counts toward under a policy.
std::set<std::string> orgs_for_flow(const ResolutionFlow& flow, AttributionPolicy policy) {
    std::set<std::string> distinct;
    std::map<std::string, std::uint64_t> ip_counts;
    for (const auto& [ip, edge] : flow.attributions) {
        distinct.insert(edge.org_id);
        ++ip_counts[edge.org_id];
    }
    if (distinct.empty()) return {};

    switch (policy) {
        case AttributionPolicy::any_ns:
            return distinct;
        case AttributionPolicy::all_ns:
            if (distinct.size() == 1) return distinct;
            return {};
        case AttributionPolicy::majority_ns: {
            std::uint64_t total = flow.attributions.size();
            for (const auto& [org, count] : ip_counts) {
                if (count * 2 > total) return {org};
            }
            return {};
        }
    }
    return {};
}

std::vector<ProviderTally> tally_providers_multi(std::span<const MeasurementSnapshot> snapshots,
                                                 AttributionPolicy policy) {
    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, OrgInfo> orgs;
    for (const auto& snapshot : snapshots) {
        for (const auto& flow : snapshot.flows) {
            if (flow.status != ResolveStatus::ok) continue;
            for (const auto& [ip, edge] : flow.attributions) observe_org(orgs, edge);
            for (const auto& org : orgs_for_flow(flow, policy)) ++counts[org];
        }
    }

    std::vector<ProviderTally> tallies;
    tallies.reserve(counts.size());
    for (const auto& [org_id, count] : counts) {
        const OrgInfo& info = orgs.at(org_id);
        tallies.push_back(ProviderTally{org_id, info.as_name, info.org_name, info.country, count});
    }
    std::sort(tallies.begin(), tallies.end(), [](const ProviderTally& a, const ProviderTally& b) {
        if (a.domain_count != b.domain_count) return a.domain_count > b.domain_count;
        if (a.as_name != b.as_name) return a.as_name < b.as_name;
        return a.org_id < b.org_id;
    });
    return tallies;
}

}  // namespace

std::vector<ProviderTally> tally_providers(const MeasurementSnapshot& snapshot,
                                           AttributionPolicy policy) {
    return tally_providers_multi({&snapshot, 1}, policy);
}

ProviderRanking rank_providers(std::span<const MeasurementSnapshot> snapshots,
                               const std::string& label, int k, AttributionPolicy policy) {
    if (k < 1) throw UsageError("rank_providers: K must be >= 1");
    ProviderRanking ranking;
    ranking.label = label;
    ranking.k = k;
    ranking.policy = policy;

    auto tallies = tally_providers_multi(snapshots, policy);
    int position = 0;
    for (const auto& tally : tallies) {
        if (position >= k) break;
        ++position;
        ranking.entries.push_back(
            RankedProvider{position, tally.org_id, tally.as_name, tally.org_name,
                           tally.domain_count});
    }
    return ranking;
}

ProviderRanking rank_providers(const MeasurementSnapshot& snapshot, int k,
                               AttributionPolicy policy) {
    return rank_providers({&snapshot, 1}, snapshot.snapshot_id, k, policy);
}

std::vector<RankChange> diff_rankings(const ProviderRanking& old_ranking,
                                      const ProviderRanking& new_ranking) {
    if (old_ranking.k != new_ranking.k) {
        throw UsageError("diff_rankings: rankings have different K (" +
                         std::to_string(old_ranking.k) + " vs " +
                         std::to_string(new_ranking.k) + ")");
    }
    if (old_ranking.policy != new_ranking.policy) {
        throw UsageError("diff_rankings: rankings have different attribution policies");
    }

    std::map<std::string, int> old_pos, new_pos;
    for (const auto& e : old_ranking.entries) old_pos[e.as_name] = e.position;
    for (const auto& e : new_ranking.entries) new_pos[e.as_name] = e.position;

    std::vector<RankChange> changes;
    for (const auto& [name, pos] : old_pos) {
        auto it = new_pos.find(name);
        if (it == new_pos.end()) {
            changes.push_back(RankChange{name, pos, std::nullopt});
        } else if (it->second != pos) {
            changes.push_back(RankChange{name, pos, it->second});
        }
    }
    for (const auto& [name, pos] : new_pos) {
        if (!old_pos.contains(name)) changes.push_back(RankChange{name, std::nullopt, pos});
    }
    std::sort(changes.begin(), changes.end(), [](const RankChange& a, const RankChange& b) {
        int ap = a.old_position.value_or(1 << 20);
        int bp = b.old_position.value_or(1 << 20);
        if (ap != bp) return ap < bp;
        return a.as_name < b.as_name;
    });
    return changes;
}

std::vector<SelfHostingRow> self_hosting(const MeasurementSnapshot& snapshot,
                                         const std::vector<DomainName>& provider_domains) {
    std::map<std::string_view, const ResolutionFlow*> by_domain;
    for (const auto& flow : snapshot.flows) by_domain.emplace(flow.domain, &flow);

    std::vector<SelfHostingRow> rows;
    rows.reserve(provider_domains.size());
    for (const auto& raw : provider_domains) {
        SelfHostingRow row;
        row.domain = normalize_domain(raw);
        auto it = by_domain.find(row.domain);
        if (it != by_domain.end() && it->second->status == ResolveStatus::ok) {
            row.resolved = true;
            for (const auto& [ip, edge] : it->second->attributions) {
                row.as_names.insert(edge.as_name);
                row.countries.insert(edge.country);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ConcentrationSeries concentration(std::span<const MeasurementSnapshot> snapshots,
                                  TopSetSource source, int k,
                                  const std::set<std::string>& fixed_org_ids) {
    if (snapshots.empty()) throw UsageError("concentration: need at least one snapshot");
    if (k < 1) throw UsageError("concentration: K must be >= 1");
    if (source == TopSetSource::fixed_set && fixed_org_ids.empty()) {
        throw UsageError("concentration: fixed_set requires a provider set");
    }

    ConcentrationSeries series;
    double sum = 0.0;
    for (const auto& snapshot : snapshots) {
        ConcentrationPoint point;
        point.date = snapshot.meta.run_date;
        point.snapshot_id = snapshot.snapshot_id;

        auto tallies = tally_providers(snapshot, AttributionPolicy::any_ns);
        if (source == TopSetSource::per_snapshot_topk) {
            for (const auto& tally : tallies) {
                if (point.top_org_ids.size() >= static_cast<std::size_t>(k)) break;
                point.top_org_ids.insert(tally.org_id);
            }
        } else {
            point.top_org_ids = fixed_org_ids;
        }
        // Degenerate when the top set swallows every observed provider and the
        // fraction is 1 by construction rather than by measurement.
        point.degenerate = true;
        for (const auto& tally : tallies) {
            if (!point.top_org_ids.contains(tally.org_id)) {
                point.degenerate = false;
                break;
            }
        }

        for (const auto& flow : snapshot.flows) {
            if (flow.status != ResolveStatus::ok) continue;
            ++point.resolved_domains;
            for (const auto& org : orgs_for_flow(flow, AttributionPolicy::any_ns)) {
                if (point.top_org_ids.contains(org)) {
                    ++point.concentrated_domains;
                    break;
                }
            }
        }
        if (point.resolved_domains == 0) {
            throw EmptyScopeError("concentration: snapshot " + snapshot.snapshot_id +
                                  " has no resolved domains");
        }
        point.fraction = static_cast<double>(point.concentrated_domains) /
                         static_cast<double>(point.resolved_domains);
        sum += point.fraction;
        if (series.points.empty() || point.fraction > series.max_fraction) {
            series.max_fraction = point.fraction;
            series.max_date = point.date;
        }
        series.points.push_back(std::move(point));
    }
    series.mean = sum / static_cast<double>(series.points.size());
    return series;
}

std::string to_string(SovereigntyMode mode) {
    return mode == SovereigntyMode::fractional ? "fractional" : "any_country";
}

std::optional<SovereigntyMode> sovereignty_mode_from_string(std::string_view text) {
    if (text == "fractional") return SovereigntyMode::fractional;
    if (text == "any_country" || text == "any-country") return SovereigntyMode::any_country;
    return std::nullopt;
}

namespace {

SovereigntyBreakdown sovereignty_over(const MeasurementSnapshot& snapshot,
                                      const std::string& scope_label,
                                      std::span<const std::string> suffixes, double threshold,
                                      SovereigntyMode mode) {
    if (threshold < 0.0 || threshold >= 1.0) {
        throw UsageError("sovereignty: threshold must be in [0,1)");
    }
    for (const auto& suffix : suffixes) {
        if (suffix.empty() || suffix.front() != '.') {
            throw UsageError("sovereignty: suffix must start with '.': " + suffix);
        }
    }

    std::map<std::string, double> weights;
    std::uint64_t eligible = 0;
    for (const auto& flow : snapshot.flows) {
        if (flow.status != ResolveStatus::ok) continue;
        bool matches = false;
        for (const auto& suffix : suffixes) {
            if (has_suffix(flow.domain, suffix)) {
                matches = true;
                break;
            }
        }
        if (!matches) continue;

        std::set<std::string> countries;
        for (const auto& [ip, edge] : flow.attributions) countries.insert(edge.country);
        if (countries.empty()) continue;  // resolved but nothing attributed

        ++eligible;
        double weight = mode == SovereigntyMode::fractional
                            ? 1.0 / static_cast<double>(countries.size())
                            : 1.0;
        for (const auto& country : countries) weights[country] += weight;
    }
    if (eligible == 0) {
        throw EmptyScopeError("sovereignty: no attributable domains under scope " + scope_label);
    }

    SovereigntyBreakdown breakdown;
    breakdown.scope = scope_label;
    breakdown.others_threshold = threshold;
    breakdown.mode = mode;
    breakdown.eligible_domains = eligible;
    for (const auto& [country, weight] : weights) {
        double share = weight / static_cast<double>(eligible);
        if (share < threshold) {
            breakdown.others_bucket += share;
        } else {
            breakdown.shares[country] = share;
        }
    }
    return breakdown;
}

}  // namespace

SovereigntyBreakdown sovereignty(const MeasurementSnapshot& snapshot, std::string_view cctld,
                                 double threshold, SovereigntyMode mode) {
    std::string suffix(cctld);
    return sovereignty_over(snapshot, suffix, {&suffix, 1}, threshold, mode);
}

SovereigntyBreakdown sovereignty_aggregate(const MeasurementSnapshot& snapshot,
                                           const std::string& scope_label,
                                           std::span<const std::string> cctlds,
                                           double threshold, SovereigntyMode mode) {
    if (cctlds.empty()) throw UsageError("sovereignty_aggregate: empty ccTLD list");
    return sovereignty_over(snapshot, scope_label, cctlds, threshold, mode);
}

std::vector<GovernmentalBreakdown> governmental(const MeasurementSnapshot& snapshot,
                                                std::span<const std::string> gov_suffixes) {
    std::vector<GovernmentalBreakdown> results;
    results.reserve(gov_suffixes.size());

    for (const auto& suffix : gov_suffixes) {
        if (suffix.empty() || suffix.front() != '.') {
            throw UsageError("governmental: suffix must start with '.': " + suffix);
        }
        GovernmentalBreakdown breakdown;
        breakdown.suffix = suffix;

        std::map<std::string, OrgInfo> orgs;
        std::map<std::string, std::uint64_t> counts;
        std::map<std::string, double> weights;
        for (const auto& flow : snapshot.flows) {
            if (!has_suffix(flow.domain, suffix)) continue;
            ++breakdown.matched_domains;
            if (flow.status != ResolveStatus::ok) continue;

            std::set<std::string> domain_orgs;
            for (const auto& [ip, edge] : flow.attributions) {
                observe_org(orgs, edge);
                domain_orgs.insert(edge.org_id);
            }
            if (domain_orgs.empty()) continue;

            ++breakdown.eligible_domains;
            double weight = 1.0 / static_cast<double>(domain_orgs.size());
            for (const auto& org : domain_orgs) {
                ++counts[org];
                weights[org] += weight;
            }
        }

        breakdown.present = breakdown.matched_domains > 0;
        for (const auto& [org_id, count] : counts) {
            const OrgInfo& info = orgs.at(org_id);
            GovernmentalRow row;
            row.org_id = org_id;
            row.as_name = info.as_name;
            row.org_name = info.org_name;
            row.country = info.country;
            row.domain_count = count;
            row.share = weights.at(org_id) / static_cast<double>(breakdown.eligible_domains);
            breakdown.rows.push_back(std::move(row));
        }
        std::sort(breakdown.rows.begin(), breakdown.rows.end(),
                  [](const GovernmentalRow& a, const GovernmentalRow& b) {
                      if (a.share != b.share) return a.share > b.share;
                      if (a.as_name != b.as_name) return a.as_name < b.as_name;
                      return a.org_id < b.org_id;
                  });
        results.push_back(std::move(breakdown));
    }
    return results;
}

}  // namespace nsflow
