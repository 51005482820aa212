#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nsflow/analytics.hpp"
#include "nsflow/ingest.hpp"

namespace nsflow {

/// Provenance echoed into every report: "# key: value" comment lines before
/// the CSV header, and a leading meta object in the JSONL mirror. Keys appear
/// in insertion order.
using Provenance = std::vector<std::pair<std::string, std::string>>;

std::string csv_escape(const std::string& field);

void write_ranking_csv(std::ostream& out, const ProviderRanking& ranking,
                       const Provenance& provenance);
void write_ranking_jsonl(std::ostream& out, const ProviderRanking& ranking,
                         const Provenance& provenance);

/// Reads a ranking back from a CSV written by write_ranking_csv (used by the
/// diff command). Throws FormatError on missing meta or malformed rows.
ProviderRanking read_ranking_csv(std::istream& in);

void write_rank_changes_csv(std::ostream& out, const std::vector<RankChange>& changes,
                            const Provenance& provenance);

void write_concentration_csv(std::ostream& out, const ConcentrationSeries& series,
                             const Provenance& provenance);
void write_concentration_jsonl(std::ostream& out, const ConcentrationSeries& series,
                               const Provenance& provenance);

void write_sovereignty_csv(std::ostream& out, const SovereigntyBreakdown& breakdown,
                           const Provenance& provenance);
void write_sovereignty_jsonl(std::ostream& out, const SovereigntyBreakdown& breakdown,
                             const Provenance& provenance);

void write_self_hosting_csv(std::ostream& out, const std::vector<SelfHostingRow>& rows,
                            const Provenance& provenance);

void write_governmental_csv(std::ostream& out,
                            const std::vector<GovernmentalBreakdown>& breakdowns,
                            const Provenance& provenance);

void write_tranco_diff_csv(std::ostream& out, const DatasetDiff& diff,
                           const Provenance& provenance);

}  // namespace nsflow
