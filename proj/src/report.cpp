#include "nsflow/report.hpp"

#include <cstdio>

#include <json.hpp>

#include "nsflow/errors.hpp"
#include "nsflow/util.hpp"

namespace nsflow {

using nlohmann::json;

namespace {

std::string fmt_fraction(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

void write_provenance(std::ostream& out, const Provenance& provenance) {
    for (const auto& [key, value] : provenance) {
        out << "# " << key << ": " << value << "\n";
    }
}

json provenance_meta(const Provenance& provenance) {
    json meta = json::object();
    for (const auto& [key, value] : provenance) meta[key] = value;
    return json{{"meta", std::move(meta)}};
}

// One CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_ranking_csv(std::ostream& out, const ProviderRanking& ranking,
                       const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "# label: " << ranking.label << "\n";
    out << "# k: " << ranking.k << "\n";
    out << "# policy: " << to_string(ranking.policy) << "\n";
    out << "position,as_name,org_name,org_id,domain_count\n";
    for (const auto& e : ranking.entries) {
        out << e.position << "," << csv_escape(e.as_name) << "," << csv_escape(e.org_name)
            << "," << csv_escape(e.org_id) << "," << e.domain_count << "\n";
    }
}

void write_ranking_jsonl(std::ostream& out, const ProviderRanking& ranking,
                         const Provenance& provenance) {
    json meta = provenance_meta(provenance);
    meta["meta"]["label"] = ranking.label;
    meta["meta"]["k"] = ranking.k;
    meta["meta"]["policy"] = to_string(ranking.policy);
    out << meta.dump() << "\n";
    for (const auto& e : ranking.entries) {
        out << json{{"position", e.position},
                    {"as_name", e.as_name},
                    {"org_name", e.org_name},
                    {"org_id", e.org_id},
                    {"domain_count", e.domain_count}}
                   .dump()
            << "\n";
    }
}

ProviderRanking read_ranking_csv(std::istream& in) {
    if (in.fail()) throw IoError("ranking csv: unreadable stream");
    ProviderRanking ranking;
    ranking.k = -1;
    bool saw_policy = false;
    bool saw_header = false;

    auto to_int = [](const std::string& text, const char* what) {
        try {
            return std::stoi(text);
        } catch (const std::exception&) {
            throw FormatError(std::string("ranking csv: bad ") + what + ": " + text);
        }
    };

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = line.substr(1);
            auto colon = body.find(':');
            if (colon == std::string::npos) continue;
            std::string key = body.substr(0, colon);
            while (!key.empty() && key.front() == ' ') key.erase(key.begin());
            std::string value = body.substr(colon + 1);
            while (!value.empty() && value.front() == ' ') value.erase(value.begin());
            if (key == "label") ranking.label = value;
            if (key == "k") ranking.k = to_int(value, "k");
            if (key == "policy") {
                auto policy = attribution_policy_from_string(value);
                if (!policy) throw FormatError("ranking csv: unknown policy " + value);
                ranking.policy = *policy;
                saw_policy = true;
            }
            continue;
        }
        auto fields = parse_csv_line(line);
        if (!saw_header) {
            if (fields.empty() || fields[0] != "position") {
                throw FormatError("ranking csv: missing header row");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 5) throw FormatError("ranking csv: malformed row: " + line);
        RankedProvider e;
        e.position = to_int(fields[0], "position");
        e.as_name = fields[1];
        e.org_name = fields[2];
        e.org_id = fields[3];
        try {
            e.domain_count = std::stoull(fields[4]);
        } catch (const std::exception&) {
            throw FormatError("ranking csv: bad domain_count: " + fields[4]);
        }
        ranking.entries.push_back(std::move(e));
    }
    if (ranking.k < 0 || !saw_policy) {
        throw FormatError("ranking csv: missing '# k:' or '# policy:' metadata");
    }
    return ranking;
}

void write_rank_changes_csv(std::ostream& out, const std::vector<RankChange>& changes,
                            const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "as_name,old_position,new_position\n";
    for (const auto& change : changes) {
        out << csv_escape(change.as_name) << ",";
        if (change.old_position) out << *change.old_position;
        out << ",";
        if (change.new_position) out << *change.new_position;
        out << "\n";
    }
}

void write_concentration_csv(std::ostream& out, const ConcentrationSeries& series,
                             const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "# mean: " << fmt_fraction(series.mean) << "\n";
    out << "# max: " << fmt_fraction(series.max_fraction) << "\n";
    out << "# max_date: " << series.max_date << "\n";
    out << "date,snapshot_id,concentrated_domains,resolved_domains,fraction,degenerate\n";
    for (const auto& p : series.points) {
        out << p.date << "," << p.snapshot_id << "," << p.concentrated_domains << ","
            << p.resolved_domains << "," << fmt_fraction(p.fraction) << ","
            << (p.degenerate ? "true" : "false") << "\n";
    }
}

void write_concentration_jsonl(std::ostream& out, const ConcentrationSeries& series,
                               const Provenance& provenance) {
    json meta = provenance_meta(provenance);
    meta["meta"]["mean"] = series.mean;
    meta["meta"]["max"] = series.max_fraction;
    meta["meta"]["max_date"] = series.max_date;
    out << meta.dump() << "\n";
    for (const auto& p : series.points) {
        out << json{{"date", p.date},
                    {"snapshot_id", p.snapshot_id},
                    {"concentrated_domains", p.concentrated_domains},
                    {"resolved_domains", p.resolved_domains},
                    {"fraction", p.fraction},
                    {"degenerate", p.degenerate}}
                   .dump()
            << "\n";
    }
}

void write_sovereignty_csv(std::ostream& out, const SovereigntyBreakdown& breakdown,
                           const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "# scope: " << breakdown.scope << "\n";
    out << "# threshold: " << fmt_fraction(breakdown.others_threshold) << "\n";
    out << "# mode: " << to_string(breakdown.mode) << "\n";
    out << "# eligible_domains: " << breakdown.eligible_domains << "\n";
    out << "country,share\n";
    for (const auto& [country, share] : breakdown.shares) {
        out << csv_escape(country) << "," << fmt_fraction(share) << "\n";
    }
    out << "OTHERS," << fmt_fraction(breakdown.others_bucket) << "\n";
}

void write_sovereignty_jsonl(std::ostream& out, const SovereigntyBreakdown& breakdown,
                             const Provenance& provenance) {
    json meta = provenance_meta(provenance);
    meta["meta"]["scope"] = breakdown.scope;
    meta["meta"]["threshold"] = breakdown.others_threshold;
    meta["meta"]["mode"] = to_string(breakdown.mode);
    meta["meta"]["eligible_domains"] = breakdown.eligible_domains;
    out << meta.dump() << "\n";
    for (const auto& [country, share] : breakdown.shares) {
        out << json{{"country", country}, {"share", share}}.dump() << "\n";
    }
    out << json{{"country", "OTHERS"}, {"share", breakdown.others_bucket}}.dump() << "\n";
}

void write_self_hosting_csv(std::ostream& out, const std::vector<SelfHostingRow>& rows,
                            const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "domain,resolved,hosting_as_names,countries\n";
    for (const auto& row : rows) {
        std::string names, countries;
        for (const auto& name : row.as_names) {
            if (!names.empty()) names += ";";
            names += name;
        }
        for (const auto& country : row.countries) {
            if (!countries.empty()) countries += ";";
            countries += country;
        }
        out << csv_escape(row.domain) << "," << (row.resolved ? "true" : "false") << ","
            << csv_escape(names) << "," << csv_escape(countries) << "\n";
    }
}

void write_governmental_csv(std::ostream& out,
                            const std::vector<GovernmentalBreakdown>& breakdowns,
                            const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "suffix,present,as_name,org_name,country,domain_count,share\n";
    for (const auto& breakdown : breakdowns) {
        if (!breakdown.present) {
            out << csv_escape(breakdown.suffix) << ",false,,,,,\n";
            continue;
        }
        for (const auto& row : breakdown.rows) {
            out << csv_escape(breakdown.suffix) << ",true," << csv_escape(row.as_name) << ","
                << csv_escape(row.org_name) << "," << csv_escape(row.country) << ","
                << row.domain_count << "," << fmt_fraction(row.share) << "\n";
        }
    }
}

void write_tranco_diff_csv(std::ostream& out, const DatasetDiff& diff,
                           const Provenance& provenance) {
    write_provenance(out, provenance);
    out << "change,domain,old_rank,new_rank\n";
    for (const auto& domain : diff.added) {
        out << "added," << csv_escape(domain) << ",,\n";
    }
    for (const auto& domain : diff.removed) {
        out << "removed," << csv_escape(domain) << ",,\n";
    }
    for (const auto& [domain, old_rank, new_rank] : diff.rank_changed) {
        out << "rank_changed," << csv_escape(domain) << "," << old_rank << "," << new_rank
            << "\n";
    }
}

}  // namespace nsflow
