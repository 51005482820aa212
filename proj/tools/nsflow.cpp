#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsflow/analytics.hpp"
#include "nsflow/config.hpp"
#include "nsflow/errors.hpp"
#include "nsflow/flowmap.hpp"
#include "nsflow/ingest.hpp"
#include "nsflow/ip2as.hpp"
#include "nsflow/report.hpp"
#include "nsflow/resolver.hpp"
#include "nsflow/util.hpp"

namespace fs = std::filesystem;
using namespace nsflow;

namespace {

constexpr const char* kVersion = "nsflow 0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw UsageError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return buf.str();
}

struct LoadedDatasets {
    TrancoParseResult tranco;
    Prefix2AsParseResult v4;
    Prefix2AsParseResult v6;
    As2OrgParseResult as2org;
    std::string tranco_label;
    std::string v4_label;
    std::string v6_label;
    std::string as2org_label;
};

LoadedDatasets load_datasets(const RunConfig& config) {
    config.validate_dataset_paths();
    LoadedDatasets data;

    auto load = [](const std::string& path, std::string& label, auto parse) {
        std::string content = read_file(path);
        {
            std::istringstream hash_stream(content);
            label = dataset_label(path, hash_stream);
        }
        std::istringstream parse_stream(content);
        return parse(parse_stream);
    };

    data.tranco = load(config.tranco_path, data.tranco_label,
                       [](std::istream& in) { return parse_tranco(in); });
    data.v4 = load(config.prefix2as_v4_path, data.v4_label,
                   [](std::istream& in) { return parse_prefix2as(in, IpFamily::v4); });
    data.v6 = load(config.prefix2as_v6_path, data.v6_label,
                   [](std::istream& in) { return parse_prefix2as(in, IpFamily::v6); });
    data.as2org = load(config.as2org_path, data.as2org_label,
                       [](std::istream& in) { return parse_as2org(in); });
    return data;
}

std::string today_utc() { return format_utc_date(std::time(nullptr)); }

RunConfig load_config_or_throw(const std::string& path) {
    if (path.empty()) throw UsageError("--config is required");
    return RunConfig::load(path);
}

void apply_overrides(RunConfig& config, const std::string& backend, const std::string& store,
                     const std::string& date) {
    if (!backend.empty()) config.backend = backend;
    if (!store.empty()) config.store_path = store;
    if (!date.empty()) {
        if (!looks_like_date(date)) throw UsageError("--date must be YYYY-MM-DD");
        config.run_date = date;
    }
}

std::ofstream open_out_file(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw IoError("cannot write: " + path.string());
    return out;
}

Provenance base_provenance(const RunConfig& config, const std::string& config_path) {
    return Provenance{{"generator", kVersion},
                      {"config", config_path},
                      {"store", config.store_path},
                      {"backend", config.backend}};
}

void append_snapshot_provenance(Provenance& provenance, const MeasurementSnapshot& snapshot) {
    provenance.emplace_back("snapshot", snapshot.snapshot_id);
    provenance.emplace_back("run_date", snapshot.meta.run_date);
    provenance.emplace_back("tranco_label", snapshot.meta.tranco_label);
    provenance.emplace_back("prefix2as_v4_label", snapshot.meta.prefix2as_v4_label);
    provenance.emplace_back("prefix2as_v6_label", snapshot.meta.prefix2as_v6_label);
    provenance.emplace_back("as2org_label", snapshot.meta.as2org_label);
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_ingest(const std::string& config_path) {
    RunConfig config = load_config_or_throw(config_path);
    LoadedDatasets data = load_datasets(config);

    std::cout << "tranco: " << data.tranco_label << " entries=" << data.tranco.entries.size()
              << " skipped=" << data.tranco.skipped << "\n";
    std::cout << "prefix2as_v4: " << data.v4_label << " entries=" << data.v4.prefixes.size()
              << " skipped=" << data.v4.skipped << "\n";
    std::cout << "prefix2as_v6: " << data.v6_label << " entries=" << data.v6.prefixes.size()
              << " skipped=" << data.v6.skipped << "\n";
    std::cout << "as2org: " << data.as2org_label << " asns=" << data.as2org.orgs.size()
              << " unjoined=" << data.as2org.skipped_joins
              << " duplicates=" << data.as2org.duplicate_asns
              << " skipped=" << data.as2org.skipped << "\n";

    nlohmann::json manifest{
        {"tranco", {{"path", config.tranco_path},
                    {"label", data.tranco_label},
                    {"entries", data.tranco.entries.size()},
                    {"skipped", data.tranco.skipped}}},
        {"prefix2as_v4", {{"path", config.prefix2as_v4_path},
                          {"label", data.v4_label},
                          {"entries", data.v4.prefixes.size()},
                          {"skipped", data.v4.skipped}}},
        {"prefix2as_v6", {{"path", config.prefix2as_v6_path},
                          {"label", data.v6_label},
                          {"entries", data.v6.prefixes.size()},
                          {"skipped", data.v6.skipped}}},
        {"as2org", {{"path", config.as2org_path},
                    {"label", data.as2org_label},
                    {"asns", data.as2org.orgs.size()},
                    {"unjoined", data.as2org.skipped_joins},
                    {"duplicates", data.as2org.duplicate_asns},
                    {"skipped", data.as2org.skipped}}}};
    fs::path manifest_path = fs::path(config.store_path).concat(".ingest.json");
    if (manifest_path.has_parent_path()) fs::create_directories(manifest_path.parent_path());
    std::ofstream out(manifest_path);
    if (!out.is_open()) throw IoError("cannot write: " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    std::cout << "manifest: " << manifest_path.string() << "\n";
    return 0;
}

int cmd_measure(const std::string& config_path, std::uint64_t limit, const std::string& backend,
                const std::string& store, const std::string& date) {
    RunConfig config = load_config_or_throw(config_path);
    apply_overrides(config, backend, store, date);

    LoadedDatasets data = load_datasets(config);

    std::vector<PrefixOrigin> prefixes;
    prefixes.reserve(data.v4.prefixes.size() + data.v6.prefixes.size());
    prefixes.insert(prefixes.end(), data.v4.prefixes.begin(), data.v4.prefixes.end());
    prefixes.insert(prefixes.end(), data.v6.prefixes.begin(), data.v6.prefixes.end());
    LpmIndex index = LpmIndex::build(prefixes, data.v4_label + "+" + data.v6_label);

    std::vector<DomainName> domains;
    domains.reserve(data.tranco.entries.size());
    for (const auto& entry : data.tranco.entries) {
        if (limit > 0 && domains.size() >= limit) break;
        domains.push_back(entry.domain);
    }
    if (domains.empty()) throw UsageError("measure: tranco list is empty");

    auto dns = make_backend(config);
    std::uint64_t report_every = std::max<std::uint64_t>(domains.size() / 20, 1);
    auto progress = [&](const BatchProgress& p) {
        if (p.done % report_every == 0 || p.done == domains.size()) {
            std::cerr << "progress: done=" << p.done << " ok=" << p.ok
                      << " failed=" << p.failed << "\n";
        }
    };

    std::vector<NsRecordSet> records;
    try {
        records = resolve_batch(domains, config.policy, *dns, progress);
    } catch (const BatchAborted& e) {
        std::cerr << "aborted: " << e.what() << "; checkpoint: " << e.completed << " of "
                  << domains.size() << " domains completed, nothing persisted\n";
        return 1;
    }

    std::vector<ResolutionFlow> flows;
    flows.reserve(records.size());
    for (const auto& record : records) flows.push_back(map_flow(record, index, data.as2org.orgs));

    SnapshotMeta meta;
    meta.run_date = config.run_date.value_or(today_utc());
    meta.tranco_label = data.tranco_label;
    meta.prefix2as_v4_label = data.v4_label;
    meta.prefix2as_v6_label = data.v6_label;
    meta.as2org_label = data.as2org_label;

    SnapshotStore snapshot_store{fs::path(config.store_path)};
    if (fs::path(config.store_path).has_parent_path()) {
        fs::create_directories(fs::path(config.store_path).parent_path());
    }
    std::string sid = snapshot_store.persist(flows, meta);
    MeasurementSnapshot snapshot = snapshot_store.load(sid);

    std::cout << "snapshot: " << sid << "\n";
    std::cout << "input=" << snapshot.counters.input << " ok=" << snapshot.counters.ok
              << " no_ns=" << snapshot.counters.no_ns << " failed=" << snapshot.counters.failed
              << " timed_out=" << snapshot.counters.timed_out
              << " unmapped_ip=" << snapshot.counters.unmapped_ip
              << " duplicate_domains=" << snapshot.counters.duplicate_domains << "\n";
    return 0;
}

std::string resolve_snapshot_id(const SnapshotStore& store, const std::string& requested) {
    if (!requested.empty()) {
        if (!store.contains(requested)) throw NotFoundError("unknown snapshot: " + requested);
        return requested;
    }
    auto ids = store.list();
    if (ids.empty()) throw NotFoundError("store has no snapshots: " + store.path().string());
    return ids.back();
}

int cmd_analyze_rank(const RunConfig& config, const std::string& config_path,
                     const std::vector<std::string>& snapshot_ids, int k,
                     const std::string& policy_text, const std::string& label,
                     const fs::path& out_dir) {
    auto policy = attribution_policy_from_string(policy_text);
    if (!policy) throw UsageError("unknown policy: " + policy_text);

    SnapshotStore store{fs::path(config.store_path)};
    std::vector<MeasurementSnapshot> snapshots;
    if (snapshot_ids.empty()) {
        snapshots.push_back(store.load(resolve_snapshot_id(store, "")));
    } else {
        for (const auto& sid : snapshot_ids) {
            snapshots.push_back(store.load(resolve_snapshot_id(store, sid)));
        }
    }

    std::string effective_label = label;
    if (effective_label.empty()) {
        for (const auto& s : snapshots) {
            if (!effective_label.empty()) effective_label += "+";
            effective_label += s.snapshot_id;
        }
    }
    ProviderRanking ranking = rank_providers(snapshots, effective_label, k, *policy);

    Provenance provenance = base_provenance(config, config_path);
    for (const auto& s : snapshots) append_snapshot_provenance(provenance, s);
    provenance.emplace_back("policy", to_string(*policy));
    provenance.emplace_back("k", std::to_string(k));

    auto csv = open_out_file(out_dir, "rank.csv");
    write_ranking_csv(csv, ranking, provenance);
    auto jsonl = open_out_file(out_dir, "rank.jsonl");
    write_ranking_jsonl(jsonl, ranking, provenance);
    std::cout << "wrote " << (out_dir / "rank.csv").string() << " ("
              << ranking.entries.size() << " rows)\n";
    return 0;
}

int cmd_analyze_self_hosting(const RunConfig& config, const std::string& config_path,
                             const std::string& snapshot_id, const std::string& domains_arg,
                             const std::string& domains_file, const fs::path& out_dir) {
    std::vector<DomainName> domains;
    if (!domains_file.empty()) {
        std::ifstream in(domains_file);
        if (!in.is_open()) throw UsageError("cannot open: " + domains_file);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line.front() != '#') domains.push_back(normalize_domain(line));
        }
    }
    for (const auto& d : split(domains_arg, ',')) {
        if (!d.empty()) domains.push_back(normalize_domain(d));
    }
    if (domains.empty()) throw UsageError("self-hosting: no domains given");

    SnapshotStore store{fs::path(config.store_path)};
    MeasurementSnapshot snapshot = store.load(resolve_snapshot_id(store, snapshot_id));
    auto rows = self_hosting(snapshot, domains);

    Provenance provenance = base_provenance(config, config_path);
    append_snapshot_provenance(provenance, snapshot);
    provenance.emplace_back("policy", "any_ns");
    auto csv = open_out_file(out_dir, "self_hosting.csv");
    write_self_hosting_csv(csv, rows, provenance);
    std::cout << "wrote " << (out_dir / "self_hosting.csv").string() << " (" << rows.size()
              << " rows)\n";
    return 0;
}

int cmd_analyze_concentration(const RunConfig& config, const std::string& config_path,
                              const std::string& snapshots_arg, int k,
                              const std::string& top_set, const fs::path& out_dir) {
    SnapshotStore store{fs::path(config.store_path)};
    std::vector<std::string> ids;
    if (snapshots_arg.empty() || snapshots_arg == "all") {
        ids = store.list();
        if (ids.empty()) throw NotFoundError("store has no snapshots");
    } else {
        for (const auto& sid : split(snapshots_arg, ',')) {
            if (!sid.empty()) ids.push_back(sid);
        }
    }

    std::vector<MeasurementSnapshot> snapshots;
    snapshots.reserve(ids.size());
    for (const auto& sid : ids) snapshots.push_back(store.load(resolve_snapshot_id(store, sid)));

    TopSetSource source = TopSetSource::per_snapshot_topk;
    std::set<std::string> fixed;
    if (!top_set.empty() && top_set != "per-snapshot") {
        if (top_set.rfind("from:", 0) != 0) {
            throw UsageError("--top-set must be 'per-snapshot' or 'from:SNAPSHOT_ID'");
        }
        std::string base_id = top_set.substr(5);
        MeasurementSnapshot base = store.load(resolve_snapshot_id(store, base_id));
        for (const auto& e : rank_providers(base, k, AttributionPolicy::any_ns).entries) {
            fixed.insert(e.org_id);
        }
        source = TopSetSource::fixed_set;
    }

    ConcentrationSeries series = concentration(snapshots, source, k, fixed);

    Provenance provenance = base_provenance(config, config_path);
    for (const auto& s : snapshots) append_snapshot_provenance(provenance, s);
    provenance.emplace_back("k", std::to_string(k));
    provenance.emplace_back("top_set", top_set.empty() ? "per-snapshot" : top_set);
    provenance.emplace_back("policy", "any_ns");

    auto csv = open_out_file(out_dir, "concentration.csv");
    write_concentration_csv(csv, series, provenance);
    auto jsonl = open_out_file(out_dir, "concentration.jsonl");
    write_concentration_jsonl(jsonl, series, provenance);
    std::cout << "wrote " << (out_dir / "concentration.csv").string() << " ("
              << series.points.size() << " points, mean=" << series.mean << ")\n";
    return 0;
}

std::string scope_file_stem(const std::string& scope) {
    std::string stem = "sovereignty-";
    for (char c : scope) {
        stem.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    return stem;
}

int cmd_analyze_sovereignty(const RunConfig& config, const std::string& config_path,
                            const std::string& snapshot_id, const std::string& cctld,
                            const std::string& group_name, double threshold,
                            const std::string& share_mode, const fs::path& out_dir) {
    if (cctld.empty() == group_name.empty()) {
        throw UsageError("sovereignty: give exactly one of --cctld or --group");
    }
    auto mode = sovereignty_mode_from_string(share_mode);
    if (!mode) throw UsageError("unknown share mode: " + share_mode);
    SnapshotStore store{fs::path(config.store_path)};
    MeasurementSnapshot snapshot = store.load(resolve_snapshot_id(store, snapshot_id));

    Provenance provenance = base_provenance(config, config_path);
    append_snapshot_provenance(provenance, snapshot);
    provenance.emplace_back("threshold", std::to_string(threshold));
    provenance.emplace_back("share_mode", to_string(*mode));

    auto emit = [&](const SovereigntyBreakdown& breakdown) {
        std::string stem = scope_file_stem(breakdown.scope);
        auto csv = open_out_file(out_dir, stem + ".csv");
        write_sovereignty_csv(csv, breakdown, provenance);
        auto jsonl = open_out_file(out_dir, stem + ".jsonl");
        write_sovereignty_jsonl(jsonl, breakdown, provenance);
        std::cout << "wrote " << (out_dir / (stem + ".csv")).string() << " (eligible="
                  << breakdown.eligible_domains << ")\n";
    };

    if (!cctld.empty()) {
        emit(sovereignty(snapshot, cctld, threshold, *mode));
        return 0;
    }

    const auto& suffixes = config.group(group_name);
    for (const auto& suffix : suffixes) {
        try {
            emit(sovereignty(snapshot, suffix, threshold, *mode));
        } catch (const EmptyScopeError&) {
            std::cout << "scope " << suffix << ": no attributable domains, skipped\n";
        }
    }
    emit(sovereignty_aggregate(snapshot, group_name, suffixes, threshold, *mode));
    return 0;
}

int cmd_analyze_governmental(const RunConfig& config, const std::string& config_path,
                             const std::string& snapshot_id,
                             const std::string& suffixes_arg, const fs::path& out_dir) {
    std::vector<std::string> suffixes;
    if (!suffixes_arg.empty()) {
        for (const auto& s : split(suffixes_arg, ',')) {
            if (!s.empty()) suffixes.push_back(s);
        }
    } else {
        // Default: .gov under each BRICS ccTLD.
        for (const auto& cc : config.group("BRICS")) suffixes.push_back(".gov" + cc);
    }

    SnapshotStore store{fs::path(config.store_path)};
    MeasurementSnapshot snapshot = store.load(resolve_snapshot_id(store, snapshot_id));
    auto breakdowns = governmental(snapshot, suffixes);

    Provenance provenance = base_provenance(config, config_path);
    append_snapshot_provenance(provenance, snapshot);
    provenance.emplace_back("policy", "any_ns");
    auto csv = open_out_file(out_dir, "governmental.csv");
    write_governmental_csv(csv, breakdowns, provenance);
    std::cout << "wrote " << (out_dir / "governmental.csv").string() << "\n";
    for (const auto& b : breakdowns) {
        if (!b.present) std::cout << "suffix " << b.suffix << ": absent\n";
    }
    return 0;
}

int cmd_analyze_export(const RunConfig& config, const std::string& snapshot_id,
                       const fs::path& out_dir) {
    SnapshotStore store{fs::path(config.store_path)};
    std::string sid = resolve_snapshot_id(store, snapshot_id);
    auto out = open_out_file(out_dir, "snapshot.jsonl");
    store.export_snapshot(sid, out);
    std::cout << "wrote " << (out_dir / "snapshot.jsonl").string() << "\n";
    return 0;
}

int cmd_diff_tranco(const std::string& old_path, const std::string& new_path,
                    const std::string& out_path) {
    auto load = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in.is_open()) throw UsageError("cannot open: " + path);
        return parse_tranco(in);
    };
    auto old_list = load(old_path);
    auto new_list = load(new_path);
    DatasetDiff diff = diff_tranco(old_list.entries, new_list.entries);

    if (diff.empty()) {
        std::cout << "no changes\n";
        return 0;
    }
    Provenance provenance{{"generator", kVersion}, {"old", old_path}, {"new", new_path}};
    if (out_path.empty()) {
        write_tranco_diff_csv(std::cout, diff, provenance);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out.is_open()) throw IoError("cannot write: " + out_path);
        write_tranco_diff_csv(out, diff, provenance);
    }
    std::cout << "added=" << diff.added.size() << " removed=" << diff.removed.size()
              << " rank_changed=" << diff.rank_changed.size() << "\n";
    return 0;
}

int cmd_diff_ranking(const std::string& old_path, const std::string& new_path,
                     const std::string& out_path) {
    auto load = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in.is_open()) throw UsageError("cannot open: " + path);
        return read_ranking_csv(in);
    };
    ProviderRanking old_ranking = load(old_path);
    ProviderRanking new_ranking = load(new_path);
    auto changes = diff_rankings(old_ranking, new_ranking);

    if (changes.empty()) {
        std::cout << "no changes\n";
        return 0;
    }
    Provenance provenance{{"generator", kVersion}, {"old", old_path}, {"new", new_path},
                          {"k", std::to_string(old_ranking.k)},
                          {"policy", to_string(old_ranking.policy)}};
    if (out_path.empty()) {
        write_rank_changes_csv(std::cout, changes, provenance);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out.is_open()) throw IoError("cannot write: " + out_path);
        write_rank_changes_csv(out, changes, provenance);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsflow: map domains to authoritative NS providers and analyze "
                 "DNS centralization and digital sovereignty"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string backend_override;
    std::string store_override;
    std::string date_override;

    auto* ingest = app.add_subcommand("ingest", "Parse and validate the configured datasets");
    ingest->add_option("--config", config_path, "Run configuration file")->required();

    auto* measure = app.add_subcommand(
        "measure", "Resolve NS/A/AAAA for the Tranco domains and persist a snapshot");
    std::uint64_t limit = 0;
    measure->add_option("--config", config_path, "Run configuration file")->required();
    measure->add_option("--limit", limit, "Measure only the first N domains");
    measure->add_option("--backend", backend_override, "live or fixture:PATH");
    measure->add_option("--store", store_override, "Override the store path");
    measure->add_option("--date", date_override, "Run date override (YYYY-MM-DD)");

    auto* analyze = app.add_subcommand("analyze", "Compute analytics over stored snapshots");
    analyze->require_subcommand(1);

    std::vector<std::string> rank_snapshots;
    int k = 10;
    std::string policy_text = "any_ns";
    std::string label;
    std::string out_dir = "reports";
    auto* rank = analyze->add_subcommand("rank", "Top-K provider ranking");
    rank->add_option("--config", config_path, "Run configuration file")->required();
    rank->add_option("--snapshot", rank_snapshots,
                     "Snapshot id (repeatable; a period is a set of snapshots)");
    rank->add_option("--k", k, "Ranking size");
    rank->add_option("--policy", policy_text, "any|all|majority");
    rank->add_option("--label", label, "Period label for the report");
    rank->add_option("--out", out_dir, "Output directory");
    rank->add_option("--store", store_override, "Override the store path");

    std::string snapshot_id;
    std::string domains_arg;
    std::string domains_file;
    auto* selfh = analyze->add_subcommand("self-hosting",
                                          "Which providers host the providers' own domains");
    selfh->add_option("--config", config_path, "Run configuration file")->required();
    selfh->add_option("--snapshot", snapshot_id, "Snapshot id (default: latest)");
    selfh->add_option("--domains", domains_arg, "Comma-separated domains");
    selfh->add_option("--domains-file", domains_file, "File with one domain per line");
    selfh->add_option("--out", out_dir, "Output directory");
    selfh->add_option("--store", store_override, "Override the store path");

    std::string snapshots_arg;
    std::string top_set;
    auto* conc = analyze->add_subcommand("concentration",
                                         "Share of domains on the top-K providers over time");
    conc->add_option("--config", config_path, "Run configuration file")->required();
    conc->add_option("--snapshots", snapshots_arg, "Comma-separated snapshot ids, or 'all'");
    conc->add_option("--k", k, "Top set size");
    conc->add_option("--top-set", top_set, "per-snapshot (default) or from:SNAPSHOT_ID");
    conc->add_option("--out", out_dir, "Output directory");
    conc->add_option("--store", store_override, "Override the store path");

    std::string cctld;
    std::string group_name;
    double threshold = kDefaultOthersThreshold;
    auto* sov = analyze->add_subcommand("sovereignty",
                                        "Hosting-country shares for a ccTLD or group");
    sov->add_option("--config", config_path, "Run configuration file")->required();
    sov->add_option("--snapshot", snapshot_id, "Snapshot id (default: latest)");
    sov->add_option("--cctld", cctld, "Single ccTLD suffix, e.g. .br");
    sov->add_option("--group", group_name, "Configured group name, e.g. BRICS");
    sov->add_option("--threshold", threshold, "Fold countries below this share into OTHERS");
    std::string share_mode = "fractional";
    sov->add_option("--share-mode", share_mode, "fractional (default) or any-country");
    sov->add_option("--out", out_dir, "Output directory");
    sov->add_option("--store", store_override, "Override the store path");

    std::string suffixes_arg;
    auto* gov = analyze->add_subcommand("governmental",
                                        "Hosting breakdown for restricted .gov.* suffixes");
    gov->add_option("--config", config_path, "Run configuration file")->required();
    gov->add_option("--snapshot", snapshot_id, "Snapshot id (default: latest)");
    gov->add_option("--suffixes", suffixes_arg, "Comma-separated suffixes, e.g. .gov.br");
    gov->add_option("--out", out_dir, "Output directory");
    gov->add_option("--store", store_override, "Override the store path");

    auto* exp = analyze->add_subcommand("export", "Export a snapshot as line-delimited JSON");
    exp->add_option("--config", config_path, "Run configuration file")->required();
    exp->add_option("--snapshot", snapshot_id, "Snapshot id (default: latest)");
    exp->add_option("--out", out_dir, "Output directory");
    exp->add_option("--store", store_override, "Override the store path");

    auto* diff = app.add_subcommand("diff", "Diff two Tranco lists or two ranking reports");
    diff->require_subcommand(1);
    std::string old_path, new_path, out_file;
    auto* diff_tranco_cmd = diff->add_subcommand("tranco", "Diff two rank,domain CSV lists");
    diff_tranco_cmd->add_option("old", old_path, "Old list")->required();
    diff_tranco_cmd->add_option("new", new_path, "New list")->required();
    diff_tranco_cmd->add_option("--out", out_file, "Write the diff CSV here (default stdout)");
    auto* diff_rank_cmd = diff->add_subcommand("ranking", "Diff two rank.csv reports");
    diff_rank_cmd->add_option("old", old_path, "Old ranking CSV")->required();
    diff_rank_cmd->add_option("new", new_path, "New ranking CSV")->required();
    diff_rank_cmd->add_option("--out", out_file, "Write the diff CSV here (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(config_path);
        if (measure->parsed()) {
            return cmd_measure(config_path, limit, backend_override, store_override,
                               date_override);
        }
        if (analyze->parsed()) {
            RunConfig config = load_config_or_throw(config_path);
            apply_overrides(config, "", store_override, "");
            if (rank->parsed()) {
                return cmd_analyze_rank(config, config_path, rank_snapshots, k, policy_text, label,
                                        out_dir);
            }
            if (selfh->parsed()) {
                return cmd_analyze_self_hosting(config, config_path, snapshot_id, domains_arg,
                                                domains_file, out_dir);
            }
            if (conc->parsed()) {
                return cmd_analyze_concentration(config, config_path, snapshots_arg, k, top_set,
                                                 out_dir);
            }
            if (sov->parsed()) {
                return cmd_analyze_sovereignty(config, config_path, snapshot_id, cctld, group_name,
                                               threshold, share_mode, out_dir);
            }
            if (gov->parsed()) {
                return cmd_analyze_governmental(config, config_path, snapshot_id, suffixes_arg,
                                                out_dir);
            }
            if (exp->parsed()) return cmd_analyze_export(config, snapshot_id, out_dir);
        }
        if (diff->parsed()) {
            if (diff_tranco_cmd->parsed()) return cmd_diff_tranco(old_path, new_path, out_file);
            if (diff_rank_cmd->parsed()) return cmd_diff_ranking(old_path, new_path, out_file);
        }
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
