#include "nsflow/flowmap.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsflow/errors.hpp"
#include "nsflow/util.hpp"

namespace nsflow {

using nlohmann::json;

ResolutionFlow map_flow(const NsRecordSet& records, const LpmIndex& index,
                        const std::map<std::uint32_t, AsOrg>& orgs) {
    ResolutionFlow flow;
    flow.domain = records.domain;
    flow.status = records.status;
    flow.queried_at = records.queried_at;
    flow.error_detail = records.error_detail;
    flow.ns_hosts = records.ns_hosts;
    flow.ns_addresses = records.ns_addresses;

    for (const auto& [host, ips] : flow.ns_addresses) {
        for (const auto& ip : ips) {
            if (flow.attributions.contains(ip) || flow.unmapped_ips.contains(ip)) continue;
            Attribution att = index.lookup(ip, orgs);
            if (!att.matched()) {
                flow.unmapped_ips.insert(ip);
                continue;
            }
            AttributionEdge edge;
            edge.prefix = *att.matched_prefix;
            edge.asn = *att.asn;
            if (att.org) {
                edge.as_name = att.org->as_name;
                edge.org_id = att.org->org_id;
                edge.org_name = att.org->org_name;
                edge.country = att.org->country;
            } else {
                std::string fallback = "AS" + std::to_string(edge.asn);
                edge.as_name = fallback;
                edge.org_id = fallback;
                edge.org_name = fallback;
                edge.country = kUnknownCountry;
            }
            flow.attributions.emplace(ip, std::move(edge));
        }
    }
    return flow;
}

namespace {

void hash_flow(std::uint64_t& h, const ResolutionFlow& flow) {
    auto feed = [&h](std::string_view s) {
        h = fnv1a(s, h);
        h = fnv1a("\x1f", h);
    };
    feed(flow.domain);
    feed(to_string(flow.status));
    feed(flow.error_detail);
    for (const auto& host : flow.ns_hosts) feed(host);
    for (const auto& [host, ips] : flow.ns_addresses) {
        feed(host);
        for (const auto& ip : ips) feed(ip.to_string());
    }
    for (const auto& [ip, edge] : flow.attributions) {
        feed(ip.to_string());
        feed(edge.prefix.to_string());
        feed(std::to_string(edge.asn));
        feed(edge.as_name);
        feed(edge.org_id);
        feed(edge.org_name);
        feed(edge.country);
    }
    for (const auto& ip : flow.unmapped_ips) feed(ip.to_string());
}

}  // namespace

std::string compute_snapshot_id(const std::vector<ResolutionFlow>& flows,
                                const SnapshotMeta& meta) {
    std::uint64_t h = kFnvOffset;
    auto feed = [&h](std::string_view s) {
        h = fnv1a(s, h);
        h = fnv1a("\x1f", h);
    };
    feed(meta.run_date);
    feed(meta.tranco_label);
    feed(meta.prefix2as_v4_label);
    feed(meta.prefix2as_v6_label);
    feed(meta.as2org_label);

    // Hash in domain order so the id is insensitive to stream order.
    std::map<std::string_view, const ResolutionFlow*> by_domain;
    for (const auto& flow : flows) by_domain.emplace(flow.domain, &flow);
    for (const auto& [domain, flow] : by_domain) hash_flow(h, *flow);

    std::string date = meta.run_date.empty() ? "undated" : meta.run_date;
    return "snap-" + date + "-" + hex64(h).substr(0, 12);
}

// ---------------------------------------------------------------------------
// SnapshotStore

namespace {

constexpr int kStoreVersion = 1;

json edge_to_json(const IpAddress& ip, const AttributionEdge& edge) {
    return json{{"t", "attribution"}, {"ip", ip.to_string()},      {"matched", true},
                {"prefix", edge.prefix.to_string()},               {"asn", edge.asn},
                {"as_name", edge.as_name},                         {"org_id", edge.org_id},
                {"org_name", edge.org_name},                       {"country", edge.country}};
}

struct ScanState {
    // Committed snapshots, in commit order.
    std::vector<std::string> committed;
    // Byte offset just past the last committed row (or the header); any bytes
    // after this point belong to an interrupted write and get truncated
    // before the next persist.
    std::streamoff valid_end = 0;
    bool has_header = false;
};

ScanState scan_store(const std::filesystem::path& path) {
    ScanState state;
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) return state;

    std::string line;
    std::streamoff offset = 0;
    bool first = true;
    while (std::getline(in, line)) {
        std::streamoff line_end = in.tellg() == std::streampos(-1)
                                      ? offset + static_cast<std::streamoff>(line.size())
                                      : static_cast<std::streamoff>(in.tellg());
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception&) {
            if (first) throw FormatError("store: not an nsflow store: " + path.string());
            break;  // partial trailing line from an interrupted write
        }
        std::string tag = row.value("t", "");
        if (first) {
            if (tag != "nsflow_store" || row.value("version", 0) != kStoreVersion) {
                throw FormatError("store: bad header in " + path.string());
            }
            state.has_header = true;
            state.valid_end = line_end;
            first = false;
        } else if (tag == "snapshot") {
            state.committed.push_back(row.at("sid").get<std::string>());
            state.valid_end = line_end;
        }
        offset = line_end;
    }
    return state;
}

// Rows of one snapshot in file order, commit row last.
struct SnapshotRows {
    std::vector<json> rows;
    json commit;
    bool found = false;
};

SnapshotRows read_rows(const std::filesystem::path& path, const std::string& sid) {
    SnapshotRows out;
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) return out;

    std::set<std::string> committed;
    {
        // First pass: learn which snapshots committed so dangling rows from a
        // torn write are never surfaced.
        std::string line;
        while (std::getline(in, line)) {
            json row;
            try {
                row = json::parse(line);
            } catch (const json::exception&) {
                break;
            }
            if (row.value("t", "") == "snapshot") {
                committed.insert(row.at("sid").get<std::string>());
            }
        }
    }
    if (!committed.contains(sid)) return out;

    in.clear();
    in.seekg(0);
    std::string line;
    while (std::getline(in, line)) {
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception&) {
            break;
        }
        if (row.value("sid", "") != sid) continue;
        if (row.value("t", "") == "snapshot") {
            out.commit = std::move(row);
            out.found = true;
        } else {
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

IpAddress parse_ip_or_throw(const std::string& text) {
    auto ip = IpAddress::parse(text);
    if (!ip) throw FormatError("store: bad ip " + text);
    return *ip;
}

}  // namespace

SnapshotStore::SnapshotStore(std::filesystem::path path) : path_(std::move(path)) {}

std::string SnapshotStore::persist(const std::vector<ResolutionFlow>& flows,
                                   const SnapshotMeta& meta) {
    // Validate and count before touching the file.
    std::vector<const ResolutionFlow*> accepted;
    accepted.reserve(flows.size());
    SnapshotCounters counters;
    std::set<std::string_view> seen;
    for (const auto& flow : flows) {
        if (!seen.insert(flow.domain).second) {
            ++counters.duplicate_domains;
            continue;
        }
        for (const auto& [host, ips] : flow.ns_addresses) {
            if (!flow.ns_hosts.contains(host)) {
                throw UsageError("flow for " + flow.domain + ": address host " + host +
                                 " missing from ns_hosts");
            }
            for (const auto& ip : ips) {
                if (!flow.attributions.contains(ip) && !flow.unmapped_ips.contains(ip)) {
                    throw UsageError("flow for " + flow.domain + ": ip " + ip.to_string() +
                                     " neither attributed nor unmapped");
                }
            }
        }
        accepted.push_back(&flow);
        ++counters.input;
        switch (flow.status) {
            case ResolveStatus::ok: ++counters.ok; break;
            case ResolveStatus::no_ns_records: ++counters.no_ns; break;
            case ResolveStatus::resolution_failed: ++counters.failed; break;
            case ResolveStatus::timed_out: ++counters.timed_out; break;
        }
        counters.unmapped_ip += flow.unmapped_ips.size();
    }

    std::vector<ResolutionFlow> accepted_flows;
    accepted_flows.reserve(accepted.size());
    for (const auto* f : accepted) accepted_flows.push_back(*f);
    std::string sid = compute_snapshot_id(accepted_flows, meta);

    ScanState state = scan_store(path_);
    for (const auto& existing : state.committed) {
        if (existing == sid) return sid;  // idempotent re-persist
    }

    std::error_code ec;
    if (state.has_header) {
        // Drop bytes from any interrupted previous write.
        auto size = std::filesystem::file_size(path_, ec);
        if (!ec && static_cast<std::streamoff>(size) > state.valid_end) {
            std::filesystem::resize_file(path_, static_cast<std::uintmax_t>(state.valid_end), ec);
            if (ec) throw IoError("store: cannot truncate " + path_.string());
        }
    }

    std::streamoff rollback_to = state.valid_end;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out.is_open()) throw IoError("store: cannot open " + path_.string());
    if (!state.has_header) {
        out << json{{"t", "nsflow_store"}, {"version", kStoreVersion}}.dump() << "\n";
        rollback_to = 0;
    }

    auto rollback = [&] {
        out.close();
        std::error_code rec;
        if (rollback_to == 0 && !state.has_header) {
            std::filesystem::remove(path_, rec);
        } else {
            std::filesystem::resize_file(path_, static_cast<std::uintmax_t>(rollback_to), rec);
        }
    };

    try {
        // Shared attribution table: one row per distinct IP.
        std::map<IpAddress, AttributionEdge> attributions;
        std::set<IpAddress> unmapped;
        for (const auto* flow : accepted) {
            for (const auto& [ip, edge] : flow->attributions) attributions.emplace(ip, edge);
            unmapped.insert(flow->unmapped_ips.begin(), flow->unmapped_ips.end());
        }

        for (const auto* flow : accepted) {
            out << json{{"t", "domain"},
                        {"sid", sid},
                        {"domain", flow->domain},
                        {"status", to_string(flow->status)},
                        {"queried_at", static_cast<std::int64_t>(flow->queried_at)},
                        {"error", flow->error_detail}}
                       .dump()
                << "\n";
            for (const auto& host : flow->ns_hosts) {
                out << json{{"t", "ns_host"}, {"sid", sid}, {"domain", flow->domain},
                            {"host", host}}
                           .dump()
                    << "\n";
            }
            for (const auto& [host, ips] : flow->ns_addresses) {
                for (const auto& ip : ips) {
                    out << json{{"t", "ns_ip"},
                                {"sid", sid},
                                {"domain", flow->domain},
                                {"host", host},
                                {"ip", ip.to_string()}}
                               .dump()
                        << "\n";
                }
            }
        }
        for (const auto& [ip, edge] : attributions) {
            json row = edge_to_json(ip, edge);
            row["sid"] = sid;
            out << row.dump() << "\n";
        }
        for (const auto& ip : unmapped) {
            if (attributions.contains(ip)) continue;
            out << json{{"t", "attribution"}, {"sid", sid}, {"ip", ip.to_string()},
                        {"matched", false}}
                       .dump()
                << "\n";
        }

        out.flush();
        if (!out.good()) throw IoError("store: write failure on " + path_.string());

        out << json{{"t", "snapshot"},
                    {"sid", sid},
                    {"run_date", meta.run_date},
                    {"tranco_label", meta.tranco_label},
                    {"prefix2as_v4_label", meta.prefix2as_v4_label},
                    {"prefix2as_v6_label", meta.prefix2as_v6_label},
                    {"as2org_label", meta.as2org_label},
                    {"counters",
                     {{"input", counters.input},
                      {"ok", counters.ok},
                      {"no_ns", counters.no_ns},
                      {"failed", counters.failed},
                      {"timed_out", counters.timed_out},
                      {"unmapped_ip", counters.unmapped_ip},
                      {"duplicate_domains", counters.duplicate_domains}}}}
                   .dump()
            << "\n";
        out.flush();
        if (!out.good()) throw IoError("store: commit failure on " + path_.string());
    } catch (...) {
        rollback();
        throw;
    }
    return sid;
}

MeasurementSnapshot SnapshotStore::load(const std::string& snapshot_id) const {
    SnapshotRows data = read_rows(path_, snapshot_id);
    if (!data.found) throw NotFoundError("snapshot not found: " + snapshot_id);

    MeasurementSnapshot snapshot;
    snapshot.snapshot_id = snapshot_id;
    snapshot.meta.run_date = data.commit.value("run_date", "");
    snapshot.meta.tranco_label = data.commit.value("tranco_label", "");
    snapshot.meta.prefix2as_v4_label = data.commit.value("prefix2as_v4_label", "");
    snapshot.meta.prefix2as_v6_label = data.commit.value("prefix2as_v6_label", "");
    snapshot.meta.as2org_label = data.commit.value("as2org_label", "");
    const auto& c = data.commit.at("counters");
    snapshot.counters.input = c.at("input").get<std::uint64_t>();
    snapshot.counters.ok = c.at("ok").get<std::uint64_t>();
    snapshot.counters.no_ns = c.at("no_ns").get<std::uint64_t>();
    snapshot.counters.failed = c.at("failed").get<std::uint64_t>();
    snapshot.counters.timed_out = c.at("timed_out").get<std::uint64_t>();
    snapshot.counters.unmapped_ip = c.at("unmapped_ip").get<std::uint64_t>();
    snapshot.counters.duplicate_domains = c.at("duplicate_domains").get<std::uint64_t>();

    std::map<IpAddress, AttributionEdge> attributions;
    std::set<IpAddress> unmapped;
    std::map<std::string, std::size_t> flow_index;

    for (const auto& row : data.rows) {
        std::string tag = row.at("t").get<std::string>();
        if (tag == "domain") {
            ResolutionFlow flow;
            flow.domain = row.at("domain").get<std::string>();
            auto status = resolve_status_from_string(row.at("status").get<std::string>());
            if (!status) throw FormatError("store: bad status row for " + flow.domain);
            flow.status = *status;
            flow.queried_at = static_cast<std::time_t>(row.at("queried_at").get<std::int64_t>());
            flow.error_detail = row.value("error", "");
            flow_index[flow.domain] = snapshot.flows.size();
            snapshot.flows.push_back(std::move(flow));
        } else if (tag == "ns_host") {
            snapshot.flows[flow_index.at(row.at("domain").get<std::string>())].ns_hosts.insert(
                row.at("host").get<std::string>());
        } else if (tag == "ns_ip") {
            auto& flow = snapshot.flows[flow_index.at(row.at("domain").get<std::string>())];
            flow.ns_addresses[row.at("host").get<std::string>()].insert(
                parse_ip_or_throw(row.at("ip").get<std::string>()));
        } else if (tag == "attribution") {
            IpAddress ip = parse_ip_or_throw(row.at("ip").get<std::string>());
            if (!row.at("matched").get<bool>()) {
                unmapped.insert(ip);
                continue;
            }
            AttributionEdge edge;
            auto prefix = IpNetwork::parse(row.at("prefix").get<std::string>());
            if (!prefix) throw FormatError("store: bad prefix row");
            edge.prefix = *prefix;
            edge.asn = row.at("asn").get<std::uint32_t>();
            edge.as_name = row.at("as_name").get<std::string>();
            edge.org_id = row.at("org_id").get<std::string>();
            edge.org_name = row.at("org_name").get<std::string>();
            edge.country = row.at("country").get<std::string>();
            attributions.emplace(ip, std::move(edge));
        }
    }

    for (auto& flow : snapshot.flows) {
        for (const auto& [host, ips] : flow.ns_addresses) {
            for (const auto& ip : ips) {
                auto it = attributions.find(ip);
                if (it != attributions.end()) {
                    flow.attributions.emplace(ip, it->second);
                } else if (unmapped.contains(ip)) {
                    flow.unmapped_ips.insert(ip);
                } else {
                    throw FormatError("store: ip without attribution row: " + ip.to_string());
                }
            }
        }
    }
    return snapshot;
}

bool SnapshotStore::contains(const std::string& snapshot_id) const {
    for (const auto& sid : list()) {
        if (sid == snapshot_id) return true;
    }
    return false;
}

std::vector<std::string> SnapshotStore::list() const {
    return scan_store(path_).committed;
}

SnapshotStore::Audit SnapshotStore::audit(const std::string& snapshot_id) const {
    MeasurementSnapshot snapshot = load(snapshot_id);
    SnapshotCounters recount;
    recount.duplicate_domains = snapshot.counters.duplicate_domains;  // not derivable from rows
    for (const auto& flow : snapshot.flows) {
        ++recount.input;
        switch (flow.status) {
            case ResolveStatus::ok: ++recount.ok; break;
            case ResolveStatus::no_ns_records: ++recount.no_ns; break;
            case ResolveStatus::resolution_failed: ++recount.failed; break;
            case ResolveStatus::timed_out: ++recount.timed_out; break;
        }
        recount.unmapped_ip += flow.unmapped_ips.size();
    }

    Audit result;
    if (recount != snapshot.counters) {
        result.ok = false;
        result.detail = "stored counters do not match row recount";
        return result;
    }
    if (snapshot.counters.input != snapshot.counters.ok + snapshot.counters.no_ns +
                                       snapshot.counters.failed + snapshot.counters.timed_out) {
        result.ok = false;
        result.detail = "counter arithmetic violated";
    }
    return result;
}

void SnapshotStore::export_snapshot(const std::string& snapshot_id, std::ostream& out) const {
    MeasurementSnapshot snapshot = load(snapshot_id);
    out << json{{"t", "meta"},
                {"sid", snapshot.snapshot_id},
                {"run_date", snapshot.meta.run_date},
                {"tranco_label", snapshot.meta.tranco_label},
                {"prefix2as_v4_label", snapshot.meta.prefix2as_v4_label},
                {"prefix2as_v6_label", snapshot.meta.prefix2as_v6_label},
                {"as2org_label", snapshot.meta.as2org_label}}
               .dump()
        << "\n";
    for (const auto& flow : snapshot.flows) {
        json addresses = json::object();
        for (const auto& [host, ips] : flow.ns_addresses) {
            json list = json::array();
            for (const auto& ip : ips) list.push_back(ip.to_string());
            addresses[host] = std::move(list);
        }
        json hosts = json::array();
        for (const auto& host : flow.ns_hosts) hosts.push_back(host);
        json attributions = json::array();
        for (const auto& [ip, edge] : flow.attributions) {
            json row = edge_to_json(ip, edge);
            row.erase("t");
            attributions.push_back(std::move(row));
        }
        json unmapped = json::array();
        for (const auto& ip : flow.unmapped_ips) unmapped.push_back(ip.to_string());

        out << json{{"domain", flow.domain},
                    {"status", to_string(flow.status)},
                    {"queried_at", static_cast<std::int64_t>(flow.queried_at)},
                    {"error_detail", flow.error_detail},
                    {"ns_hosts", std::move(hosts)},
                    {"ns_addresses", std::move(addresses)},
                    {"attributions", std::move(attributions)},
                    {"unmapped_ips", std::move(unmapped)}}
                   .dump()
            << "\n";
    }
}

}  // namespace nsflow
