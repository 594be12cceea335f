#include "gpm/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "gpm/error.hpp"

namespace gpm {

namespace {

struct CounterField {
    const char* name;
    std::uint64_t WorkerMetrics::* member;
};

constexpr CounterField kCounters[] = {
    {"bytes_sent", &WorkerMetrics::bytes_sent},
    {"bytes_received", &WorkerMetrics::bytes_received},
    {"messages_sent", &WorkerMetrics::messages_sent},
    {"messages_received", &WorkerMetrics::messages_received},
    {"fetch_count", &WorkerMetrics::fetch_count},
    {"cache_hits", &WorkerMetrics::cache_hits},
    {"cache_misses", &WorkerMetrics::cache_misses},
    {"cache_inserts", &WorkerMetrics::cache_inserts},
    {"cache_bytes", &WorkerMetrics::cache_bytes},
    {"dedup_claimed", &WorkerMetrics::dedup_claimed},
    {"dedup_shared", &WorkerMetrics::dedup_shared},
    {"dedup_dropped", &WorkerMetrics::dedup_dropped},
    {"peak_live_chunks", &WorkerMetrics::peak_live_chunks},
    {"peak_arena_bytes", &WorkerMetrics::peak_arena_bytes},
    {"embeddings_created", &WorkerMetrics::embeddings_created},
    {"ready_transitions", &WorkerMetrics::ready_transitions},
    {"zombie_transitions", &WorkerMetrics::zombie_transitions},
    {"terminated_transitions", &WorkerMetrics::terminated_transitions},
    {"intersection_ops", &WorkerMetrics::intersection_ops},
};

struct TimeField {
    const char* name;
    double WorkerMetrics::* member;
};

constexpr TimeField kTimes[] = {
    {"time.load", &WorkerMetrics::time_load_s},
    {"time.partition", &WorkerMetrics::time_partition_s},
    {"time.explore", &WorkerMetrics::time_explore_s},
    {"time.reduce", &WorkerMetrics::time_reduce_s},
};

} // namespace

void write_report(std::ostream& out, const RunReport& report) {
    for (const auto& [name, count] : report.global_counts)
        out << "global." << name << '=' << count << '\n';
    for (std::size_t i = 0; i < report.workers.size(); ++i) {
        const auto& w = report.workers[i];
        for (const auto& f : kCounters)
            out << "worker." << i << '.' << f.name << '=' << w.*(f.member) << '\n';
        for (const auto& f : kTimes) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", w.*(f.member));
            out << "worker." << i << '.' << f.name << '=' << buf << '\n';
        }
        for (const auto& [v, n] : w.fetched)
            out << "worker." << i << ".fetch." << v << '=' << n << '\n';
    }
}

RunReport parse_report(std::istream& in) {
    RunReport report;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("report: missing '=' on line " + std::to_string(lineno));
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key.rfind("global.", 0) == 0) {
            report.global_counts.emplace_back(key.substr(7), std::stoull(value));
            continue;
        }
        if (key.rfind("worker.", 0) != 0)
            throw ParseError("report: unknown key " + key);
        auto dot = key.find('.', 7);
        if (dot == std::string::npos)
            throw ParseError("report: bad worker key " + key);
        std::size_t idx = std::stoull(key.substr(7, dot - 7));
        if (report.workers.size() <= idx) report.workers.resize(idx + 1);
        auto& w = report.workers[idx];
        std::string field = key.substr(dot + 1);
        if (field.rfind("fetch.", 0) == 0) {
            w.fetched[std::stoull(field.substr(6))] = std::stoull(value);
            continue;
        }
        bool found = false;
        for (const auto& f : kCounters) {
            if (field == f.name) {
                w.*(f.member) = std::stoull(value);
                found = true;
                break;
            }
        }
        if (!found) {
            for (const auto& f : kTimes) {
                if (field == f.name) {
                    w.*(f.member) = std::stod(value);
                    found = true;
                    break;
                }
            }
        }
        if (!found) throw ParseError("report: unknown field " + field);
    }
    return report;
}

} // namespace gpm
