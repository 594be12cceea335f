#include "gpm/plan.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "gpm/error.hpp"

namespace gpm {

bool Pattern::has_edge(std::uint32_t a, std::uint32_t b) const {
    for (auto [u, v] : edges)
        if ((u == a && v == b) || (u == b && v == a)) return true;
    return false;
}

bool Pattern::connected() const {
    if (k == 0) return false;
    std::vector<bool> seen(k, false);
    std::vector<std::uint32_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto [a, b] : edges) {
            std::uint32_t other = (a == u) ? b : (b == u) ? a : u;
            if (other != u && !seen[other]) {
                seen[other] = true;
                stack.push_back(other);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

void MatchPlan::finalize() {
    lower_bound_positions.assign(k, {});
    upper_bound_positions.assign(k, {});
    for (auto [a, b] : restrictions) {
        // applied when the later position gets placed
        if (a < b)
            lower_bound_positions[b].push_back(a);
        else
            upper_bound_positions[a].push_back(b);
    }
    store_intersection.assign(k, false);
    reuse_from_parent.assign(k, false);
    for (std::uint32_t p = 2; p < k; ++p) {
        const auto& prev = intersect_sources[p - 1];
        if (prev.size() < 2) continue;
        std::vector<std::uint32_t> expect(prev);
        expect.push_back(p - 1);
        std::sort(expect.begin(), expect.end());
        if (expect == intersect_sources[p]) {
            store_intersection[p - 1] = true;
            reuse_from_parent[p] = true;
        }
    }
}

bool MatchPlan::position_active(std::uint32_t depth, std::uint32_t pos) const {
    const auto& act = active_after[depth];
    return std::find(act.begin(), act.end(), pos) != act.end();
}

MatchPlan plan_from_pattern(const Pattern& p, Semantics semantics,
                            std::vector<std::pair<std::uint32_t, std::uint32_t>> restrictions,
                            std::string name) {
    MatchPlan plan;
    plan.name = std::move(name);
    plan.k = p.k;
    plan.semantics = semantics;
    plan.labels = p.labels;
    plan.restrictions = std::move(restrictions);
    plan.intersect_sources.assign(p.k, {});
    plan.anti_sources.assign(p.k, {});
    for (std::uint32_t pos = 1; pos < p.k; ++pos) {
        for (std::uint32_t q = 0; q < pos; ++q) {
            if (p.has_edge(q, pos))
                plan.intersect_sources[pos].push_back(q);
            else if (semantics == Semantics::VertexInduced)
                plan.anti_sources[pos].push_back(q);
        }
        if (plan.intersect_sources[pos].empty())
            throw ConfigError("pattern order disconnected at position " + std::to_string(pos));
    }
    // minimal active sets: keep exactly what deeper levels still read
    std::uint32_t depths = p.k > 0 ? p.k - 1 : 0;
    plan.active_after.assign(depths, {});
    for (std::uint32_t d = 0; d + 1 < p.k; ++d) {
        std::set<std::uint32_t> need;
        for (std::uint32_t j = d + 1; j < p.k; ++j) {
            for (auto q : plan.intersect_sources[j])
                if (q <= d) need.insert(q);
            for (auto q : plan.anti_sources[j])
                if (q <= d) need.insert(q);
        }
        plan.active_after[d].assign(need.begin(), need.end());
    }
    plan.finalize();
    return plan;
}

Pattern clique_pattern(std::uint32_t k) {
    Pattern p;
    p.k = k;
    for (std::uint32_t a = 0; a < k; ++a)
        for (std::uint32_t b = a + 1; b < k; ++b) p.edges.emplace_back(a, b);
    return p;
}

MatchPlan clique_plan(std::uint32_t k, bool with_restrictions) {
    if (k < 3) throw ConfigError("clique plan requires k >= 3");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> restr;
    if (with_restrictions)
        for (std::uint32_t i = 0; i + 1 < k; ++i) restr.emplace_back(i, i + 1);
    std::string name = (k == 3) ? "triangle" : std::to_string(k) + "clique";
    return plan_from_pattern(clique_pattern(k), Semantics::VertexInduced,
                             std::move(restr), name);
}

std::vector<std::pair<Pattern, MatchPlan>> motif_patterns(std::uint32_t k) {
    using P = std::pair<std::uint32_t, std::uint32_t>;
    auto mk = [](std::uint32_t k, std::vector<P> edges, std::vector<P> restr,
                 std::string name) {
        Pattern p;
        p.k = k;
        p.edges = std::move(edges);
        auto plan = plan_from_pattern(p, Semantics::VertexInduced, std::move(restr),
                                      std::move(name));
        return std::make_pair(std::move(p), std::move(plan));
    };
    if (k == 3) {
        return {
            mk(3, {{0, 1}, {0, 2}, {1, 2}}, {{0, 1}, {1, 2}}, "triangle"),
            mk(3, {{0, 1}, {0, 2}}, {{1, 2}}, "wedge"),
        };
    }
    if (k == 4) {
        return {
            mk(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}},
               {{0, 1}, {1, 2}, {2, 3}}, "4clique"),
            mk(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}, {{0, 1}, {2, 3}},
               "diamond"),
            mk(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}},
               {{0, 1}, {0, 2}, {0, 3}, {1, 3}}, "4cycle"),
            mk(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}}, {{1, 2}}, "tailed_triangle"),
            mk(4, {{0, 1}, {0, 2}, {0, 3}}, {{1, 2}, {2, 3}}, "3star"),
            mk(4, {{0, 1}, {1, 2}, {2, 3}}, {{0, 3}}, "4path"),
        };
    }
    throw ConfigError("motif counting supports k in {3,4}");
}

namespace {

struct PlanRunner {
    const MatchPlan& plan;
    const std::vector<std::vector<VertexId>>& adj;
    const std::vector<std::uint32_t>* vlabels;
    std::vector<VertexId> assign;
    std::uint64_t count = 0;

    bool label_ok(std::uint32_t pos, VertexId v) const {
        if (plan.labels.empty() || !vlabels) return true;
        return (*vlabels)[v] == plan.labels[pos];
    }

    bool bounds_ok(std::uint32_t pos, VertexId v) const {
        for (auto q : plan.lower_bound_positions[pos])
            if (!(assign[q] < v)) return false;
        for (auto q : plan.upper_bound_positions[pos])
            if (!(v < assign[q])) return false;
        return true;
    }

    void place(std::uint32_t pos) {
        if (pos == plan.k) {
            ++count;
            return;
        }
        // candidates from the first source, checked against the rest
        const auto& srcs = plan.intersect_sources[pos];
        for (VertexId v : adj[assign[srcs[0]]]) {
            bool ok = label_ok(pos, v) && bounds_ok(pos, v);
            for (std::size_t s = 1; ok && s < srcs.size(); ++s) {
                const auto& lst = adj[assign[srcs[s]]];
                ok = std::binary_search(lst.begin(), lst.end(), v);
            }
            for (std::size_t a = 0; ok && a < plan.anti_sources[pos].size(); ++a) {
                const auto& lst = adj[assign[plan.anti_sources[pos][a]]];
                ok = !std::binary_search(lst.begin(), lst.end(), v);
            }
            for (std::uint32_t q = 0; ok && q < pos; ++q) ok = assign[q] != v;
            if (!ok) continue;
            assign[pos] = v;
            place(pos + 1);
        }
    }
};

} // namespace

std::uint64_t enumerate_plan(const MatchPlan& plan,
                             const std::vector<std::vector<VertexId>>& adj,
                             const std::vector<std::uint32_t>* vertex_labels) {
    PlanRunner r{plan, adj, vertex_labels, std::vector<VertexId>(plan.k), 0};
    for (VertexId v = 0; v < adj.size(); ++v) {
        if (!r.label_ok(0, v)) continue;
        r.assign[0] = v;
        if (plan.k == 1)
            ++r.count;
        else
            r.place(1);
    }
    return r.count;
}

PlanCheck validate_plan(const MatchPlan& plan, const Pattern& pattern) {
    auto fail = [](int level, std::string msg) {
        PlanCheck c;
        c.ok = false;
        c.level = level;
        c.message = std::move(msg);
        return c;
    };
    if (plan.k != pattern.k) return fail(-1, "plan/pattern size mismatch");
    if (pattern.k < 1) return fail(-1, "pattern must have k >= 1");
    for (auto [a, b] : pattern.edges)
        if (a == b) return fail(-1, "pattern has a self-loop");
    if (!pattern.connected()) return fail(-1, "pattern not connected");
    if (plan.intersect_sources.size() != plan.k || plan.anti_sources.size() != plan.k)
        return fail(-1, "per-level source vectors sized incorrectly");
    if (plan.k > 1 && plan.active_after.size() != plan.k - 1)
        return fail(-1, "active_after sized incorrectly");

    for (std::uint32_t p = 1; p < plan.k; ++p) {
        const auto& is = plan.intersect_sources[p];
        if (is.empty()) return fail(static_cast<int>(p), "empty intersect_sources");
        for (auto q : is)
            if (q >= p) return fail(static_cast<int>(p), "intersect source out of range");
        for (auto q : plan.anti_sources[p]) {
            if (q >= p) return fail(static_cast<int>(p), "anti source out of range");
            if (std::find(is.begin(), is.end(), q) != is.end())
                return fail(static_cast<int>(p), "position both intersect and anti source");
        }
    }
    // anti-monotone activeness and coverage of future needs
    for (std::uint32_t d = 0; d + 1 < plan.k; ++d) {
        for (auto q : plan.active_after[d])
            if (q > d) return fail(static_cast<int>(d), "active position not yet placed");
        if (d > 0) {
            for (auto q : plan.active_after[d]) {
                if (q <= d - 1 && !plan.position_active(d - 1, q))
                    return fail(static_cast<int>(d), "inactive position re-activated");
            }
        }
        for (std::uint32_t j = d + 1; j < plan.k; ++j) {
            for (auto q : plan.intersect_sources[j])
                if (q <= d && !plan.position_active(d, q))
                    return fail(static_cast<int>(j), "intersect source not kept active");
            for (auto q : plan.anti_sources[j])
                if (q <= d && !plan.position_active(d, q))
                    return fail(static_cast<int>(j), "anti source not kept active");
        }
    }
    for (auto [a, b] : plan.restrictions) {
        if (a == b || a >= plan.k || b >= plan.k)
            return fail(-1, "malformed restriction");
    }

    // self match: the plan run on its own pattern graph must find it once
    std::vector<std::vector<VertexId>> adj(pattern.k);
    for (auto [a, b] : pattern.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& l : adj) std::sort(l.begin(), l.end());
    PlanCheck c;
    c.self_match_count =
        enumerate_plan(plan, adj, pattern.labels.empty() ? nullptr : &pattern.labels);
    if (c.self_match_count != 1) {
        c.ok = false;
        c.level = -1;
        c.message = "self-match count " + std::to_string(c.self_match_count) + ", expected 1";
    }
    return c;
}

namespace {

std::string join_u32(const std::vector<std::uint32_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<std::uint32_t> split_u32(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoul(cur));
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::stoul(cur));
    return out;
}

// grabs the [...] payload following "key="
std::string bracket_field(const std::string& line, const std::string& key, int lineno) {
    auto at = line.find(key + "=[");
    if (at == std::string::npos)
        throw ParseError("plan: missing " + key + " on line " + std::to_string(lineno));
    auto start = at + key.size() + 2;
    auto end = line.find(']', start);
    if (end == std::string::npos)
        throw ParseError("plan: unterminated " + key + " on line " + std::to_string(lineno));
    return line.substr(start, end - start);
}

} // namespace

void format_plan(std::ostream& out, const MatchPlan& plan) {
    out << "plan " << plan.name << " k=" << plan.k << " semantics="
        << (plan.semantics == Semantics::VertexInduced ? "vertex" : "edge") << '\n';
    for (std::uint32_t p = 0; p < plan.k; ++p) {
        std::vector<std::uint32_t> restr;
        for (auto [a, b] : plan.restrictions)
            if (std::max(a, b) == p) {
                restr.push_back(a);
                restr.push_back(b);
            }
        std::string rs;
        for (std::size_t i = 0; i + 1 < restr.size(); i += 2) {
            if (i) rs += ',';
            rs += std::to_string(restr[i]) + '<' + std::to_string(restr[i + 1]);
        }
        out << "level " << p << ": intersect=[" << join_u32(plan.intersect_sources[p])
            << "] anti=[" << join_u32(plan.anti_sources[p]) << "] restrict=[" << rs
            << "] active=["
            << (p + 1 < plan.k ? join_u32(plan.active_after[p]) : std::string())
            << "]\n";
    }
}

MatchPlan parse_plan(std::istream& in) {
    MatchPlan plan;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "plan") {
            std::string kf, sf;
            ls >> plan.name >> kf >> sf;
            if (kf.rfind("k=", 0) != 0 || sf.rfind("semantics=", 0) != 0)
                throw ParseError("plan: bad header on line " + std::to_string(lineno));
            plan.k = std::stoul(kf.substr(2));
            std::string sem = sf.substr(10);
            if (sem == "vertex")
                plan.semantics = Semantics::VertexInduced;
            else if (sem == "edge")
                plan.semantics = Semantics::EdgeInduced;
            else
                throw ParseError("plan: unknown semantics " + sem);
            plan.intersect_sources.assign(plan.k, {});
            plan.anti_sources.assign(plan.k, {});
            plan.active_after.assign(plan.k > 0 ? plan.k - 1 : 0, {});
            header = true;
        } else if (tag == "level") {
            if (!header) throw ParseError("plan: level before header");
            std::uint32_t p;
            ls >> p;
            if (p >= plan.k) throw ParseError("plan: level out of range");
            plan.intersect_sources[p] = split_u32(bracket_field(line, "intersect", lineno));
            plan.anti_sources[p] = split_u32(bracket_field(line, "anti", lineno));
            if (p + 1 < plan.k)
                plan.active_after[p] = split_u32(bracket_field(line, "active", lineno));
            auto rs = bracket_field(line, "restrict", lineno);
            std::istringstream rss(rs);
            std::string item;
            while (std::getline(rss, item, ',')) {
                auto lt = item.find('<');
                if (lt == std::string::npos)
                    throw ParseError("plan: bad restriction on line " + std::to_string(lineno));
                plan.restrictions.emplace_back(std::stoul(item.substr(0, lt)),
                                               std::stoul(item.substr(lt + 1)));
            }
        } else {
            throw ParseError("plan: unknown directive on line " + std::to_string(lineno));
        }
    }
    if (!header) throw ParseError("plan: empty input");
    plan.finalize();
    return plan;
}

PatternApp make_app(const std::string& app_name, bool oriented) {
    PatternApp app;
    app.name = app_name;
    auto add_clique = [&](std::uint32_t k) {
        app.patterns.push_back(clique_pattern(k));
        app.plans.push_back(clique_plan(k, /*with_restrictions=*/!oriented));
    };
    if (app_name == "tc") {
        add_clique(3);
    } else if (app_name == "3mc" || app_name == "4mc") {
        if (oriented)
            throw ConfigError("orientation only applies to clique apps");
        for (auto& [pat, plan] : motif_patterns(app_name == "3mc" ? 3 : 4)) {
            app.patterns.push_back(pat);
            app.plans.push_back(plan);
        }
    } else if (app_name.rfind("kcc:", 0) == 0) {
        std::uint32_t k = std::stoul(app_name.substr(4));
        add_clique(k);
    } else {
        throw ConfigError("unknown app: " + app_name +
                          " (expected tc, 3mc, 4mc, or kcc:K)");
    }
    return app;
}

} // namespace gpm
