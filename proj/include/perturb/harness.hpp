// Analytic bound calculators, the exhaustive containment oracle, and the
// Monte Carlo sweep machinery with reproducible seeding and CSV/SVG output.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "perturb/decomposition.hpp"
#include "perturb/embedder.hpp"
#include "perturb/graph.hpp"
#include "perturb/targets.hpp"

namespace perturb {

// ---------------------------------------------------------------------------
// Closed-form quantities.

// The suitability epsilon (alpha / 4*delta)^(2*delta); about 1e-13 already at
// alpha=0.4, delta=4, which is why experiments run on an operational epsilon.
inline double epsilon_of(double alpha, int delta) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("epsilon_of: alpha outside (0,1]");
    if (delta < 1) throw std::invalid_argument("epsilon_of: delta must be >= 1");
    return std::pow(alpha / (4.0 * delta), 2.0 * delta);
}

struct JansonReport {
    double mu = 0.0;      // sum of p^e(H_i)
    double delta = 0.0;   // sum over ordered intersecting pairs of p^{e_i+e_j-e(H_i cap H_j)}
    double gamma = 0.0;
    double bound = 1.0;   // exp(-gamma^2 mu^2 / (2 (mu + delta)))
};

inline JansonReport janson_report(const std::vector<Graph>& family, double p, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("janson_report: gamma outside (0,1)");
    if (family.size() > 10000) throw std::invalid_argument("janson_report: family too large for the pair scan");
    JansonReport rep;
    rep.gamma = gamma;
    for (auto& h : family) {
        if (h.n() != family[0].n()) throw std::invalid_argument("janson_report: members live on different [n]");
        rep.mu += std::pow(p, h.edge_count());
    }
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = 0; j < family.size(); ++j) {
            if (i == j) continue;
            int shared = 0;
            for (auto& e : family[i].edges())
                if (family[j].has_edge(e.first, e.second)) ++shared;
            if (shared > 0)
                rep.delta += std::pow(p, family[i].edge_count() + family[j].edge_count() - shared);
        }
    if (rep.mu > 0)
        rep.bound = std::exp(-gamma * gamma * rep.mu * rep.mu / (2.0 * (rep.mu + rep.delta)));
    return rep;
}

// Lower-tail bound exp(-gamma^2 delta m / 3) for sums of sequentially
// dependent indicators with conditional means at least delta.
inline double seqdep_bound(double delta, double gamma, long long m) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("seqdep_bound: gamma outside (0,1)");
    if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("seqdep_bound: delta outside [0,1]");
    if (m < 1) throw std::invalid_argument("seqdep_bound: m must be >= 1");
    return std::exp(-gamma * gamma * delta * static_cast<double>(m) / 3.0);
}

// ---------------------------------------------------------------------------
// Exhaustive containment oracle.
//
// Deliberately separate from every pipeline code path: cycle powers are found
// by enumerating cyclic orders, factor-like targets by covering host vertices
// block by block.

namespace oracle_detail {

inline bool ham_power_search(const Graph& g, int k) {
    int n = g.n();
    std::vector<int> pos_of(static_cast<std::size_t>(n), -1);  // position -> vertex
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    auto cyc_dist = [n](int a, int b) {
        int d = std::abs(a - b);
        return std::min(d, n - d);
    };
    pos_of[0] = 0;
    used[0] = 1;
    auto rec = [&](auto&& self, int pos) -> bool {
        if (pos == n) return true;
        for (int v = 1; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            bool ok = true;
            for (int q = 0; q < pos && ok; ++q)
                if (cyc_dist(pos, q) <= k && !g.has_edge(v, pos_of[static_cast<std::size_t>(q)]))
                    ok = false;
            if (!ok) continue;
            pos_of[static_cast<std::size_t>(pos)] = v;
            used[static_cast<std::size_t>(v)] = 1;
            if (self(self, pos + 1)) return true;
            used[static_cast<std::size_t>(v)] = 0;
        }
        return false;
    };
    return rec(rec, 1);
}

inline std::vector<std::vector<int>> components_of(const Graph& g) {
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(static_cast<std::size_t>(g.n()), 0);
    for (int v = 0; v < g.n(); ++v) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        std::vector<int> comp, stack{v};
        seen[static_cast<std::size_t>(v)] = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            comp.push_back(x);
            for (int u : g.neighbors(x))
                if (!seen[static_cast<std::size_t>(u)]) {
                    seen[static_cast<std::size_t>(u)] = 1;
                    stack.push_back(u);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

// Embeds one target component with the image of comp[anchor_idx] pinned to
// `anchor`, invoking `cont` at every full placement; enumeration continues
// through failed continuations so the outer cover can backtrack into
// alternative component embeddings.
template <typename Cont>
inline bool embed_component_pinned(const Graph& f, const std::vector<int>& comp, const Graph& g,
                                   std::vector<char>& host_used, int anchor_idx, int anchor,
                                   Cont&& cont) {
    // Reorder so the pinned vertex comes first; keeps the search host-driven.
    std::vector<int> order = comp;
    std::swap(order[0], order[static_cast<std::size_t>(anchor_idx)]);
    std::vector<int> try_map(order.size(), -1);
    try_map[0] = anchor;
    host_used[static_cast<std::size_t>(anchor)] = 1;
    auto rec = [&](auto&& self, std::size_t depth) -> bool {
        if (depth == order.size()) return cont();
        int tv = order[depth];
        for (int hv = 0; hv < g.n(); ++hv) {
            if (host_used[static_cast<std::size_t>(hv)]) continue;
            bool ok = true;
            for (std::size_t q = 0; q < depth && ok; ++q)
                if (f.has_edge(tv, order[q]) && !g.has_edge(hv, try_map[q])) ok = false;
            if (!ok) continue;
            try_map[depth] = hv;
            host_used[static_cast<std::size_t>(hv)] = 1;
            if (self(self, depth + 1)) return true;
            host_used[static_cast<std::size_t>(hv)] = 0;
        }
        return false;
    };
    bool found = rec(rec, 1);
    if (!found) host_used[static_cast<std::size_t>(anchor)] = 0;
    return found;
}

inline bool cover_search(const Graph& f, const Graph& g) {
    auto comps = components_of(f);
    // Group identical components so only one representative per class is tried
    // at each uncovered host vertex.
    std::vector<std::vector<std::uint8_t>> forms;
    std::vector<int> class_of;
    std::vector<int> remaining;  // per class
    for (auto& c : comps) {
        auto form = canonical_form(induced_subgraph(f, c));
        int cls = -1;
        for (std::size_t i = 0; i < forms.size(); ++i)
            if (forms[i] == form) { cls = static_cast<int>(i); break; }
        if (cls < 0) {
            cls = static_cast<int>(forms.size());
            forms.push_back(std::move(form));
            remaining.push_back(0);
        }
        class_of.push_back(cls);
        ++remaining[static_cast<std::size_t>(cls)];
    }

    std::vector<char> host_used(static_cast<std::size_t>(g.n()), 0);
    auto rec = [&](auto&& self) -> bool {
        int u = -1;
        for (int v = 0; v < g.n(); ++v)
            if (!host_used[static_cast<std::size_t>(v)]) { u = v; break; }
        if (u < 0) return true;
        for (std::size_t cls = 0; cls < remaining.size(); ++cls) {
            if (remaining[cls] == 0) continue;
            // Representative component of this class.
            std::size_t rep = 0;
            while (class_of[rep] != static_cast<int>(cls)) ++rep;
            const auto& comp = comps[rep];
            --remaining[cls];
            for (std::size_t ai = 0; ai < comp.size(); ++ai) {
                if (embed_component_pinned(f, comp, g, host_used, static_cast<int>(ai), u,
                                           [&] { return self(self); })) {
                    return true;
                }
            }
            ++remaining[cls];
        }
        return false;
    };
    return rec(rec);
}

}  // namespace oracle_detail

// True iff some injective map embeds the realized target into g. Exhaustive;
// permutation-complete up to n=10 for cycle powers and n=14 otherwise.
inline bool oracle_contains(const Graph& g, const TargetSpec& spec) {
    Graph f = realize(spec);
    if (f.n() != g.n()) throw std::invalid_argument("oracle_contains: size mismatch");
    if (spec.kind == TargetKind::ham_power) {
        if (g.n() > 10) throw std::invalid_argument("oracle_contains: n > 10 for cycle powers");
        if (f.edge_count() > g.edge_count()) return false;
        return oracle_detail::ham_power_search(g, spec.k);
    }
    if (g.n() > 14) throw std::invalid_argument("oracle_contains: n > 14");
    if (f.edge_count() > g.edge_count()) return false;
    return oracle_detail::cover_search(f, g);
}

// ---------------------------------------------------------------------------
// Wilson 95% interval.

inline std::pair<double, double> wilson_ci(int successes, int trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double nn = trials;
    double phat = static_cast<double>(successes) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (phat + z2 / (2 * nn)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepGrid {
    std::vector<int> ns;
    std::vector<double> alphas;
    std::vector<double> ps;
    std::string target;
    std::string host;  // complete | complete-bipartite | random-min-degree | clique-union | empty
    int trials = 100;
};

struct SweepRow {
    int n = 0;
    double alpha = 0.0;
    double p = 0.0;
    std::string target;
    std::string host;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    double ci_lo = 0.0, ci_hi = 1.0;
    int fail_round1 = 0, fail_hall = 0, fail_other = 0;
    std::uint64_t seed = 0;
    std::string note;  // reason tag for infeasible cells
};

namespace detail {

inline HostKind parse_host_kind(const std::string& s) {
    if (s == "complete") return HostKind::complete;
    if (s == "complete-bipartite") return HostKind::complete_bipartite_unbalanced;
    if (s == "random-min-degree") return HostKind::random_min_degree;
    if (s == "clique-union") return HostKind::clique_union;
    throw std::invalid_argument("unknown host kind: " + s);
}

inline Graph build_host_graph(const std::string& host, int n, double alpha, std::uint64_t seed) {
    if (host == "empty") return Graph(n);
    HostSpec spec{parse_host_kind(host), n, alpha};
    return make_host(spec, seed);
}

enum class TrialOutcome { success, fail_round1, fail_hall, fail_other };

inline TrialOutcome classify(const PipelineResult& r) {
    if (r.success) return TrialOutcome::success;
    if (r.stage == "round1" || r.stage == "family") return TrialOutcome::fail_round1;
    if (r.stage == "hall") return TrialOutcome::fail_hall;
    return TrialOutcome::fail_other;
}

// Runs all trials of one cell; seeds depend only on (cell_seed, trial index),
// and outcomes land in a preallocated slot, so the row is identical for every
// worker count.
inline SweepRow run_cell(const std::string& target, const std::string& host, int n, double alpha,
                         double p, int trials, std::uint64_t master_seed, std::uint64_t cell_seed,
                         const PipelineConfig& cfg, int parallelism) {
    SweepRow row;
    row.n = n;
    row.alpha = alpha;
    row.p = p;
    row.target = target;
    row.host = host;
    row.seed = master_seed;

    TargetSpec tspec;
    try {
        tspec = parse_target(target, n);
        realize(tspec);
        build_host_graph(host, n, alpha, derive_seed(cell_seed, 0xa1fa));
    } catch (const std::exception& e) {
        row.trials = 0;
        row.note = e.what();
        return row;
    }

    row.trials = trials;
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials), TrialOutcome::fail_other);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int t = next.fetch_add(1);
            if (t >= trials) break;
            std::uint64_t trial_seed = derive_seed(cell_seed, static_cast<std::uint64_t>(t));
            Graph hg = build_host_graph(host, n, alpha, derive_seed(trial_seed, 0xa1fa));
            PipelineResult r = embed_perturbed(tspec, hg, p, cfg, trial_seed);
            outcomes[static_cast<std::size_t>(t)] = classify(r);
        }
    };
    int workers = std::max(1, parallelism);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto o : outcomes) {
        switch (o) {
            case TrialOutcome::success: ++row.successes; break;
            case TrialOutcome::fail_round1: ++row.fail_round1; break;
            case TrialOutcome::fail_hall: ++row.fail_hall; break;
            case TrialOutcome::fail_other: ++row.fail_other; break;
        }
    }
    row.rate = trials > 0 ? static_cast<double>(row.successes) / trials : 0.0;
    auto ci = wilson_ci(row.successes, row.trials);
    row.ci_lo = ci.first;
    row.ci_hi = ci.second;
    return row;
}

}  // namespace detail

// Monte Carlo sweep over the grid; rows come back sorted by grid coordinates
// and are byte-identical for a fixed master seed regardless of parallelism.
inline std::vector<SweepRow> sweep(const SweepGrid& grid, std::uint64_t master_seed,
                                   int parallelism, const PipelineConfig& cfg = {}) {
    SweepGrid g = grid;
    std::sort(g.ns.begin(), g.ns.end());
    std::sort(g.alphas.begin(), g.alphas.end());
    std::sort(g.ps.begin(), g.ps.end());
    std::vector<SweepRow> rows;
    std::uint64_t cell_index = 0;
    for (int n : g.ns)
        for (double alpha : g.alphas)
            for (double p : g.ps) {
                std::uint64_t cell_seed = derive_seed(master_seed, cell_index++);
                rows.push_back(detail::run_cell(g.target, g.host, n, alpha, p, g.trials,
                                                master_seed, cell_seed, cfg, parallelism));
            }
    return rows;
}

// Paired comparison of the perturbed and pure models with common random
// numbers: both arms run the same pipeline on the same derived seeds, the
// pure arm with an empty host.
struct ComparePair {
    SweepRow perturbed;
    SweepRow pure;
};

inline std::vector<ComparePair> compare_models(int n, double alpha, const std::vector<double>& ps,
                                               const std::string& target, const std::string& host,
                                               int trials, std::uint64_t master_seed,
                                               int parallelism, const PipelineConfig& cfg = {}) {
    std::vector<ComparePair> out;
    std::uint64_t cell_index = 0;
    std::vector<double> sorted_ps = ps;
    std::sort(sorted_ps.begin(), sorted_ps.end());
    for (double p : sorted_ps) {
        std::uint64_t cell_seed = derive_seed(master_seed, cell_index++);
        ComparePair pair;
        pair.perturbed = detail::run_cell(target, host, n, alpha, p, trials, master_seed, cell_seed,
                                          cfg, parallelism);
        pair.pure = detail::run_cell(target, "empty", n, alpha, p, trials, master_seed, cell_seed,
                                     cfg, parallelism);
        out.push_back(std::move(pair));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV and SVG emission (fixed formatting for byte-identical reruns).

namespace detail {

inline std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "n,alpha,p,target,host,trials,successes,rate,ci_lo,ci_hi,fail_round1,fail_hall,"
           "fail_other,seed\n";
    for (auto& r : rows) {
        out << r.n << ',' << detail::fmt(r.alpha) << ',' << detail::fmt(r.p) << ','
            << detail::csv_field(r.target) << ',' << detail::csv_field(r.host) << ',' << r.trials
            << ',' << r.successes << ',' << detail::fmt(r.rate, "%.6f") << ','
            << detail::fmt(r.ci_lo, "%.6f") << ',' << detail::fmt(r.ci_hi, "%.6f") << ','
            << r.fail_round1 << ',' << r.fail_hall << ',' << r.fail_other << ',' << r.seed << '\n';
    }
}

// Success-rate curves, one polyline per (n, alpha, host) over p.
inline void write_svg(std::ostream& out, const std::vector<SweepRow>& rows) {
    const int W = 640, H = 420, ML = 60, MR = 20, MT = 20, MB = 50;
    double pmin = 1e300, pmax = -1e300;
    for (auto& r : rows)
        if (r.trials > 0) { pmin = std::min(pmin, r.p); pmax = std::max(pmax, r.p); }
    if (pmax <= 0 || rows.empty()) { out << "<svg xmlns='http://www.w3.org/2000/svg'/>\n"; return; }
    if (pmin <= 0) pmin = pmax / 1000;
    double lx0 = std::log10(pmin), lx1 = std::log10(pmax);
    if (lx1 - lx0 < 1e-9) { lx0 -= 0.5; lx1 += 0.5; }
    auto X = [&](double p) {
        return ML + (std::log10(std::max(p, pmin)) - lx0) / (lx1 - lx0) * (W - ML - MR);
    };
    auto Y = [&](double rate) { return MT + (1.0 - rate) * (H - MT - MB); };

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
    out << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    out << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    out << "<text x='5' y='" << MT + 10 << "' font-size='12'>rate</text>\n";
    out << "<text x='" << W / 2 << "' y='" << H - 10 << "' font-size='12'>p (log)</text>\n";

    static const char* colors[] = {"#1b6ca8", "#c23b22", "#2e8b57", "#8a2be2", "#d2691e", "#444444"};
    std::vector<std::string> keys;
    for (auto& r : rows) {
        std::string key = std::to_string(r.n) + "|" + detail::fmt(r.alpha) + "|" + r.host;
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (std::size_t ki = 0; ki < keys.size(); ++ki) {
        std::ostringstream pts;
        for (auto& r : rows) {
            std::string key = std::to_string(r.n) + "|" + detail::fmt(r.alpha) + "|" + r.host;
            if (key != keys[ki] || r.trials == 0) continue;
            pts << detail::fmt(X(r.p), "%.1f") << ',' << detail::fmt(Y(r.rate), "%.1f") << ' ';
        }
        const char* color = colors[ki % 6];
        out << "<polyline fill='none' stroke='" << color << "' points='" << pts.str() << "'/>\n";
        out << "<text x='" << W - MR - 200 << "' y='" << MT + 15 + 14 * ki << "' font-size='11' fill='"
            << color << "'>n|alpha|host = " << keys[ki] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace perturb
