// Target structures and their density parameters.
//
// Realizes powers of Hamilton cycles, H-factors, path-power factors, bounded
// degree trees and explicit graphs; computes the 1-density m1 and the
// gamma density that drive threshold statements; builds the connector gadget
// and the path-factor arithmetic used to cut a cycle power into pieces.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/graph.hpp"

namespace perturb {

// ---------------------------------------------------------------------------
// Exact rationals for density values.

struct Ratio {
    long long num = 0;
    long long den = 1;

    Ratio() = default;
    Ratio(long long n, long long d) : num(n), den(d) {
        if (d <= 0) throw std::invalid_argument("Ratio: nonpositive denominator");
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator<(const Ratio& o) const { return num * o.den < o.num * den; }
    bool operator>(const Ratio& o) const { return o < *this; }
    bool operator==(const Ratio& o) const { return num == o.num && den == o.den; }
    bool operator<=(const Ratio& o) const { return !(o < *this); }
};

// ---------------------------------------------------------------------------
// Density oracle.

struct DensityReport {
    Ratio m1;                          // max e(S)/(v(S)-1) over subgraphs with v > 1
    std::optional<Ratio> gamma;        // max e(S)/(v(S)-2) over subgraphs with v >= 3
    std::vector<int> m1_witness;
    std::vector<int> gamma_witness;
    bool strictly_balanced = false;    // whole graph is the only m1 maximiser
    bool bounded = false;              // true when enumeration was restricted
};

namespace detail {

// Edge count of every induced subgraph via subset DP. Feasible up to ~24 vertices.
inline std::vector<std::uint16_t> subset_edge_counts(const Graph& g) {
    int n = g.n();
    std::vector<std::uint32_t> nbr_mask(static_cast<std::size_t>(n), 0);
    for (auto& [u, v] : g.edges()) {
        nbr_mask[static_cast<std::size_t>(u)] |= std::uint32_t(1) << v;
        nbr_mask[static_cast<std::size_t>(v)] |= std::uint32_t(1) << u;
    }
    std::vector<std::uint16_t> e(std::size_t(1) << n, 0);
    for (std::uint32_t s = 1; s < (std::uint32_t(1) << n); ++s) {
        int low = __builtin_ctz(s);
        std::uint32_t rest = s & (s - 1);
        e[s] = static_cast<std::uint16_t>(
            e[rest] + __builtin_popcount(nbr_mask[static_cast<std::size_t>(low)] & rest));
    }
    return e;
}

// Enumerates connected induced vertex subsets of size in [1, max_size], each
// exactly once (ESU order: every subset is reported with its minimum vertex as
// root). Stops early once `visit_cap` subsets were reported.
template <typename F>
inline void enumerate_connected_subsets(const Graph& g, int max_size, long long visit_cap, F&& cb) {
    int n = g.n();
    std::vector<char> in_set(static_cast<std::size_t>(n), 0);
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    std::vector<int> subset;
    long long visited = 0;

    struct Frame { std::vector<int> ext; };

    auto rec = [&](auto&& self, int root, std::vector<int> ext) -> bool {
        ++visited;
        if (!cb(subset)) return false;
        if (visited >= visit_cap) return false;
        if (static_cast<int>(subset.size()) == max_size) return true;
        while (!ext.empty()) {
            int w = ext.back();
            ext.pop_back();
            std::vector<int> next_ext = ext;
            std::vector<int> newly;
            for (int u : g.neighbors(w)) {
                if (u > root && !in_set[static_cast<std::size_t>(u)] && !blocked[static_cast<std::size_t>(u)]) {
                    blocked[static_cast<std::size_t>(u)] = 1;
                    newly.push_back(u);
                    next_ext.push_back(u);
                }
            }
            subset.push_back(w);
            in_set[static_cast<std::size_t>(w)] = 1;
            bool cont = self(self, root, std::move(next_ext));
            in_set[static_cast<std::size_t>(w)] = 0;
            subset.pop_back();
            for (int u : newly) blocked[static_cast<std::size_t>(u)] = 0;
            if (!cont) return false;
        }
        return true;
    };

    for (int r = 0; r < n; ++r) {
        std::vector<int> ext;
        for (int u : g.neighbors(r))
            if (u > r) { ext.push_back(u); blocked[static_cast<std::size_t>(u)] = 1; }
        std::vector<int> marked = ext;
        subset.push_back(r);
        in_set[static_cast<std::size_t>(r)] = 1;
        bool cont = rec(rec, r, std::move(ext));
        in_set[static_cast<std::size_t>(r)] = 0;
        subset.pop_back();
        for (int u : marked) blocked[static_cast<std::size_t>(u)] = 0;
        if (!cont) return;
    }
}

inline int induced_edge_count(const Graph& g, const std::vector<int>& vs) {
    int e = 0;
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
            if (g.has_edge(vs[i], vs[j])) ++e;
    return e;
}

inline int max_degree_internal(const Graph& g) {
    int d = 0;
    for (int v = 0; v < g.n(); ++v) d = std::max(d, g.degree(v));
    return d;
}

}  // namespace detail

// Exact maxima over all subgraphs when v(h) <= max_enum (the maxima are
// attained by induced subgraphs, so vertex-subset enumeration suffices);
// beyond that, connected subgraphs up to size max_enum with the bounded flag.
inline DensityReport density_report(const Graph& h, int max_enum = 22) {
    if (max_enum > 24) max_enum = 24;
    DensityReport rep;
    int n = h.n();
    if (n < 2) throw std::invalid_argument("density_report: need at least 2 vertices");

    auto consider = [&](const std::vector<int>& vs, int e) {
        int v = static_cast<int>(vs.size());
        if (v >= 2) {
            Ratio r(e, v - 1);
            if (rep.m1_witness.empty() || r > rep.m1) {
                rep.m1 = r;
                rep.m1_witness = vs;
            }
        }
        if (v >= 3) {
            Ratio r(e, v - 2);
            if (!rep.gamma || r > *rep.gamma) {
                rep.gamma = r;
                rep.gamma_witness = vs;
            }
        }
    };

    if (n <= max_enum) {
        auto ec = detail::subset_edge_counts(h);
        int m1_max_count = 0;
        bool whole_is_max = false;
        for (std::uint32_t s = 0; s < (std::uint32_t(1) << n); ++s) {
            int v = __builtin_popcount(s);
            if (v < 2) continue;
            std::vector<int> vs;
            for (int i = 0; i < n; ++i)
                if (s >> i & 1) vs.push_back(i);
            consider(vs, ec[s]);
        }
        // Strict balance: the whole vertex set must be the unique maximiser.
        for (std::uint32_t s = 0; s < (std::uint32_t(1) << n); ++s) {
            int v = __builtin_popcount(s);
            if (v < 2) continue;
            if (Ratio(ec[s], v - 1) == rep.m1) {
                ++m1_max_count;
                if (v == n) whole_is_max = true;
            }
        }
        rep.strictly_balanced = whole_is_max && m1_max_count == 1;
    } else {
        rep.bounded = true;
        detail::enumerate_connected_subsets(h, max_enum, 2'000'000, [&](const std::vector<int>& vs) {
            if (vs.size() >= 2) consider(vs, detail::induced_edge_count(h, vs));
            return true;
        });
        if (rep.m1_witness.empty()) {
            // Edgeless graph: every pair gives 0/1.
            rep.m1 = Ratio(0, 1);
            rep.m1_witness = {0, 1};
        }
    }
    std::sort(rep.m1_witness.begin(), rep.m1_witness.end());
    std::sort(rep.gamma_witness.begin(), rep.gamma_witness.end());
    return rep;
}

namespace detail {

// Search for vertex sets X with 2 e(h[X]) > (delta+1)(|X|-2), i.e. witnesses
// of gamma(h) > (delta+1)/2. Any such X with max degree <= delta has fewer
// than 2*delta+2 vertices and can be taken connected, so a bounded connected
// search decides the predicate exactly at any n. Degree-capacity pruning
// (2 e_final <= 2 e_cur + slack(S) + delta * #remaining) keeps the search
// fast on sparse instances.
//
// When `collect_smallest` is set, all witnesses of the smallest witness size
// are gathered and the lexicographically least is returned; otherwise the
// first hit wins.
inline std::vector<int> find_dense_subset(const Graph& g, const std::vector<char>& allowed,
                                          int delta, bool collect_smallest) {
    int n = g.n();
    std::vector<int> dcap(static_cast<std::size_t>(n), 0);
    int live = 0;
    for (int v = 0; v < n; ++v) {
        if (!allowed[static_cast<std::size_t>(v)]) continue;
        ++live;
        int d = 0;
        for (int u : g.neighbors(v))
            if (allowed[static_cast<std::size_t>(u)]) ++d;
        dcap[static_cast<std::size_t>(v)] = std::min(d, delta);
    }

    int cap = std::min(2 * delta + 1, live);
    std::vector<char> in_set(static_cast<std::size_t>(n), 0);
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    std::vector<char> excluded(static_cast<std::size_t>(n), 0);  // popped siblings: gone for this branch

    for (int size = 3; size <= cap; ++size) {
        // Smallest edge count with 2e > (delta+1)(size-2); skip sizes no
        // delta-bounded graph can reach.
        long long need = static_cast<long long>(delta + 1) * (size - 2) / 2 + 1;
        if (2 * need > static_cast<long long>(size) * delta) continue;

        std::vector<std::vector<int>> hits;
        std::vector<int> subset;
        long long cur_e = 0;      // edges inside the subset
        long long cur_slack = 0;  // sum over the subset of dcap - internal degree
        long long lost = 0;       // subset slots pointing at vertices that can never join
        int root = -1;

        // Remaining edges fit into the live subset slots plus what the
        // size - |S| future vertices can carry.
        auto feasible = [&](int placed) {
            return 2 * cur_e + (cur_slack - lost) +
                       static_cast<long long>(delta) * (size - placed) >= 2 * need;
        };

        auto add_vertex = [&](int w) {
            long long into = 0, dead = 0;
            for (int u : g.neighbors(w)) {
                if (!allowed[static_cast<std::size_t>(u)]) continue;
                if (in_set[static_cast<std::size_t>(u)]) ++into;
                else if (u < root || excluded[static_cast<std::size_t>(u)]) ++dead;
            }
            cur_e += into;
            cur_slack += dcap[static_cast<std::size_t>(w)] - 2 * into;
            lost += dead;
            subset.push_back(w);
            in_set[static_cast<std::size_t>(w)] = 1;
            return std::make_pair(into, dead);
        };
        auto remove_vertex = [&](int w, std::pair<long long, long long> delta_pair) {
            in_set[static_cast<std::size_t>(w)] = 0;
            subset.pop_back();
            lost -= delta_pair.second;
            cur_slack -= dcap[static_cast<std::size_t>(w)] - 2 * delta_pair.first;
            cur_e -= delta_pair.first;
        };

        auto rec = [&](auto&& self, std::vector<int> ext) -> bool {
            if (static_cast<int>(subset.size()) == size) {
                if (2 * cur_e > static_cast<long long>(delta + 1) * (size - 2)) {
                    std::vector<int> sorted = subset;
                    std::sort(sorted.begin(), sorted.end());
                    hits.push_back(std::move(sorted));
                    if (!collect_smallest) return false;
                }
                return true;
            }
            std::vector<int> popped;
            long long lost_here = 0;
            bool cont = true;
            while (!ext.empty()) {
                int w = ext.back();
                ext.pop_back();
                std::vector<int> next_ext = ext;
                std::vector<int> newly;
                for (int u : g.neighbors(w)) {
                    if (u > root && allowed[static_cast<std::size_t>(u)] &&
                        !in_set[static_cast<std::size_t>(u)] && !blocked[static_cast<std::size_t>(u)]) {
                        blocked[static_cast<std::size_t>(u)] = 1;
                        newly.push_back(u);
                        next_ext.push_back(u);
                    }
                }
                auto dp = add_vertex(w);
                if (feasible(static_cast<int>(subset.size()))) cont = self(self, std::move(next_ext));
                remove_vertex(w, dp);
                for (int u : newly) blocked[static_cast<std::size_t>(u)] = 0;
                if (!cont) break;
                // w is now unavailable for the rest of this branch; its edges
                // into the subset become dead slots.
                excluded[static_cast<std::size_t>(w)] = 1;
                popped.push_back(w);
                lost += dp.first;
                lost_here += dp.first;
                if (!feasible(static_cast<int>(subset.size()))) break;
            }
            for (int u : popped) excluded[static_cast<std::size_t>(u)] = 0;
            lost -= lost_here;
            return cont;
        };

        for (int r = 0; r < n && hits.empty(); ++r) {
            if (!allowed[static_cast<std::size_t>(r)]) continue;
            root = r;
            std::vector<int> ext;
            for (int u : g.neighbors(r))
                if (u > r && allowed[static_cast<std::size_t>(u)]) {
                    ext.push_back(u);
                    blocked[static_cast<std::size_t>(u)] = 1;
                }
            std::vector<int> marked = ext;
            auto dp = add_vertex(r);
            bool cont = true;
            if (feasible(1)) cont = rec(rec, std::move(ext));
            remove_vertex(r, dp);
            for (int u : marked) blocked[static_cast<std::size_t>(u)] = 0;
            if (!cont) break;
        }
        if (!hits.empty()) {
            std::sort(hits.begin(), hits.end());
            return hits.front();
        }
    }
    return {};
}

// gamma(h) > (delta+1)/2. Exact subset enumeration for small graphs (no
// degree assumption); the bounded connected search beyond, which requires
// max degree <= delta for its size cap to be exact.
inline bool exceeds_gamma_threshold(const Graph& h, int delta) {
    if (h.n() <= 22) {
        auto ec = subset_edge_counts(h);
        for (std::uint32_t s = 0; s < (std::uint32_t(1) << h.n()); ++s) {
            int v = __builtin_popcount(s);
            if (v < 3) continue;
            if (2LL * ec[s] > static_cast<long long>(delta + 1) * (v - 2)) return true;
        }
        return false;
    }
    if (max_degree_internal(h) > delta)
        throw std::invalid_argument("gamma threshold check: graph exceeds the degree bound");
    std::vector<char> allowed(static_cast<std::size_t>(h.n()), 1);
    return !find_dense_subset(h, allowed, delta, false).empty();
}

}  // namespace detail

inline bool is_dense(const Graph& h, int delta) {
    if (h.n() < 3) throw std::invalid_argument("is_dense: need at least 3 vertices");
    return detail::exceeds_gamma_threshold(h, delta);
}

// Dense, and every proper subgraph on 3 <= v < v(h) vertices is sparse.
inline bool is_minimally_dense(const Graph& h, int delta) {
    if (!is_dense(h, delta)) return false;
    int n = h.n();
    if (n > 24) return false;  // dense graphs under a degree bound are small
    auto ec = detail::subset_edge_counts(h);
    for (std::uint32_t s = 0; s < (std::uint32_t(1) << n); ++s) {
        int v = __builtin_popcount(s);
        if (v < 3 || v >= n) continue;
        if (2LL * ec[s] > static_cast<long long>(delta + 1) * (v - 2)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// 2-independent sets.

// Greedy maximal subset of `eligible` (ascending order) that is independent in
// f with no two members sharing an f-neighbour, i.e. pairwise distance >= 3.
inline std::vector<int> two_independent_set(const Graph& f, const std::vector<int>& eligible) {
    std::vector<char> near(static_cast<std::size_t>(f.n()), 0);  // within distance 2 of the set
    std::vector<int> order = eligible;
    std::sort(order.begin(), order.end());
    std::vector<int> w;
    for (int v : order) {
        // near[] marks the radius-2 balls around the set, so v is admissible
        // exactly when it sits at distance >= 3 from every member.
        if (near[static_cast<std::size_t>(v)]) continue;
        w.push_back(v);
        near[static_cast<std::size_t>(v)] = 1;
        for (int u : f.neighbors(v)) {
            near[static_cast<std::size_t>(u)] = 1;
            for (int x : f.neighbors(u)) near[static_cast<std::size_t>(x)] = 1;
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Powers of paths and the connector gadget.

// kth power of a path on m vertices 0..m-1.
inline Graph power_path(int k, int m) {
    if (k < 1 || m < 1) throw std::invalid_argument("power_path: bad parameters");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
        for (int d = 1; d <= k && i + d < m; ++d) edges.emplace_back(i, i + d);
    return Graph(m, std::move(edges));
}

// kth power of a cycle on n vertices (complete when n <= 2k+1).
inline Graph power_cycle(int k, int n) {
    if (k < 1 || n < 3) throw std::invalid_argument("power_cycle: bad parameters");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int d = 1; d <= k; ++d) {
            int j = (i + d) % n;
            int a = std::min(i, j), b = std::max(i, j);
            auto e = std::make_pair(a, b);
            if (std::find(edges.begin(), edges.end(), e) == edges.end() && a != b)
                edges.push_back(e);
        }
    return Graph(n, std::move(edges));
}

// Connector between two path-power ends: the kth power of the path
// u_1..u_k w_1..w_l v_1..v_k minus the edges inside {u_i}, inside {v_i},
// u_k w_1, w_l v_1 and every w_i w_{i+1} except w_j w_{j+1}, j = floor(l/2).
// The removed edges are the ones a host graph is expected to provide.
struct ConnectorGadget {
    Graph graph;                 // on 2k + l vertices in the order above
    std::vector<int> u_tuple;    // indices 0..k-1
    std::vector<int> w_run;      // indices k..k+l-1
    std::vector<int> v_tuple;    // indices k+l..2k+l-1
    int k = 0, ell = 0, j = 0;
};

inline ConnectorGadget connector_gadget(int k, int ell) {
    if (k < 2) throw std::invalid_argument("connector_gadget: k must be at least 2");
    if (ell < 2 * k + 2) throw std::invalid_argument("connector_gadget: need l >= 2k+2");
    int total = 2 * k + ell;
    int j = ell / 2;
    auto is_u = [&](int x) { return x < k; };
    auto is_v = [&](int x) { return x >= k + ell; };
    auto is_w = [&](int x) { return x >= k && x < k + ell; };
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < total; ++a)
        for (int b = a + 1; b <= a + k && b < total; ++b) {
            if (is_u(a) && is_u(b)) continue;
            if (is_v(a) && is_v(b)) continue;
            if (a == k - 1 && b == k) continue;              // u_k w_1
            if (a == k + ell - 1 && b == k + ell) continue;  // w_l v_1
            if (is_w(a) && is_w(b) && b == a + 1 && (a - k + 1) != j) continue;
            edges.emplace_back(a, b);
        }
    ConnectorGadget g;
    g.graph = Graph(total, std::move(edges));
    for (int i = 0; i < k; ++i) g.u_tuple.push_back(i);
    for (int i = 0; i < ell; ++i) g.w_run.push_back(k + i);
    for (int i = 0; i < k; ++i) g.v_tuple.push_back(k + ell + i);
    g.k = k;
    g.ell = ell;
    g.j = j;
    return g;
}

// ---------------------------------------------------------------------------
// Path-factor arithmetic: n = s(m+l)+t with 0 <= t < m+l, F* made of t copies
// of P^k_{m+1} and s-t copies of P^k_m, leaving s*l vertices uncovered.

struct PathFactorPlan {
    int k = 0, m = 0, ell = 0;
    int s = 0, t = 0;
    int j = 0;                   // kept-edge index floor(l/2)
    int covered = 0;             // s*m + t
    bool paper_regime = false;   // l^2 <= eps_op * m, rarely satisfiable at desk scale
};

inline PathFactorPlan path_factor_plan(int n, int k, int m, int ell, double eps_op) {
    if (m + ell > n) throw std::invalid_argument("path_factor_plan: m + l exceeds n");
    if (m < 2 * k) throw std::invalid_argument("path_factor_plan: m < 2k");
    PathFactorPlan plan;
    plan.k = k;
    plan.m = m;
    plan.ell = ell;
    plan.s = n / (m + ell);
    plan.t = n % (m + ell);
    plan.j = ell / 2;
    if (plan.t > plan.s) {
        std::ostringstream os;
        os << "path_factor_plan: infeasible at n=" << n << " (s=" << plan.s << ", t=" << plan.t
           << " needs t <= s)";
        throw std::invalid_argument(os.str());
    }
    plan.covered = plan.s * m + plan.t;
    int uncovered = plan.s * ell;
    if (static_cast<double>(uncovered) > eps_op * n + 1e-9) {
        std::ostringstream os;
        os << "path_factor_plan: uncovered " << uncovered << " exceeds eps_op*n = " << eps_op * n;
        throw std::invalid_argument(os.str());
    }
    plan.paper_regime = static_cast<double>(ell) * ell <= eps_op * m + 1e-9;
    return plan;
}

// The F* of a plan: t blocks of m+1 vertices then s-t blocks of m vertices,
// each a kth power of a path, vertices numbered block by block.
inline Graph realize_plan_fstar(const PathFactorPlan& plan) {
    std::vector<std::pair<int, int>> edges;
    int base = 0;
    for (int b = 0; b < plan.s; ++b) {
        int len = b < plan.t ? plan.m + 1 : plan.m;
        for (int i = 0; i < len; ++i)
            for (int d = 1; d <= plan.k && i + d < len; ++d)
                edges.emplace_back(base + i, base + i + d);
        base += len;
    }
    return Graph(plan.covered, std::move(edges));
}

// ---------------------------------------------------------------------------
// Target specifications.

enum class TargetKind { ham_power, h_factor, path_power_factor, spanning_tree, explicit_graph };

struct TargetSpec {
    TargetKind kind = TargetKind::ham_power;
    int n = 0;
    int k = 2;            // power for ham_power / path_power_factor
    int m = 0;            // path block length (0 = from config)
    int ell = 0;          // connector length (0 = from config)
    int delta = 3;        // spanning_tree degree bound
    std::string shape = "random";
    Graph h;              // h_factor block
    Graph g;              // explicit target
    std::string tag;      // original CLI string, for reports
};

namespace detail {

inline Graph named_small_graph(const std::string& name) {
    if (name.size() < 2) throw std::invalid_argument("bad graph name: " + name);
    char c = name[0];
    int r = std::stoi(name.substr(1));
    if (c == 'K') {
        if (r < 2) throw std::invalid_argument("K_r needs r >= 2");
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < r; ++u)
            for (int v = u + 1; v < r; ++v) edges.emplace_back(u, v);
        return Graph(r, std::move(edges));
    }
    if (c == 'C') {
        if (r < 3) throw std::invalid_argument("C_m needs m >= 3");
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < r; ++i) edges.emplace_back(std::min(i, (i + 1) % r), std::max(i, (i + 1) % r));
        std::sort(edges.begin(), edges.end());
        return Graph(r, std::move(edges));
    }
    if (c == 'P') {
        if (r < 2) throw std::invalid_argument("P_m needs m >= 2");
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < r; ++i) edges.emplace_back(i, i + 1);
        return Graph(r, std::move(edges));
    }
    throw std::invalid_argument("unknown graph name: " + name);
}

inline std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& s) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + item + "'");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

}  // namespace detail

// Parses "ham-power:k=2", "factor:K5", "path-factor:k=2,m=20,l=6",
// "tree:delta=3,shape=random", "file:<edge-list path>".
inline TargetSpec parse_target(const std::string& s, int n) {
    TargetSpec spec;
    spec.n = n;
    spec.tag = s;
    auto colon = s.find(':');
    std::string head = colon == std::string::npos ? s : s.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "ham-power") {
        spec.kind = TargetKind::ham_power;
        for (auto& [k, v] : detail::parse_kv(rest)) {
            if (k == "k") spec.k = std::stoi(v);
            else if (k == "m") spec.m = std::stoi(v);
            else if (k == "l") spec.ell = std::stoi(v);
            else throw std::invalid_argument("ham-power: unknown key " + k);
        }
        if (spec.k < 1) throw std::invalid_argument("ham-power: k must be >= 1");
    } else if (head == "factor") {
        spec.kind = TargetKind::h_factor;
        if (rest.rfind("file=", 0) == 0) spec.h = read_edge_list_file(rest.substr(5));
        else spec.h = detail::named_small_graph(rest);
    } else if (head == "path-factor") {
        spec.kind = TargetKind::path_power_factor;
        for (auto& [k, v] : detail::parse_kv(rest)) {
            if (k == "k") spec.k = std::stoi(v);
            else if (k == "m") spec.m = std::stoi(v);
            else if (k == "l") spec.ell = std::stoi(v);
            else throw std::invalid_argument("path-factor: unknown key " + k);
        }
    } else if (head == "tree") {
        spec.kind = TargetKind::spanning_tree;
        for (auto& [k, v] : detail::parse_kv(rest)) {
            if (k == "delta") spec.delta = std::stoi(v);
            else if (k == "shape") spec.shape = v;
            else throw std::invalid_argument("tree: unknown key " + k);
        }
    } else if (head == "file") {
        spec.kind = TargetKind::explicit_graph;
        spec.g = read_edge_list_file(rest);
        spec.n = spec.g.n();
    } else {
        throw std::invalid_argument("unknown target spec: " + s);
    }
    return spec;
}

inline TargetSpec explicit_target(Graph g, std::string tag = "explicit") {
    TargetSpec spec;
    spec.kind = TargetKind::explicit_graph;
    spec.n = g.n();
    spec.g = std::move(g);
    spec.tag = std::move(tag);
    return spec;
}

namespace detail {

inline Graph spanning_tree_graph(int n, int delta, const std::string& shape) {
    if (n < 1) throw std::invalid_argument("tree: n must be positive");
    if (delta < 2 && n > 2) throw std::invalid_argument("tree: delta must be >= 2");
    std::vector<std::pair<int, int>> edges;
    if (shape == "path") {
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    } else if (shape == "binary") {
        if (delta < 3 && n > 2) throw std::invalid_argument("tree: binary shape needs delta >= 3");
        for (int i = 1; i < n; ++i) edges.emplace_back((i - 1) / 2, i);
    } else if (shape == "random") {
        // Deterministic given (n, delta): attach each vertex to a random
        // earlier vertex whose degree still has room.
        Rng rng(derive_seed(0x7265657321ULL, static_cast<std::uint64_t>(n) * 31 + delta));
        std::vector<int> deg(static_cast<std::size_t>(n), 0);
        for (int i = 1; i < n; ++i) {
            int parent = -1;
            for (int tries = 0; tries < 1000; ++tries) {
                int c = rng.uniform_int(0, i - 1);
                if (deg[static_cast<std::size_t>(c)] < delta) { parent = c; break; }
            }
            if (parent < 0) {
                for (int c = 0; c < i; ++c)
                    if (deg[static_cast<std::size_t>(c)] < delta) { parent = c; break; }
            }
            if (parent < 0) throw std::invalid_argument("tree: degree bound infeasible");
            edges.emplace_back(parent, i);
            ++deg[static_cast<std::size_t>(parent)];
            ++deg[static_cast<std::size_t>(i)];
        }
    } else {
        throw std::invalid_argument("tree: unknown shape " + shape);
    }
    return Graph(n, std::move(edges));
}

}  // namespace detail

// The target graph in canonical vertex order: cycle order for powers, factor
// blocks contiguous.
inline Graph realize(const TargetSpec& spec) {
    switch (spec.kind) {
        case TargetKind::ham_power:
            if (spec.n < 3) throw std::invalid_argument("ham-power: n must be >= 3");
            return power_cycle(spec.k, spec.n);
        case TargetKind::h_factor: {
            int b = spec.h.n();
            if (b < 1 || spec.n % b != 0)
                throw std::invalid_argument("factor: block size must divide n");
            std::vector<std::pair<int, int>> edges;
            for (int blk = 0; blk < spec.n / b; ++blk)
                for (auto& [u, v] : spec.h.edges()) edges.emplace_back(blk * b + u, blk * b + v);
            return Graph(spec.n, std::move(edges));
        }
        case TargetKind::path_power_factor: {
            int m = spec.m > 0 ? spec.m : 20;
            if (m < spec.k + 1) throw std::invalid_argument("path-factor: m must exceed k");
            // n = a*m + r with r blocks lengthened by one; needs r <= a.
            int a = spec.n / m, r = spec.n % m;
            if (a < 1 || r > a)
                throw std::invalid_argument("path-factor: n not representable with blocks of " +
                                            std::to_string(m));
            std::vector<std::pair<int, int>> edges;
            int base = 0;
            for (int blk = 0; blk < a; ++blk) {
                int len = blk < r ? m + 1 : m;
                for (int i = 0; i < len; ++i)
                    for (int d = 1; d <= spec.k && i + d < len; ++d)
                        edges.emplace_back(base + i, base + i + d);
                base += len;
            }
            return Graph(spec.n, std::move(edges));
        }
        case TargetKind::spanning_tree:
            return detail::spanning_tree_graph(spec.n, spec.delta, spec.shape);
        case TargetKind::explicit_graph:
            return spec.g;
    }
    throw std::logic_error("realize: unreachable");
}

// Maximum degree of the realized target; the Delta that drives decomposition.
inline int max_degree(const Graph& g) {
    int d = 0;
    for (int v = 0; v < g.n(); ++v) d = std::max(d, g.degree(v));
    return d;
}

}  // namespace perturb
