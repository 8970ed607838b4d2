// Undirected simple graphs on vertices 0..n-1, the substrate for hosts,
// random rounds and target structures.
//
// Graphs are immutable after construction and safe to share across threads.
// Adjacency is kept twice: sorted neighbour lists for iteration and a packed
// bit matrix for O(1) edge queries, since edge tests dominate the embedders.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/rng.hpp"

namespace perturb {

class Graph {
public:
    Graph() : n_(0), words_(0) {}

    explicit Graph(int n) : n_(n), words_((n + 63) / 64) {
        if (n < 0) throw std::invalid_argument("Graph: negative vertex count");
        adj_.resize(static_cast<std::size_t>(n));
        bits_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(words_), 0);
    }

    Graph(int n, std::vector<std::pair<int, int>> edges) : Graph(n) {
        for (auto& [u, v] : edges) add_edge_checked(u, v);
        finalize();
    }

    int n() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    bool has_edge(int u, int v) const {
        if (u == v) return false;
        return (bits_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)] >>
                (v & 63)) & 1;
    }

    const std::vector<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); }

    // Edges with u < v, sorted lexicographically.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    bool operator==(const Graph& o) const { return n_ == o.n_ && edges_ == o.edges_; }

private:
    void add_edge_checked(int u, int v) {
        if (u < 0 || v < 0 || u >= n_ || v >= n_) throw std::invalid_argument("edge endpoint out of range");
        if (u == v) throw std::invalid_argument("self-loop rejected");
        if (has_edge(u, v)) throw std::invalid_argument("duplicate edge rejected");
        set_bit(u, v);
        set_bit(v, u);
        adj_[static_cast<std::size_t>(u)].push_back(v);
        adj_[static_cast<std::size_t>(v)].push_back(u);
        edges_.emplace_back(std::min(u, v), std::max(u, v));
    }

    void set_bit(int u, int v) {
        bits_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)] |=
            std::uint64_t(1) << (v & 63);
    }

    void finalize() {
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
        std::sort(edges_.begin(), edges_.end());
    }

    int n_;
    std::size_t words_;
    std::vector<std::vector<int>> adj_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::pair<int, int>> edges_;
};

inline int min_degree(const Graph& g) {
    if (g.n() < 1) throw std::invalid_argument("min_degree: empty graph");
    int d = g.n();
    for (int v = 0; v < g.n(); ++v) d = std::min(d, g.degree(v));
    return d;
}

// G(n,p): each of the C(n,2) pairs included independently with probability p.
// Uses geometric skips over the linearised pair index so sparse samples at
// n in the thousands stay fast; p = 0 and p = 1 short-circuit.
inline Graph gnp_sample(int n, double p, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("gnp_sample: n must be positive");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gnp_sample: p outside [0,1]");
    std::vector<std::pair<int, int>> edges;
    if (p > 0.0) {
        Rng rng(seed);
        std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
        if (p >= 1.0) {
            edges.reserve(total);
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
        } else {
            double logq = std::log1p(-p);
            std::uint64_t idx = 0;
            // Skip-length trick: the gap to the next present pair is geometric.
            while (true) {
                double r = rng.uniform01();
                double skip = std::floor(std::log1p(-r) / logq);
                if (skip >= static_cast<double>(total - idx)) break;
                idx += static_cast<std::uint64_t>(skip);
                // Invert the linear index into (u,v), u < v.
                std::uint64_t rem = idx;
                int u = 0;
                std::uint64_t row = static_cast<std::uint64_t>(n - 1);
                while (rem >= row) { rem -= row; ++u; --row; }
                int v = u + 1 + static_cast<int>(rem);
                edges.emplace_back(u, v);
                ++idx;
                if (idx >= total) break;
            }
        }
    }
    return Graph(n, std::move(edges));
}

enum class HostKind { complete, complete_bipartite_unbalanced, random_min_degree, clique_union };

struct HostSpec {
    HostKind kind = HostKind::complete;
    int n = 0;
    double alpha = 1.0;
};

inline const char* host_kind_name(HostKind k) {
    switch (k) {
        case HostKind::complete: return "complete";
        case HostKind::complete_bipartite_unbalanced: return "complete-bipartite";
        case HostKind::random_min_degree: return "random-min-degree";
        case HostKind::clique_union: return "clique-union";
    }
    return "?";
}

// Deterministic + random host families with minimum degree >= ceil(alpha*n).
// clique-union splits [n] into four near-equal cliques, so it is feasible
// only up to alpha just below 1/4.
inline Graph make_host(const HostSpec& spec, std::uint64_t seed) {
    int n = spec.n;
    double alpha = spec.alpha;
    if (n <= 0) throw std::invalid_argument("make_host: n must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("make_host: alpha outside (0,1]");
    int req = static_cast<int>(std::ceil(alpha * n - 1e-9));

    auto reject = [&](int got) {
        std::ostringstream os;
        os << "make_host: " << host_kind_name(spec.kind) << " with n=" << n << ", alpha=" << alpha
           << " infeasible: min degree " << got << " < " << req;
        throw std::invalid_argument(os.str());
    };

    switch (spec.kind) {
        case HostKind::complete: {
            std::vector<std::pair<int, int>> edges;
            for (int u = 0; u < n; ++u)
                for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
            return Graph(n, std::move(edges));
        }
        case HostKind::complete_bipartite_unbalanced: {
            int a = req;
            if (a < 1 || a > n - a) reject(std::min(a, n - a));
            std::vector<std::pair<int, int>> edges;
            for (int u = 0; u < a; ++u)
                for (int v = a; v < n; ++v) edges.emplace_back(u, v);
            return Graph(n, std::move(edges));
        }
        case HostKind::clique_union: {
            std::vector<std::pair<int, int>> edges;
            int parts = 4;
            int min_deg = n;
            int start = 0;
            for (int i = 0; i < parts; ++i) {
                int size = n / parts + (i < n % parts ? 1 : 0);
                for (int u = start; u < start + size; ++u)
                    for (int v = u + 1; v < start + size; ++v) edges.emplace_back(u, v);
                min_deg = std::min(min_deg, size - 1);
                start += size;
            }
            if (min_deg < req) reject(min_deg);
            return Graph(n, std::move(edges));
        }
        case HostKind::random_min_degree: {
            double q = std::min(1.0, 3.0 * alpha);
            for (int attempt = 0; attempt < 100; ++attempt) {
                Graph g = gnp_sample(n, q, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
                if (min_degree(g) >= req) return g;
            }
            throw std::runtime_error("make_host: random-min-degree did not reach the degree bound in 100 resamples");
        }
    }
    throw std::logic_error("make_host: unreachable");
}

inline Graph graph_union(const Graph& g1, const Graph& g2) {
    if (g1.n() != g2.n()) throw std::invalid_argument("graph_union: vertex counts differ");
    std::vector<std::pair<int, int>> edges = g1.edges();
    for (auto& e : g2.edges())
        if (!g1.has_edge(e.first, e.second)) edges.push_back(e);
    return Graph(g1.n(), std::move(edges));
}

// Induced subgraph on the given vertices; vs[i] becomes vertex i.
inline Graph induced_subgraph(const Graph& g, const std::vector<int>& vs) {
    std::vector<int> pos(static_cast<std::size_t>(g.n()), -1);
    for (std::size_t i = 0; i < vs.size(); ++i) pos[static_cast<std::size_t>(vs[i])] = static_cast<int>(i);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (int u : g.neighbors(vs[i])) {
            int j = pos[static_cast<std::size_t>(u)];
            if (j > static_cast<int>(i)) edges.emplace_back(static_cast<int>(i), j);
        }
    return Graph(static_cast<int>(vs.size()), std::move(edges));
}

// Relabel vertices: vertex v becomes perm[v].
inline Graph relabel(const Graph& g, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != g.n()) throw std::invalid_argument("relabel: bad permutation size");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(g.edge_count()));
    for (auto& e : g.edges())
        edges.emplace_back(perm[static_cast<std::size_t>(e.first)], perm[static_cast<std::size_t>(e.second)]);
    return Graph(g.n(), std::move(edges));
}

// Injective vertex map of a target (sub)graph into a host. Entries of -1 are
// unset; a partial map is legal as long as the defined part is injective.
struct Embedding {
    Graph target;
    Graph host;
    std::vector<int> map;

    Embedding() = default;
    Embedding(Graph t, Graph h) : target(std::move(t)), host(std::move(h)),
        map(static_cast<std::size_t>(target.n()), -1) {}
    Embedding(Graph t, Graph h, std::vector<int> m)
        : target(std::move(t)), host(std::move(h)), map(std::move(m)) {}

    int at(int v) const { return map[static_cast<std::size_t>(v)]; }
    bool is_set(int v) const { return at(v) >= 0; }
};

struct EmbeddingCheck {
    bool valid = false;
    std::string reason;  // empty when valid

    explicit operator bool() const { return valid; }
};

namespace detail {
inline EmbeddingCheck fail(std::string r) { return EmbeddingCheck{false, std::move(r)}; }
}  // namespace detail

// Validity of the defined part of the map: injectivity plus every target edge
// with both endpoints mapped landing on a host edge. First violation reported.
inline EmbeddingCheck check_partial_embedding(const Embedding& e) {
    std::vector<char> used(static_cast<std::size_t>(e.host.n()), 0);
    for (int v = 0; v < e.target.n(); ++v) {
        int img = e.at(v);
        if (img < 0) continue;
        if (img >= e.host.n()) return detail::fail("vertex " + std::to_string(v) + " mapped out of range");
        if (used[static_cast<std::size_t>(img)])
            return detail::fail("collision at host vertex " + std::to_string(img));
        used[static_cast<std::size_t>(img)] = 1;
    }
    for (auto& [a, b] : e.target.edges()) {
        if (!e.is_set(a) || !e.is_set(b)) continue;
        if (!e.host.has_edge(e.at(a), e.at(b)))
            return detail::fail("edge {" + std::to_string(a) + "," + std::to_string(b) +
                                "} maps to missing host edge {" + std::to_string(e.at(a)) + "," +
                                std::to_string(e.at(b)) + "}");
    }
    return EmbeddingCheck{true, ""};
}

// Total-map verdict: rejects partial maps, reporting the unset vertex.
inline EmbeddingCheck is_embedding(const Embedding& e) {
    for (int v = 0; v < e.target.n(); ++v)
        if (!e.is_set(v)) return detail::fail("vertex " + std::to_string(v) + " unset");
    return check_partial_embedding(e);
}

// Edge-list text format: "n <N>" then one "u v" per line, 0-indexed, u < v.
inline Graph read_edge_list(std::istream& in) {
    std::string tok;
    long long n = -1;
    if (!(in >> tok) || tok != "n" || !(in >> n) || n < 0)
        throw std::invalid_argument("edge list: expected header 'n <N>'");
    std::vector<std::pair<int, int>> edges;
    long long u, v;
    while (in >> u >> v) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("edge list: endpoint out of range");
        if (u >= v) throw std::invalid_argument("edge list: edges must satisfy u < v");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    if (!in.eof()) throw std::invalid_argument("edge list: malformed line");
    return Graph(static_cast<int>(n), std::move(edges));  // ctor rejects dups/loops
}

inline Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out << "n " << g.n() << "\n";
    for (auto& [u, v] : g.edges()) out << u << " " << v << "\n";
}

}  // namespace perturb
