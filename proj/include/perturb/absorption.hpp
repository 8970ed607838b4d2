// Reservoir sets, vertex switching, and the doubled auxiliary graph that
// phrases completion of an almost-spanning copy as an embedding problem.
//
// R(u) collects the designated 2-independent vertices w whose embedded
// neighbourhood lies inside u's host neighbourhood; exchanging u for any
// w in R(u) preserves the embedded structure, and 2-independence makes
// simultaneous switches conflict-free.

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "perturb/graph.hpp"

namespace perturb {

struct ReservoirFamily {
    Graph host;                         // the deterministic graph G_alpha
    std::vector<int> wstar;             // 2-independent set, target-side, sorted
    std::vector<int> w_image;           // host-side image of wstar, aligned
    std::vector<std::vector<int>> r;    // r[u] = sorted host vertices of R(u), subset of w_image

    const std::vector<int>& of(int u) const { return r[static_cast<std::size_t>(u)]; }
    bool contains(int u, int w) const {
        auto& s = r[static_cast<std::size_t>(u)];
        return std::binary_search(s.begin(), s.end(), w);
    }
};

namespace detail {

inline bool two_independent_in(const Graph& g, const std::vector<int>& vs) {
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j) {
            if (g.has_edge(vs[i], vs[j])) return false;
            for (int x : g.neighbors(vs[i]))
                if (g.has_edge(x, vs[j])) return false;
        }
    return true;
}

}  // namespace detail

// Reservoir sets of a partial embedding fhat and a 2-independent wstar:
// R(u) = { w in W : N_fhat(w) subset of N_host(u) } for every host vertex u.
inline ReservoirFamily build_reservoirs(const Graph& host_alpha, const Embedding& fhat,
                                        const std::vector<int>& wstar) {
    for (int v : wstar)
        if (v < 0 || v >= fhat.target.n() || !fhat.is_set(v))
            throw std::invalid_argument("build_reservoirs: wstar vertex unmapped");
    if (!detail::two_independent_in(fhat.target, wstar))
        throw std::invalid_argument("build_reservoirs: wstar is not 2-independent");

    ReservoirFamily res;
    res.host = host_alpha;
    res.wstar = wstar;
    std::sort(res.wstar.begin(), res.wstar.end());
    res.w_image.reserve(res.wstar.size());
    std::vector<std::vector<int>> fhat_nbrs;  // host-side neighbourhoods of each w
    for (int w_t : res.wstar) {
        res.w_image.push_back(fhat.at(w_t));
        std::vector<int> nbrs;
        for (int x : fhat.target.neighbors(w_t))
            if (fhat.is_set(x)) nbrs.push_back(fhat.at(x));
        fhat_nbrs.push_back(std::move(nbrs));
    }
    res.r.assign(static_cast<std::size_t>(host_alpha.n()), {});
    for (int u = 0; u < host_alpha.n(); ++u) {
        for (std::size_t i = 0; i < res.wstar.size(); ++i) {
            bool inside = true;
            for (int x : fhat_nbrs[i])
                if (!host_alpha.has_edge(u, x)) { inside = false; break; }
            if (inside) res.r[static_cast<std::size_t>(u)].push_back(res.w_image[i]);
        }
        std::sort(res.r[static_cast<std::size_t>(u)].begin(), res.r[static_cast<std::size_t>(u)].end());
    }
    return res;
}

// Exchange an unused host vertex u for a reservoir vertex w in R(u): the
// preimage of w is remapped to u, giving another valid copy that uses u.
inline Embedding switch_one(const Embedding& fhat, const Graph& host_alpha,
                            const ReservoirFamily& res, int u, int w) {
    (void)host_alpha;
    for (int v = 0; v < fhat.target.n(); ++v)
        if (fhat.at(v) == u) throw std::invalid_argument("switch_one: host vertex already used");
    if (!res.contains(u, w)) throw std::invalid_argument("switch_one: w not in R(u)");
    Embedding out = fhat;
    for (int v = 0; v < out.target.n(); ++v)
        if (out.at(v) == w) { out.map[static_cast<std::size_t>(v)] = u; return out; }
    throw std::invalid_argument("switch_one: w not in the image of fhat");
}

// Simultaneous switches: pairwise distinct u's and w's, each w_i in R(u_i).
inline Embedding multi_switch(const Embedding& fhat, const Graph& host_alpha,
                              const ReservoirFamily& res,
                              const std::vector<std::pair<int, int>>& swaps) {
    std::vector<int> us, ws;
    for (auto& [u, w] : swaps) { us.push_back(u); ws.push_back(w); }
    std::sort(us.begin(), us.end());
    std::sort(ws.begin(), ws.end());
    if (std::adjacent_find(us.begin(), us.end()) != us.end() ||
        std::adjacent_find(ws.begin(), ws.end()) != ws.end())
        throw std::invalid_argument("multi_switch: repeated u or w");

    std::vector<int> preimage(static_cast<std::size_t>(host_alpha.n()), -1);
    for (int v = 0; v < fhat.target.n(); ++v)
        if (fhat.is_set(v)) preimage[static_cast<std::size_t>(fhat.at(v))] = v;

    Embedding out = fhat;
    for (auto& [u, w] : swaps) {
        if (preimage[static_cast<std::size_t>(u)] >= 0)
            throw std::invalid_argument("multi_switch: host vertex already used");
        if (!res.contains(u, w)) throw std::invalid_argument("multi_switch: w not in R(u)");
        int v = preimage[static_cast<std::size_t>(w)];
        if (v < 0) throw std::invalid_argument("multi_switch: w not in the image of fhat");
        out.map[static_cast<std::size_t>(v)] = u;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Auxiliary instance on 2n vertices.

struct AuxiliaryInstance {
    int n = 0;                              // host vertex count; aux lives on [0, 2n)
    Graph g_aux;                            // fhat edges + tripled host edges
    std::vector<int> unembedded;            // target vertices, sorted
    std::vector<int> z_label;               // aligned: z_label[i] is the free host vertex of unembedded[i]
    std::vector<std::vector<int>> b_sets;   // aligned: B(v) in [n, 2n), sorted

    int z_of(int target_vertex) const {
        auto it = std::lower_bound(unembedded.begin(), unembedded.end(), target_vertex);
        if (it == unembedded.end() || *it != target_vertex)
            throw std::invalid_argument("z_of: vertex is embedded");
        return z_label[static_cast<std::size_t>(it - unembedded.begin())];
    }
    const std::vector<int>& b_set_of(int target_vertex) const {
        auto it = std::lower_bound(unembedded.begin(), unembedded.end(), target_vertex);
        if (it == unembedded.end() || *it != target_vertex)
            throw std::invalid_argument("b_set_of: vertex is embedded");
        return b_sets[static_cast<std::size_t>(it - unembedded.begin())];
    }
};

// Doubled graph: all fhat edges on the originals, and for every host edge
// {u,w} the three edges {u+n,w}, {u,w+n}, {u+n,w+n}. B(v) is the +n shadow of
// R(z_v), where the z-labels pair unembedded target vertices with free host
// vertices, ascending on both sides.
inline AuxiliaryInstance build_auxiliary(const Graph& host_alpha, const Embedding& fhat,
                                         const ReservoirFamily& res,
                                         const std::vector<int>& unembedded) {
    int n = host_alpha.n();
    AuxiliaryInstance aux;
    aux.n = n;
    aux.unembedded = unembedded;
    std::sort(aux.unembedded.begin(), aux.unembedded.end());

    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < fhat.target.n(); ++v)
        if (fhat.is_set(v)) used[static_cast<std::size_t>(fhat.at(v))] = 1;
    std::vector<int> free_hosts;
    for (int u = 0; u < n; ++u)
        if (!used[static_cast<std::size_t>(u)]) free_hosts.push_back(u);
    if (free_hosts.size() != aux.unembedded.size()) {
        std::ostringstream os;
        os << "build_auxiliary: " << aux.unembedded.size() << " unembedded vertices vs "
           << free_hosts.size() << " free host vertices";
        throw std::invalid_argument(os.str());
    }
    aux.z_label = free_hosts;

    std::vector<std::pair<int, int>> edges;
    for (auto& [a, b] : fhat.target.edges())
        if (fhat.is_set(a) && fhat.is_set(b)) {
            int x = fhat.at(a), y = fhat.at(b);
            edges.emplace_back(std::min(x, y), std::max(x, y));
        }
    for (auto& [u, w] : host_alpha.edges()) {
        edges.emplace_back(std::min(u + n, w), std::max(u + n, w));
        edges.emplace_back(std::min(u, w + n), std::max(u, w + n));
        edges.emplace_back(u + n, w + n);
    }
    aux.g_aux = Graph(2 * n, std::move(edges));

    for (std::size_t i = 0; i < aux.unembedded.size(); ++i) {
        std::vector<int> b;
        for (int w : res.of(aux.z_label[i])) b.push_back(w + n);
        aux.b_sets.push_back(std::move(b));
    }
    return aux;
}

// ---------------------------------------------------------------------------
// Switching resolution: auxiliary embedding back to the original vertex set.

struct SwitchPlan {
    std::vector<int> z0;          // unembedded target vertices
    std::vector<int> z1;          // displaced reservoir preimages
    std::vector<char> case_tag;   // per target vertex: 0 fixed, 1 in Z0, 2 in Z1
};

struct ResolveResult {
    Embedding g;
    SwitchPlan plan;
};

// Applies the three-case rule: shadow-mapped vertices drop by n; a vertex
// whose bottom slot was taken moves to the z-label of the taker; everything
// else keeps its place. A Z1 vertex with an F-neighbour in Z0 or Z1 breaks
// the structural guarantee and is reported as an internal error.
inline ResolveResult resolve_switching(const AuxiliaryInstance& aux, const Embedding& g_prime,
                                       const Embedding& fhat, Graph host_for_result = Graph()) {
    int n = aux.n;
    const Graph& f = g_prime.target;
    for (int v = 0; v < f.n(); ++v)
        if (!g_prime.is_set(v)) throw std::invalid_argument("resolve_switching: g_prime not total");
    for (int v = 0; v < f.n(); ++v)
        if (fhat.is_set(v) && fhat.at(v) != g_prime.at(v))
            throw std::invalid_argument("resolve_switching: g_prime does not extend fhat");
    for (std::size_t i = 0; i < aux.unembedded.size(); ++i) {
        int v = aux.unembedded[i];
        if (!std::binary_search(aux.b_sets[i].begin(), aux.b_sets[i].end(), g_prime.at(v)))
            throw std::invalid_argument("resolve_switching: unembedded vertex mapped outside B(v)");
    }

    SwitchPlan plan;
    plan.z0 = aux.unembedded;
    plan.case_tag.assign(static_cast<std::size_t>(f.n()), 0);
    for (int v : plan.z0) plan.case_tag[static_cast<std::size_t>(v)] = 1;

    // taken[w] = the Z0 vertex whose shadow image sits above bottom vertex w.
    std::vector<int> taken(static_cast<std::size_t>(n), -1);
    for (int v : plan.z0) taken[static_cast<std::size_t>(g_prime.at(v) - n)] = v;

    std::vector<int> gmap(static_cast<std::size_t>(f.n()), -1);
    for (int v = 0; v < f.n(); ++v) {
        int img = g_prime.at(v);
        if (plan.case_tag[static_cast<std::size_t>(v)] == 1) {
            gmap[static_cast<std::size_t>(v)] = img - n;
        } else if (img < n && taken[static_cast<std::size_t>(img)] >= 0) {
            plan.case_tag[static_cast<std::size_t>(v)] = 2;
            plan.z1.push_back(v);
            gmap[static_cast<std::size_t>(v)] = aux.z_of(taken[static_cast<std::size_t>(img)]);
        } else {
            gmap[static_cast<std::size_t>(v)] = img;
        }
    }

    for (int v : plan.z1)
        for (int u : f.neighbors(v))
            if (plan.case_tag[static_cast<std::size_t>(u)] != 0)
                throw std::logic_error(
                    "resolve_switching: displaced vertex has a neighbour in Z0/Z1 "
                    "(reservoir structure violated)");

    if (host_for_result.n() == 0) host_for_result = Graph(n);
    ResolveResult out;
    out.g = Embedding(f, std::move(host_for_result), std::move(gmap));
    out.plan = std::move(plan);
    return out;
}

inline nlohmann::ordered_json to_json(const SwitchPlan& plan) {
    nlohmann::ordered_json j;
    j["z0"] = plan.z0;
    j["z1"] = plan.z1;
    auto& cases = j["cases"] = nlohmann::ordered_json::array();
    static const char* names[] = {"fixed", "z0", "z1"};
    for (std::size_t v = 0; v < plan.case_tag.size(); ++v)
        cases.push_back({{"v", v}, {"case", names[static_cast<int>(plan.case_tag[v])]}});
    return j;
}

}  // namespace perturb
