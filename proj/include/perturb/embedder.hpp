// The end-to-end embedding pipeline: multi-round exposure, almost-spanning
// search, connection hypergraphs over the auxiliary graph, one-edge-per-system
// matching, and final assembly through switching resolution.
//
// Every success is verified against the host plus the union of all sampled
// rounds before it is reported; a verification failure after the success path
// is a bug and raises instead of being swallowed.

#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/absorption.hpp"
#include "perturb/family.hpp"
#include "perturb/graph.hpp"
#include "perturb/rng.hpp"
#include "perturb/targets.hpp"

namespace perturb {

// ---------------------------------------------------------------------------
// Configuration (key = value text format; '#' starts a comment).

struct PipelineConfig {
    double epsilon_op = 0.1;
    int m = 20;
    int ell = 0;                       // 0 = use 2k+2
    long long a1_budget = 200000;      // node budget for the almost-spanning search
    int max_edges_per_site = 200;
    long long match_budget = 1000000;  // node budget for the exact matching search
    int greedy_restarts = 50;
    std::optional<double> round0_q;    // schedule overrides, absolute probabilities
    std::optional<double> dense_q;
    std::optional<double> completion_q;
};

inline PipelineConfig parse_config(std::istream& in) {
    PipelineConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (key == "epsilon_op") cfg.epsilon_op = std::stod(val);
        else if (key == "m") cfg.m = std::stoi(val);
        else if (key == "l") cfg.ell = std::stoi(val);
        else if (key == "a1_budget") cfg.a1_budget = std::stoll(val);
        else if (key == "max_edges_per_site") cfg.max_edges_per_site = std::stoi(val);
        else if (key == "match_budget") cfg.match_budget = std::stoll(val);
        else if (key == "greedy_restarts") cfg.greedy_restarts = std::stoi(val);
        else if (key == "round0_q") cfg.round0_q = std::stod(val);
        else if (key == "dense_q") cfg.dense_q = std::stod(val);
        else if (key == "completion_q") cfg.completion_q = std::stod(val);
        else throw std::invalid_argument("config: unknown key " + key);
    }
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Round schedule.

enum class RoundPurpose { almost_spanning, sparse_part, dense_spots, completion };

struct Round {
    double q = 0.0;
    RoundPurpose purpose = RoundPurpose::almost_spanning;
    bool on_2n = false;
    int dense_round = -1;  // which type-round, for dense/completion rounds
};

struct RoundSchedule {
    double p = 0.0;
    std::vector<Round> rounds;

    double nominal_sum() const {
        double s = 0;
        for (auto& r : rounds) s += r.q;
        return s;
    }

    // Exposure mass of the union on the original vertex set: a 2n-round with
    // probability q projects each original pair through three independent
    // sampled pairs.
    double exposure() const {
        double total = 0;
        for (auto& r : rounds) {
            if (r.q >= 1.0) return 1e18;  // a full round is dominated only at p = 1
            total += -std::log1p(-r.q) * (r.on_2n ? 3.0 : 1.0);
        }
        return total;
    }
};

// Coupling: independent rounds G(n, q_i) union to G(n, 1 - prod(1 - q_i)),
// so the union is dominated by G(n,p) exactly when the exposure masses
// -log(1-q_i) (tripled for projected 2n-rounds) sum to at most -log(1-p).
inline void validate_schedule(const RoundSchedule& sched) {
    for (auto& r : sched.rounds)
        if (r.q < 0 || r.q > 1) throw std::invalid_argument("schedule: probability outside [0,1]");
    if (sched.p >= 1.0) return;  // everything is dominated by the complete graph
    bool any_full = false;
    for (auto& r : sched.rounds) any_full |= r.q >= 1.0;
    if (any_full || sched.exposure() > -std::log1p(-sched.p) + 1e-9)
        throw std::invalid_argument("schedule: rounds are not dominated by G(n,p)");
}

namespace detail {
// The round probability spending an exposure fraction beta of p:
// (1-q) = (1-p)^beta, so unions of rounds with total fraction <= 1 stay
// dominated by G(n,p); q is close to beta*p for small p and reaches 1 at p=1.
inline double exposure_round(double p, double beta) {
    if (p >= 1.0) return beta > 0 ? 1.0 : 0.0;
    return -std::expm1(beta * std::log1p(-p));
}
}  // namespace detail

// Single-member families: one almost-spanning round spending half of the
// exposure and one completion round on 2n spending the other half (a sixth
// before projection). Decomposed families: a quarter on the sparse round, a
// quarter shared by the dense type-rounds (a half when the sparse part is
// empty), and the remaining half shared by the completion rounds.
inline RoundSchedule build_round_schedule(const FamilyDescriptor& fam, double p,
                                          const PipelineConfig& cfg) {
    RoundSchedule sched;
    sched.p = p;
    if (fam.kind == FamilyKind::decomposed) {
        int t = std::max(1, fam.type_count);
        bool sparse_empty = fam.dec.f_prime.empty();
        double q0 = cfg.round0_q ? *cfg.round0_q
                                 : (sparse_empty ? 0.0 : detail::exposure_round(p, 0.25));
        double qd = cfg.dense_q ? *cfg.dense_q
                                : detail::exposure_round(p, (sparse_empty ? 0.5 : 0.25) / t);
        double qc = cfg.completion_q ? *cfg.completion_q : detail::exposure_round(p, 1.0 / (6 * t));
        sched.rounds.push_back({q0, RoundPurpose::sparse_part, false, -1});
        for (int r = 0; r < fam.type_count; ++r)
            sched.rounds.push_back({qd, RoundPurpose::dense_spots, false, r});
        for (int r = 0; r < fam.type_count; ++r)
            sched.rounds.push_back({qc, RoundPurpose::completion, true, r});
    } else {
        double q1 = cfg.round0_q ? *cfg.round0_q : detail::exposure_round(p, 0.5);
        double qc = cfg.completion_q ? *cfg.completion_q : detail::exposure_round(p, 1.0 / 6);
        sched.rounds.push_back({q1, RoundPurpose::almost_spanning, false, -1});
        sched.rounds.push_back({qc, RoundPurpose::completion, true, -1});
    }
    validate_schedule(sched);
    return sched;
}

// ---------------------------------------------------------------------------
// Budgeted backtracking embedder.

namespace detail {

// Static order: repeatedly pick the vertex with the most already-ordered
// neighbours (ties to higher degree, then lower index), which keeps the
// search connected inside components.
inline std::vector<int> embed_order(const Graph& pat) {
    int n = pat.n();
    std::vector<int> order;
    std::vector<char> placed(static_cast<std::size_t>(n), 0);
    std::vector<int> placed_nbrs(static_cast<std::size_t>(n), 0);
    for (int step = 0; step < n; ++step) {
        int best = -1;
        for (int v = 0; v < n; ++v) {
            if (placed[static_cast<std::size_t>(v)]) continue;
            if (best < 0) { best = v; continue; }
            auto key = [&](int x) {
                return std::make_tuple(placed_nbrs[static_cast<std::size_t>(x)], pat.degree(x), -x);
            };
            if (key(v) > key(best)) best = v;
        }
        order.push_back(best);
        placed[static_cast<std::size_t>(best)] = 1;
        for (int u : pat.neighbors(best)) ++placed_nbrs[static_cast<std::size_t>(u)];
    }
    return order;
}

// Injective embedding of `pat` into `search` using only hosts with free[v]
// set, respecting per-pattern-vertex forced adjacencies. Budget counts
// candidate placements; returns false on failure or exhaustion.
inline bool backtrack_embed(const Graph& pat, const Graph& search, const std::vector<char>& free_host,
                            const std::vector<std::vector<int>>& forced, std::vector<int>& out,
                            long long& budget) {
    int np = pat.n();
    out.assign(static_cast<std::size_t>(np), -1);
    if (np == 0) return true;
    std::vector<int> order = embed_order(pat);
    std::vector<char> used(static_cast<std::size_t>(search.n()), 0);

    auto rec = [&](auto&& self, int depth) -> bool {
        if (depth == np) return true;
        int v = order[static_cast<std::size_t>(depth)];
        // Candidate pool: neighbours of the first placed pattern-neighbour, or
        // every free host vertex when v starts a new component.
        const std::vector<int>* pool = nullptr;
        int anchor = -1;
        for (int u : pat.neighbors(v))
            if (out[static_cast<std::size_t>(u)] >= 0) { anchor = out[static_cast<std::size_t>(u)]; break; }
        std::vector<int> all;
        if (anchor >= 0) {
            pool = &search.neighbors(anchor);
        } else {
            all.resize(static_cast<std::size_t>(search.n()));
            for (int i = 0; i < search.n(); ++i) all[static_cast<std::size_t>(i)] = i;
            pool = &all;
        }
        for (int cand : *pool) {
            if (budget <= 0) return false;
            --budget;
            if (!free_host[static_cast<std::size_t>(cand)] || used[static_cast<std::size_t>(cand)])
                continue;
            bool ok = true;
            for (int u : pat.neighbors(v)) {
                int img = out[static_cast<std::size_t>(u)];
                if (img >= 0 && !search.has_edge(cand, img)) { ok = false; break; }
            }
            if (ok)
                for (int f : forced[static_cast<std::size_t>(v)])
                    if (!search.has_edge(cand, f)) { ok = false; break; }
            if (!ok) continue;
            out[static_cast<std::size_t>(v)] = cand;
            used[static_cast<std::size_t>(cand)] = 1;
            if (self(self, depth + 1)) return true;
            used[static_cast<std::size_t>(cand)] = 0;
            out[static_cast<std::size_t>(v)] = -1;
            if (budget <= 0) return false;
        }
        return false;
    };
    return rec(rec, 0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Almost-spanning search (first stage).

struct A1Result {
    bool ok = false;
    std::string reason;
    std::vector<int> map;                    // target vertex -> host, -1 when uncovered
    std::vector<std::vector<int>> missing;   // per class: member indices left unembedded
    long long budget_left = 0;
};

// `round_graphs` are the per-round search graphs (host edges already unioned
// in by the caller): one graph for single-member families; for decomposed
// families, index 0 is the sparse round and 1+r the dense type-rounds.
inline A1Result embed_almost_spanning(const FamilyDescriptor& fam,
                                      const std::vector<Graph>& round_graphs, long long budget) {
    const Graph& f = fam.target;
    A1Result res;
    res.map.assign(static_cast<std::size_t>(f.n()), -1);
    res.budget_left = budget;
    if (round_graphs.empty()) throw std::invalid_argument("embed_almost_spanning: no rounds");
    int host_n = round_graphs[0].n();
    std::vector<char> free_host(static_cast<std::size_t>(host_n), 1);

    auto place = [&](const std::vector<int>& pat_vertices, const std::vector<int>& sub_map) {
        for (std::size_t i = 0; i < pat_vertices.size(); ++i) {
            res.map[static_cast<std::size_t>(pat_vertices[i])] = sub_map[i];
            free_host[static_cast<std::size_t>(sub_map[i])] = 0;
        }
    };

    if (fam.kind == FamilyKind::complete_cover || fam.kind == FamilyKind::path_power) {
        const Graph& g1 = round_graphs[0];
        std::vector<std::vector<int>> pieces;
        if (fam.kind == FamilyKind::complete_cover) {
            std::vector<int> all;
            for (int v = 0; v < f.n(); ++v) all.push_back(v);
            pieces.push_back(std::move(all));
        } else {
            pieces = fam.blocks;
        }
        for (auto& piece : pieces) {
            Graph pat = induced_subgraph(f, piece);
            std::vector<std::vector<int>> forced(static_cast<std::size_t>(pat.n()));
            std::vector<int> sub;
            if (!detail::backtrack_embed(pat, g1, free_host, forced, sub, res.budget_left)) {
                res.reason = res.budget_left <= 0 ? "round1: search budget exhausted"
                                                  : "round1: no almost-spanning copy found";
                return res;
            }
            place(piece, sub);
        }
        res.ok = true;
        return res;
    }

    // Decomposed family: sparse part first, then the dense classes round by
    // round, tolerating up to the slack budget of misses per class.
    const Decomposition& dec = fam.dec;
    res.missing.assign(dec.classes.size(), {});
    if (!dec.f_prime.empty()) {
        Graph pat = induced_subgraph(f, dec.f_prime);
        std::vector<std::vector<int>> forced(static_cast<std::size_t>(pat.n()));
        std::vector<int> sub;
        if (!detail::backtrack_embed(pat, round_graphs[0], free_host, forced, sub, res.budget_left)) {
            res.reason = res.budget_left <= 0 ? "round1: search budget exhausted"
                                              : "round1: sparse part not embedded";
            return res;
        }
        place(dec.f_prime, sub);
    }

    auto try_member = [&](const Graph& gh, const std::vector<int>& member) {
        Graph pat = induced_subgraph(f, member);
        std::vector<std::vector<int>> forced(static_cast<std::size_t>(pat.n()));
        for (std::size_t i = 0; i < member.size(); ++i)
            for (int x : f.neighbors(member[i]))
                if (res.map[static_cast<std::size_t>(x)] >= 0)
                    forced[i].push_back(res.map[static_cast<std::size_t>(x)]);
        std::vector<int> sub;
        if (!detail::backtrack_embed(pat, gh, free_host, forced, sub, res.budget_left)) return false;
        place(member, sub);
        return true;
    };
    auto unplace = [&](const std::vector<int>& member) {
        for (int v : member) {
            free_host[static_cast<std::size_t>(res.map[static_cast<std::size_t>(v)])] = 1;
            res.map[static_cast<std::size_t>(v)] = -1;
        }
    };

    for (int r = 0; r < fam.type_count; ++r) {
        if (static_cast<std::size_t>(1 + r) >= round_graphs.size())
            throw std::invalid_argument("embed_almost_spanning: missing dense round graph");
        const Graph& gh = round_graphs[static_cast<std::size_t>(1 + r)];
        std::vector<std::pair<std::size_t, std::size_t>> round_members;  // (class, member)
        for (std::size_t c = 0; c < dec.classes.size(); ++c) {
            if (fam.class_round[c] != r) continue;
            auto& cls = dec.classes[c];
            for (std::size_t mi = 0; mi < cls.members.size(); ++mi) {
                round_members.emplace_back(c, mi);
                if (!try_member(gh, cls.members[mi]))
                    res.missing[c].push_back(static_cast<int>(mi));
            }
        }

        // Displacement repair: a failed spot may evict an embedded spot of
        // this round when both then fit. All adjacency constraints are
        // recomputed at placement time, so evictions stay sound. A few passes
        // untangle the usual tail of stranded vertices.
        for (int pass = 0; pass < 3; ++pass) {
            bool progress = false;
            for (std::size_t c = 0; c < dec.classes.size(); ++c) {
                if (fam.class_round[c] != r || res.missing[c].empty()) continue;
                std::vector<int> still;
                for (int mi : res.missing[c]) {
                    const auto& member = dec.classes[c].members[static_cast<std::size_t>(mi)];
                    bool repaired = false;
                    for (auto& [c2, mj] : round_members) {
                        if (res.budget_left <= 0) break;
                        const auto& other = dec.classes[c2].members[mj];
                        if (res.map[static_cast<std::size_t>(other[0])] < 0) continue;
                        if (c2 == c && static_cast<int>(mj) == mi) continue;
                        std::vector<int> saved;
                        for (int v : other) saved.push_back(res.map[static_cast<std::size_t>(v)]);
                        unplace(other);
                        if (try_member(gh, member)) {
                            if (try_member(gh, other)) {
                                repaired = true;
                            } else {
                                unplace(member);
                            }
                        }
                        if (repaired) break;
                        for (std::size_t i = 0; i < other.size(); ++i) {
                            res.map[static_cast<std::size_t>(other[i])] = saved[i];
                            free_host[static_cast<std::size_t>(saved[i])] = 0;
                        }
                    }
                    if (repaired) progress = true;
                    else still.push_back(mi);
                }
                res.missing[c] = still;
            }
            if (!progress) break;
        }

        for (std::size_t c = 0; c < dec.classes.size(); ++c) {
            if (fam.class_round[c] != r) continue;
            if (static_cast<long long>(res.missing[c].size()) > fam.slack[c]) {
                std::ostringstream os;
                os << "round1: class " << c << " exceeded its slack budget " << fam.slack[c];
                res.reason = os.str();
                return res;
            }
        }
    }
    res.ok = true;
    return res;
}

// Convenience overload for single-round families.
inline A1Result embed_almost_spanning(const FamilyDescriptor& fam, const Graph& g1,
                                      long long budget) {
    return embed_almost_spanning(fam, std::vector<Graph>{g1}, budget);
}

// ---------------------------------------------------------------------------
// Connection hypergraphs.

struct ConnectionHypergraph {
    int uniformity = 0;
    int site_id = 0;
    std::vector<std::vector<int>> edges;      // sorted vertex sets in the aux universe
    std::vector<std::vector<int>> witnesses;  // aligned ordered tuples realizing the connection
};

namespace detail {

inline bool union_edge(const Graph& a, const Graph& b, int u, int v) {
    return a.has_edge(u, v) || b.has_edge(u, v);
}

}  // namespace detail

// Candidate l-sets for one connector site: an ordered tuple w_1..w_l of free
// vertices with w_j in B(w*_j) such that u_1..u_k w_1..w_l v_1..v_k is the
// kth power of a path in g_aux together with g2. Vertices are chosen in the
// order w_1..w_j then w_l..w_{j+1}, mirroring the counting order.
inline ConnectionHypergraph connector_site_hypergraph(
    const ConnectorSite& site, const std::vector<int>& g_map, const AuxiliaryInstance& aux,
    const Graph& g2, const std::vector<char>& top_free, int k, int ell, int site_id, int cap) {
    ConnectionHypergraph hg;
    hg.uniformity = ell;
    hg.site_id = site_id;
    int total = 2 * k + ell;
    std::vector<int> seq(static_cast<std::size_t>(total), -1);
    for (int i = 0; i < k; ++i) seq[static_cast<std::size_t>(i)] = g_map[static_cast<std::size_t>(site.u_star[static_cast<std::size_t>(i)])];
    for (int i = 0; i < k; ++i)
        seq[static_cast<std::size_t>(k + ell + i)] = g_map[static_cast<std::size_t>(site.v_star[static_cast<std::size_t>(i)])];

    int j = ell / 2;
    std::vector<int> fill;  // sequence positions of w_1..w_j then w_l..w_{j+1}
    for (int i = 0; i < j; ++i) fill.push_back(k + i);
    for (int i = ell - 1; i >= j; --i) fill.push_back(k + i);

    std::vector<char> in_tuple(static_cast<std::size_t>(aux.g_aux.n()), 0);
    std::vector<int> tuple(static_cast<std::size_t>(ell), -1);

    auto rec = [&](auto&& self, std::size_t step) -> bool {
        if (static_cast<int>(hg.edges.size()) >= cap) return false;
        if (step == fill.size()) {
            std::vector<int> edge = tuple;
            std::sort(edge.begin(), edge.end());
            hg.edges.push_back(std::move(edge));
            hg.witnesses.push_back(tuple);
            return static_cast<int>(hg.edges.size()) < cap;
        }
        int pos = fill[step];
        int widx = pos - k;  // which w this is
        const auto& bset = aux.b_set_of(site.w_star[static_cast<std::size_t>(widx)]);
        for (int cand : bset) {
            if (!top_free[static_cast<std::size_t>(cand)] || in_tuple[static_cast<std::size_t>(cand)])
                continue;
            bool ok = true;
            for (int q = std::max(0, pos - k); ok && q < std::min(total, pos + k + 1); ++q) {
                if (q == pos) continue;
                int other = seq[static_cast<std::size_t>(q)];
                if (other >= 0 && !detail::union_edge(aux.g_aux, g2, cand, other)) ok = false;
            }
            if (!ok) continue;
            seq[static_cast<std::size_t>(pos)] = cand;
            tuple[static_cast<std::size_t>(widx)] = cand;
            in_tuple[static_cast<std::size_t>(cand)] = 1;
            bool cont = self(self, step + 1);
            in_tuple[static_cast<std::size_t>(cand)] = 0;
            tuple[static_cast<std::size_t>(widx)] = -1;
            seq[static_cast<std::size_t>(pos)] = -1;
            if (!cont) return false;
        }
        return true;
    };
    rec(rec, 0);
    return hg;
}

// All connector-site hypergraphs of a path-power family.
inline std::vector<ConnectionHypergraph> build_connection_hypergraphs(
    const FamilyDescriptor& fam, const std::vector<int>& g_map, const AuxiliaryInstance& aux,
    const Graph& g2, const std::vector<char>& top_free, int cap) {
    std::vector<ConnectionHypergraph> out;
    for (std::size_t i = 0; i < fam.sites.size(); ++i)
        out.push_back(connector_site_hypergraph(fam.sites[i], g_map, aux, g2, top_free, fam.plan.k,
                                                fam.plan.ell, static_cast<int>(i), cap));
    return out;
}

// Candidate s_h-sets for one unembedded dense spot: each vertex lands in its
// B-set, spot edges hold in g_aux together with gh, and every already-embedded
// neighbour is attached through the same union.
inline ConnectionHypergraph spot_hypergraph(const Graph& f, const std::vector<int>& spot,
                                            const std::vector<int>& g_map,
                                            const AuxiliaryInstance& aux, const Graph& gh,
                                            const std::vector<char>& top_free, int site_id,
                                            int cap) {
    ConnectionHypergraph hg;
    hg.uniformity = static_cast<int>(spot.size());
    hg.site_id = site_id;
    std::size_t s = spot.size();
    std::vector<int> tuple(s, -1);
    std::vector<char> in_tuple(static_cast<std::size_t>(aux.g_aux.n()), 0);

    std::vector<std::vector<int>> attach(s);
    for (std::size_t i = 0; i < s; ++i)
        for (int x : f.neighbors(spot[i]))
            if (g_map[static_cast<std::size_t>(x)] >= 0)
                attach[i].push_back(g_map[static_cast<std::size_t>(x)]);

    auto rec = [&](auto&& self, std::size_t i) -> bool {
        if (static_cast<int>(hg.edges.size()) >= cap) return false;
        if (i == s) {
            std::vector<int> edge = tuple;
            std::sort(edge.begin(), edge.end());
            hg.edges.push_back(std::move(edge));
            hg.witnesses.push_back(tuple);
            return static_cast<int>(hg.edges.size()) < cap;
        }
        for (int cand : aux.b_set_of(spot[i])) {
            if (!top_free[static_cast<std::size_t>(cand)] || in_tuple[static_cast<std::size_t>(cand)])
                continue;
            bool ok = true;
            for (std::size_t q = 0; ok && q < i; ++q)
                if (f.has_edge(spot[i], spot[q]) &&
                    !detail::union_edge(aux.g_aux, gh, cand, tuple[q]))
                    ok = false;
            for (std::size_t a = 0; ok && a < attach[i].size(); ++a)
                if (!detail::union_edge(aux.g_aux, gh, cand, attach[i][a])) ok = false;
            if (!ok) continue;
            tuple[i] = cand;
            in_tuple[static_cast<std::size_t>(cand)] = 1;
            bool cont = self(self, i + 1);
            in_tuple[static_cast<std::size_t>(cand)] = 0;
            tuple[i] = -1;
            if (!cont) return false;
        }
        return true;
    };
    rec(rec, 0);
    return hg;
}

// ---------------------------------------------------------------------------
// One edge per system, pairwise disjoint.

struct MatchResult {
    bool ok = false;
    std::vector<int> chosen;     // per system, index into its edge list (-1 when failed)
    std::vector<int> blocking;   // system ids that exhausted options
    std::string reason;
};

// Exact backtracking (fewest edges first, deterministic edge order) under a
// node budget, then randomized greedy restarts as a fallback. Failure reports
// the prefix of systems that could not be completed.
inline MatchResult rainbow_matching(const std::vector<ConnectionHypergraph>& systems,
                                    long long budget = 1000000, int greedy_restarts = 50) {
    MatchResult out;
    out.chosen.assign(systems.size(), -1);
    for (std::size_t i = 0; i < systems.size(); ++i)
        if (systems[i].edges.empty()) {
            out.reason = "system " + std::to_string(systems[i].site_id) + " has no candidate edges";
            out.blocking = {static_cast<int>(i)};
            return out;
        }
    if (systems.empty()) { out.ok = true; return out; }

    std::vector<int> order(systems.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return systems[static_cast<std::size_t>(a)].edges.size() <
               systems[static_cast<std::size_t>(b)].edges.size();
    });

    int universe = 0;
    for (auto& s : systems)
        for (auto& e : s.edges)
            for (int v : e) universe = std::max(universe, v + 1);
    std::vector<char> used(static_cast<std::size_t>(universe), 0);

    std::size_t deepest = 0;
    bool exhausted = false;
    auto rec = [&](auto&& self, std::size_t depth) -> bool {
        deepest = std::max(deepest, depth);
        if (depth == order.size()) return true;
        const auto& sys = systems[static_cast<std::size_t>(order[depth])];
        for (std::size_t ei = 0; ei < sys.edges.size(); ++ei) {
            if (budget <= 0) { exhausted = true; return false; }
            --budget;
            const auto& e = sys.edges[ei];
            bool clash = false;
            for (int v : e)
                if (used[static_cast<std::size_t>(v)]) { clash = true; break; }
            if (clash) continue;
            for (int v : e) used[static_cast<std::size_t>(v)] = 1;
            out.chosen[static_cast<std::size_t>(order[depth])] = static_cast<int>(ei);
            if (self(self, depth + 1)) return true;
            for (int v : e) used[static_cast<std::size_t>(v)] = 0;
            out.chosen[static_cast<std::size_t>(order[depth])] = -1;
            if (exhausted) return false;
        }
        return false;
    };
    if (rec(rec, 0)) { out.ok = true; return out; }

    if (exhausted) {
        // Randomized greedy with restarts; deterministic via a fixed seed.
        for (int restart = 0; restart < greedy_restarts; ++restart) {
            Rng rng(derive_seed(0x6d61746368ULL, static_cast<std::uint64_t>(restart)));
            std::fill(used.begin(), used.end(), 0);
            std::fill(out.chosen.begin(), out.chosen.end(), -1);
            bool all = true;
            for (int idx : order) {
                const auto& sys = systems[static_cast<std::size_t>(idx)];
                std::vector<int> eidx(sys.edges.size());
                for (std::size_t i = 0; i < eidx.size(); ++i) eidx[i] = static_cast<int>(i);
                rng.shuffle(eidx);
                int pick = -1;
                for (int ei : eidx) {
                    bool clash = false;
                    for (int v : sys.edges[static_cast<std::size_t>(ei)])
                        if (used[static_cast<std::size_t>(v)]) { clash = true; break; }
                    if (!clash) { pick = ei; break; }
                }
                if (pick < 0) { all = false; break; }
                out.chosen[static_cast<std::size_t>(idx)] = pick;
                for (int v : sys.edges[static_cast<std::size_t>(pick)]) used[static_cast<std::size_t>(v)] = 1;
            }
            if (all) { out.ok = true; return out; }
        }
        out.reason = "matching budget exhausted and greedy restarts failed";
    } else {
        out.reason = "no disjoint selection exists for the first " + std::to_string(deepest + 1) +
                     " systems (by search order)";
    }
    std::fill(out.chosen.begin(), out.chosen.end(), -1);
    for (std::size_t d = 0; d <= deepest && d < order.size(); ++d)
        out.blocking.push_back(order[d]);
    std::sort(out.blocking.begin(), out.blocking.end());
    return out;
}

// Exhaustive Hall-condition diagnostic: for every subset I of systems, the
// union hypergraph must contain a matching larger than s(|I|-1).
struct HallReport {
    bool pass = true;
    std::vector<int> violating;  // subset that fails, empty when pass
    int witness_matching = 0;    // maximum matching size of that union
};

namespace detail {

inline int max_matching_size(const std::vector<const std::vector<int>*>& edges, int universe) {
    std::vector<char> used(static_cast<std::size_t>(universe), 0);
    int best = 0;
    auto rec = [&](auto&& self, std::size_t idx, int count) -> void {
        best = std::max(best, count);
        if (idx == edges.size()) return;
        // Upper bound: even taking every remaining edge cannot beat best.
        if (count + static_cast<int>(edges.size() - idx) <= best) return;
        self(self, idx + 1, count);
        const auto& e = *edges[idx];
        for (int v : e)
            if (used[static_cast<std::size_t>(v)]) return;
        for (int v : e) used[static_cast<std::size_t>(v)] = 1;
        self(self, idx + 1, count + 1);
        for (int v : e) used[static_cast<std::size_t>(v)] = 0;
    };
    rec(rec, 0, 0);
    return best;
}

}  // namespace detail

inline HallReport hall_condition_check(const std::vector<ConnectionHypergraph>& systems, int s) {
    int t = static_cast<int>(systems.size());
    if (t > 20) throw std::invalid_argument("hall_condition_check: too many systems (cap 20)");
    HallReport rep;
    int universe = 0;
    for (auto& sys : systems)
        for (auto& e : sys.edges)
            for (int v : e) universe = std::max(universe, v + 1);
    for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << t); ++mask) {
        std::vector<const std::vector<int>*> edges;
        for (int i = 0; i < t; ++i)
            if (mask >> i & 1)
                for (auto& e : systems[static_cast<std::size_t>(i)].edges) edges.push_back(&e);
        int m = detail::max_matching_size(edges, universe);
        int size = __builtin_popcount(mask);
        if (m <= s * (size - 1)) {
            rep.pass = false;
            rep.witness_matching = m;
            for (int i = 0; i < t; ++i)
                if (mask >> i & 1) rep.violating.push_back(i);
            return rep;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The pipeline.

struct PipelineResult {
    bool success = false;
    std::string stage;   // failing stage tag: round1 | hall | switching | family
    std::string reason;
    Embedding g;         // verified embedding of the target (success only)
    Graph host;          // host graph actually used (relabelled)
    Graph round_union;   // union of all sampled randomness, on the original n vertices
    SwitchPlan plan;
    RoundSchedule schedule;
    FamilyKind family_kind = FamilyKind::complete_cover;
    std::map<std::string, double> timings_ms;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Projection of a 2n-round to the original vertex set: uw present when any of
// {u,w+n}, {u+n,w}, {u+n,w+n} was sampled.
inline Graph project_round(const Graph& g2, int n) {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int w = u + 1; w < n; ++w)
            if (g2.has_edge(u, w + n) || g2.has_edge(u + n, w) || g2.has_edge(u + n, w + n))
                edges.emplace_back(u, w);
    return Graph(n, std::move(edges));
}

}  // namespace detail

// Full pipeline against a concrete host graph. Stage failures come back as
// tagged results; a verification failure after the success path raises.
inline PipelineResult embed_perturbed(const TargetSpec& spec, const Graph& host_in, double p,
                                      const PipelineConfig& cfg, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("embed_perturbed: p outside [0,1]");
    PipelineResult result;
    auto t0 = std::chrono::steady_clock::now();

    Graph f = realize(spec);
    int n = f.n();
    if (host_in.n() != n) throw std::invalid_argument("embed_perturbed: host and target sizes differ");

    FamilyDescriptor fam = make_family(spec, cfg.epsilon_op, cfg.m, cfg.ell);
    fam.target = f;
    result.family_kind = fam.kind;
    result.schedule = build_round_schedule(fam, p, cfg);
    result.timings_ms["family"] = detail::ms_since(t0);

    // Sample the first-stage rounds and run the almost-spanning search on the
    // union of the host and each round.
    t0 = std::chrono::steady_clock::now();
    std::vector<Graph> stage1_graphs;   // raw rounds, original labels
    std::vector<Graph> stage1_search;   // host union
    std::vector<std::size_t> stage2_idx;
    for (std::size_t i = 0; i < result.schedule.rounds.size(); ++i) {
        const Round& r = result.schedule.rounds[i];
        if (r.on_2n) { stage2_idx.push_back(i); continue; }
        Graph gi = gnp_sample(n, r.q, derive_seed(seed, 1 + static_cast<std::uint64_t>(i)));
        stage1_search.push_back(graph_union(host_in, gi));
        stage1_graphs.push_back(std::move(gi));
    }
    A1Result a1 = embed_almost_spanning(fam, stage1_search, cfg.a1_budget);
    result.timings_ms["round1"] = detail::ms_since(t0);
    if (!a1.ok) {
        result.stage = "round1";
        result.reason = a1.reason;
        return result;
    }

    // Symmetry restoration: compose the found copy with a uniform permutation
    // and relabel the host and the sampled rounds consistently.
    t0 = std::chrono::steady_clock::now();
    Rng sigma_rng(derive_seed(seed, 0));
    std::vector<int> sigma = sigma_rng.permutation(n);
    Graph host = relabel(host_in, sigma);
    for (auto& g : stage1_graphs) g = relabel(g, sigma);
    std::vector<int> fmap(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        if (a1.map[static_cast<std::size_t>(v)] >= 0)
            fmap[static_cast<std::size_t>(v)] = sigma[static_cast<std::size_t>(a1.map[static_cast<std::size_t>(v)])];
    Embedding fhat(f, host, fmap);

    // Reservoirs over a maximal 2-independent set of fully-interior vertices.
    std::vector<int> eligible;
    for (int v = 0; v < n; ++v) {
        if (fmap[static_cast<std::size_t>(v)] < 0) continue;
        bool interior = true;
        for (int x : f.neighbors(v))
            if (fmap[static_cast<std::size_t>(x)] < 0) { interior = false; break; }
        if (interior) eligible.push_back(v);
    }
    std::vector<int> wstar = two_independent_set(f, eligible);
    ReservoirFamily res = build_reservoirs(host, fhat, wstar);

    std::vector<int> unembedded;
    for (int v = 0; v < n; ++v)
        if (fmap[static_cast<std::size_t>(v)] < 0) unembedded.push_back(v);
    AuxiliaryInstance aux = build_auxiliary(host, fhat, res, unembedded);
    result.timings_ms["reservoirs"] = detail::ms_since(t0);

    // Completion rounds on 2n vertices.
    t0 = std::chrono::steady_clock::now();
    std::vector<Graph> stage2_graphs;
    for (std::size_t i : stage2_idx)
        stage2_graphs.push_back(gnp_sample(2 * n, result.schedule.rounds[i].q,
                                           derive_seed(seed, 1 + static_cast<std::uint64_t>(i))));

    std::vector<int> g_cur = fmap;  // embedding of f into the aux universe
    std::vector<char> top_free(static_cast<std::size_t>(2 * n), 0);
    for (int v = n; v < 2 * n; ++v) top_free[static_cast<std::size_t>(v)] = 1;

    auto apply_selection = [&](const std::vector<ConnectionHypergraph>& systems,
                               const MatchResult& match,
                               const std::vector<std::vector<int>>& vertex_lists) {
        for (std::size_t i = 0; i < systems.size(); ++i) {
            const auto& witness = systems[i].witnesses[static_cast<std::size_t>(match.chosen[i])];
            const auto& verts = vertex_lists[i];
            for (std::size_t j = 0; j < verts.size(); ++j) {
                g_cur[static_cast<std::size_t>(verts[j])] = witness[j];
                top_free[static_cast<std::size_t>(witness[j])] = 0;
            }
        }
    };

    if (fam.kind == FamilyKind::path_power && !fam.sites.empty()) {
        const Graph& g2 = stage2_graphs.at(0);
        auto systems = build_connection_hypergraphs(fam, g_cur, aux, g2, top_free,
                                                    cfg.max_edges_per_site);
        MatchResult match = rainbow_matching(systems, cfg.match_budget, cfg.greedy_restarts);
        if (!match.ok) {
            result.stage = "hall";
            result.reason = "connector sites: " + match.reason;
            return result;
        }
        std::vector<std::vector<int>> vertex_lists;
        for (auto& site : fam.sites) vertex_lists.push_back(site.w_star);
        apply_selection(systems, match, vertex_lists);
    } else if (fam.kind == FamilyKind::decomposed) {
        for (int r = 0; r < fam.type_count; ++r) {
            const Graph& gh = stage2_graphs.at(static_cast<std::size_t>(r));
            std::vector<ConnectionHypergraph> systems;
            std::vector<std::vector<int>> vertex_lists;
            for (std::size_t c = 0; c < fam.dec.classes.size(); ++c) {
                if (fam.class_round[c] != r) continue;
                for (int mi : a1.missing[c]) {
                    const auto& member = fam.dec.classes[c].members[static_cast<std::size_t>(mi)];
                    systems.push_back(spot_hypergraph(f, member, g_cur, aux, gh, top_free,
                                                      static_cast<int>(systems.size()),
                                                      cfg.max_edges_per_site));
                    vertex_lists.push_back(member);
                }
            }
            if (systems.empty()) continue;
            MatchResult match = rainbow_matching(systems, cfg.match_budget, cfg.greedy_restarts);
            if (!match.ok) {
                result.stage = "hall";
                result.reason = "dense-spot round " + std::to_string(r) + ": " + match.reason;
                return result;
            }
            apply_selection(systems, match, vertex_lists);
        }
    }
    result.timings_ms["completion"] = detail::ms_since(t0);

    // Switching resolution and the final verification against everything that
    // was actually sampled.
    t0 = std::chrono::steady_clock::now();
    Graph aux_union = aux.g_aux;
    for (auto& g2 : stage2_graphs) aux_union = graph_union(aux_union, g2);
    Embedding g_prime(f, aux_union, g_cur);

    Graph round_union(n);
    for (auto& g : stage1_graphs) round_union = graph_union(round_union, g);
    for (auto& g2 : stage2_graphs) round_union = graph_union(round_union, detail::project_round(g2, n));

    ResolveResult resolved = resolve_switching(aux, g_prime, fhat, graph_union(host, round_union));

    EmbeddingCheck check = is_embedding(resolved.g);
    if (!check.valid)
        throw std::logic_error("embed_perturbed: success path produced an invalid embedding: " +
                               check.reason);
    result.timings_ms["resolve"] = detail::ms_since(t0);

    result.success = true;
    result.g = std::move(resolved.g);
    result.plan = std::move(resolved.plan);
    result.host = std::move(host);
    result.round_union = std::move(round_union);
    return result;
}

inline PipelineResult embed_perturbed(const TargetSpec& spec, const HostSpec& host_spec, double p,
                                      const PipelineConfig& cfg, std::uint64_t seed) {
    Graph host = make_host(host_spec, derive_seed(seed, 0xa1fa));
    return embed_perturbed(spec, host, p, cfg, seed);
}

}  // namespace perturb
