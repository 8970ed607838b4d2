// Round schedules, the almost-spanning search, connection hypergraphs (with a
// brute-force enumeration oracle), the one-per-system matching (with an
// exhaustive oracle), and the full pipeline.

#include <gtest/gtest.h>

#include <set>

#include "perturb/embedder.hpp"
#include "perturb/harness.hpp"

using namespace perturb;

namespace {

Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph(n, std::move(e));
}

ConnectionHypergraph make_system(int uniformity, int id, std::vector<std::vector<int>> edges) {
    ConnectionHypergraph hg;
    hg.uniformity = uniformity;
    hg.site_id = id;
    for (auto& e : edges) {
        auto sorted = e;
        std::sort(sorted.begin(), sorted.end());
        hg.edges.push_back(sorted);
        hg.witnesses.push_back(e);
    }
    return hg;
}

// Exhaustive one-edge-per-system selection for small inputs.
bool brute_rainbow(const std::vector<ConnectionHypergraph>& systems, std::size_t idx,
                   std::set<int>& used) {
    if (idx == systems.size()) return true;
    for (auto& e : systems[idx].edges) {
        bool clash = false;
        for (int v : e)
            if (used.count(v)) { clash = true; break; }
        if (clash) continue;
        for (int v : e) used.insert(v);
        if (brute_rainbow(systems, idx + 1, used)) return true;
        for (int v : e) used.erase(v);
    }
    return false;
}

}  // namespace

TEST(Family, PathPowerSingleMember) {
    // n = 103, m = 20, l = 5: s = 4 blocks, t = 3, F* covers 83 >= (1-0.2)n.
    TargetSpec spec = parse_target("ham-power:k=2", 103);
    spec.m = 20;
    spec.ell = 5;
    FamilyDescriptor fam = suitable_family(spec, 0.2);
    EXPECT_EQ(fam.kind, FamilyKind::path_power);
    EXPECT_EQ(fam.fstar_vertices.size(), 83u);
    EXPECT_EQ(fam.sites.size(), 4u);
    EXPECT_GE(static_cast<double>(fam.fstar_vertices.size()), 0.8 * 103);
    // The blocks are induced path powers of the cycle power.
    Graph fstar = induced_subgraph(fam.target, fam.fstar_vertices);
    EXPECT_EQ(fstar.edge_count(), 3 * (2 * 21 - 3) + (2 * 20 - 3));
}

TEST(Family, SlackBudgetFormula) {
    // K5-factor at n = 500, eps 0.2: budget floor(eps n / s_h^2) = 4 per class.
    TargetSpec big = parse_target("factor:K5", 500);
    FamilyDescriptor fam = suitable_family(big, 0.2);
    EXPECT_EQ(fam.kind, FamilyKind::decomposed);
    EXPECT_EQ(fam.type_count, 1);
    for (auto s : fam.slack) EXPECT_EQ(s, 4);
    // At n = 50 the same formula gives 0, which is an error.
    TargetSpec small = parse_target("factor:K5", 50);
    EXPECT_THROW(suitable_family(small, 0.2), std::invalid_argument);
    // The pipeline-facing constructor falls back to the complete cover.
    FamilyDescriptor fb = make_family(small, 0.2);
    EXPECT_EQ(fb.kind, FamilyKind::complete_cover);
}

TEST(Family, AdaptsBlockLengthForAwkwardN) {
    // n = 28 with m = 20, l = 6 has t > s; a nearby block length fixes it.
    TargetSpec spec = parse_target("ham-power:k=2", 28);
    FamilyDescriptor fam = make_family(spec, 0.4, 20, 6);
    EXPECT_EQ(fam.kind, FamilyKind::path_power);
    EXPECT_EQ(fam.plan.s * (fam.plan.m + fam.plan.ell) + fam.plan.t, 28);
    // Tiny n has no feasible plan at all: complete cover.
    TargetSpec tiny = parse_target("ham-power:k=2", 8);
    EXPECT_EQ(make_family(tiny, 0.4).kind, FamilyKind::complete_cover);
}

TEST(Schedule, SingleMemberSplit) {
    FamilyDescriptor fam = complete_cover_family(complete(10));
    PipelineConfig cfg;
    auto sched = build_round_schedule(fam, 0.6, cfg);
    ASSERT_EQ(sched.rounds.size(), 2u);
    // Half the exposure to the first round, a (pre-projection) sixth to the
    // completion round; close to p/2 and p/6 at small p, exactly 1 at p = 1.
    EXPECT_NEAR(sched.rounds[0].q, 1 - std::sqrt(1 - 0.6), 1e-12);
    EXPECT_NEAR(sched.rounds[1].q, 1 - std::pow(1 - 0.6, 1.0 / 6), 1e-12);
    EXPECT_TRUE(sched.rounds[1].on_2n);
    EXPECT_LE(sched.exposure(), -std::log1p(-0.6) + 1e-9);

    auto full = build_round_schedule(fam, 1.0, cfg);
    EXPECT_DOUBLE_EQ(full.rounds[0].q, 1.0);
    EXPECT_DOUBLE_EQ(full.rounds[1].q, 1.0);

    auto tiny = build_round_schedule(fam, 0.01, cfg);
    EXPECT_NEAR(tiny.rounds[0].q, 0.005, 2e-5);
    EXPECT_NEAR(tiny.rounds[1].q, 0.01 / 6, 2e-5);
}

TEST(Schedule, DecomposedReallocatesWhenSparsePartEmpty) {
    TargetSpec spec = parse_target("factor:K3", 30);
    FamilyDescriptor fam = make_family(spec, 0.5);
    ASSERT_EQ(fam.kind, FamilyKind::decomposed);
    EXPECT_TRUE(fam.dec.f_prime.empty());
    PipelineConfig cfg;
    auto sched = build_round_schedule(fam, 0.3, cfg);
    EXPECT_LE(sched.exposure(), -std::log1p(-0.3) + 1e-9);
    EXPECT_DOUBLE_EQ(sched.rounds[0].q, 0.0);  // nothing for the empty sparse part
    int dense_rounds = 0;
    for (auto& r : sched.rounds)
        if (r.purpose == RoundPurpose::dense_spots) {
            ++dense_rounds;
            EXPECT_GT(r.q, 0.3 / 4);  // fattened to half the exposure
        }
    EXPECT_EQ(dense_rounds, fam.type_count);
}

TEST(Schedule, OverridesAndValidation) {
    FamilyDescriptor fam = complete_cover_family(complete(10));
    PipelineConfig cfg;
    cfg.round0_q = 0.9;
    cfg.completion_q = 0.2;
    EXPECT_THROW(build_round_schedule(fam, 0.9, cfg), std::invalid_argument);
    cfg.round0_q = 0.5;
    cfg.completion_q = 0.1;
    auto sched = build_round_schedule(fam, 0.9, cfg);
    EXPECT_DOUBLE_EQ(sched.rounds[0].q, 0.5);
    EXPECT_DOUBLE_EQ(sched.rounds[1].q, 0.1);
}

TEST(AlmostSpanning, MatchingIntoCompleteGraph) {
    Graph matching(4, {{0, 1}, {2, 3}});
    FamilyDescriptor fam = complete_cover_family(matching);
    auto res = embed_almost_spanning(fam, complete(6), 100000);
    EXPECT_TRUE(res.ok);
    Embedding emb(matching, complete(6), {res.map[0], res.map[1], res.map[2], res.map[3]});
    EXPECT_TRUE(is_embedding(emb).valid);
}

TEST(AlmostSpanning, PathPowerBlocksIntoDisjointCliques) {
    // Two disjoint K5's contain 2 * P^2_5.
    std::vector<std::pair<int, int>> he;
    for (int b = 0; b < 2; ++b)
        for (int u = 0; u < 5; ++u)
            for (int v = u + 1; v < 5; ++v) he.emplace_back(5 * b + u, 5 * b + v);
    Graph host(10, std::move(he));

    std::vector<std::pair<int, int>> fe;
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 5; ++i)
            for (int d = 1; d <= 2 && i + d < 5; ++d) fe.emplace_back(5 * b + i, 5 * b + i + d);
    Graph fstar(10, std::move(fe));
    FamilyDescriptor fam = complete_cover_family(fstar);
    auto res = embed_almost_spanning(fam, host, 100000);
    EXPECT_TRUE(res.ok);
    Embedding emb(fstar, host, res.map);
    EXPECT_TRUE(is_embedding(emb).valid);
}

TEST(AlmostSpanning, TriangleIntoTriangleFreeFails) {
    Graph triangle = complete(3);
    TargetSpec c6 = parse_target("ham-power:k=1", 6);
    Graph host = realize(c6);
    // Pad the triangle to 6 vertices so sizes match.
    Graph padded(6, {{0, 1}, {1, 2}, {0, 2}});
    FamilyDescriptor fam = complete_cover_family(padded);
    auto res = embed_almost_spanning(fam, host, 100000);
    EXPECT_FALSE(res.ok);
    EXPECT_NE(res.reason.find("round1"), std::string::npos);
}

TEST(AlmostSpanning, DecomposedSlackTolerated) {
    // Triangle factor on 9 vertices; host has only two triangles available, so
    // one spot must remain unembedded and the slack budget takes it.
    TargetSpec spec = parse_target("factor:K3", 9);
    FamilyDescriptor fam = make_family(spec, 1.0);
    ASSERT_EQ(fam.kind, FamilyKind::decomposed);
    long long total_slack = 0;
    for (auto s : fam.slack) total_slack += s;
    ASSERT_GE(total_slack, 1);

    std::vector<std::pair<int, int>> he;
    for (int b = 0; b < 2; ++b)
        for (int u = 0; u < 3; ++u)
            for (int v = u + 1; v < 3; ++v) he.emplace_back(3 * b + u, 3 * b + v);
    Graph host(9, std::move(he));  // two disjoint triangles, three free vertices
    std::vector<Graph> rounds;
    rounds.push_back(Graph(9));  // sparse round unused (F' empty)
    for (int r = 0; r < fam.type_count; ++r) rounds.push_back(host);
    auto res = embed_almost_spanning(fam, rounds, 100000);
    EXPECT_TRUE(res.ok);
    int missing = 0;
    for (auto& m : res.missing) missing += static_cast<int>(m.size());
    EXPECT_EQ(missing, 1);
}

TEST(ConnectorHypergraph, BruteForceAgreement) {
    // A k=2, l=6 connector site over a random auxiliary instance; the edge
    // list must coincide with direct enumeration over all ordered 6-tuples.
    int n = 15;
    Graph host = gnp_sample(n, 0.6, 123);
    TargetSpec spec = parse_target("ham-power:k=2", n);
    spec.m = 4;
    spec.ell = 6;
    // Build a fake partial embedding of the two end tuples only.
    Graph f = realize(spec);
    std::vector<int> gmap(n, -1);
    // Blocks per plan: s=1, t=5: block of 5? Use make_family to lay out sites.
    FamilyDescriptor fam = make_family(spec, 0.9, 4, 6);
    ASSERT_EQ(fam.kind, FamilyKind::path_power);
    ASSERT_EQ(fam.sites.size(), 1u);
    // Embed the single block identically.
    for (int v : fam.fstar_vertices) gmap[v] = v;
    Embedding fhat(f, host, gmap);
    std::vector<int> eligible;
    for (int v : fam.fstar_vertices) {
        bool interior = true;
        for (int x : f.neighbors(v))
            if (gmap[x] < 0) interior = false;
        if (interior) eligible.push_back(v);
    }
    auto wstar = two_independent_set(f, eligible);
    auto res = build_reservoirs(host, fhat, wstar);
    std::vector<int> unembedded;
    for (int v = 0; v < n; ++v)
        if (gmap[v] < 0) unembedded.push_back(v);
    auto aux = build_auxiliary(host, fhat, res, unembedded);
    Graph g2 = gnp_sample(2 * n, 0.5, 321);
    std::vector<char> top_free(2 * n, 0);
    for (int v = n; v < 2 * n; ++v) top_free[v] = 1;

    auto systems = build_connection_hypergraphs(fam, gmap, aux, g2, top_free, 100000);
    ASSERT_EQ(systems.size(), 1u);

    // Brute force: all ordered tuples over the aux universe.
    const auto& site = fam.sites[0];
    std::set<std::vector<int>> expect;
    std::vector<int> w_candidates;
    for (int v = n; v < 2 * n; ++v) w_candidates.push_back(v);
    std::vector<int> tuple(6, -1);
    std::vector<char> used(2 * n, 0);
    int k = 2, ell = 6;
    auto union_edge = [&](int a, int b) { return aux.g_aux.has_edge(a, b) || g2.has_edge(a, b); };
    auto ok_tuple = [&]() {
        std::vector<int> seq;
        for (int i = 0; i < k; ++i) seq.push_back(gmap[site.u_star[i]]);
        for (int i = 0; i < ell; ++i) seq.push_back(tuple[i]);
        for (int i = 0; i < k; ++i) seq.push_back(gmap[site.v_star[i]]);
        for (std::size_t a = 0; a < seq.size(); ++a)
            for (std::size_t b = a + 1; b <= a + k && b < seq.size(); ++b) {
                bool both_u = a < static_cast<std::size_t>(k) && b < static_cast<std::size_t>(k);
                bool both_v = a >= static_cast<std::size_t>(k + ell) && b >= static_cast<std::size_t>(k + ell);
                if (both_u || both_v) continue;
                if (!union_edge(seq[a], seq[b])) return false;
            }
        for (int i = 0; i < ell; ++i) {
            const auto& bset = aux.b_set_of(site.w_star[i]);
            if (!std::binary_search(bset.begin(), bset.end(), tuple[i])) return false;
        }
        return true;
    };
    auto rec = [&](auto&& self, int i) -> void {
        if (i == 6) {
            if (ok_tuple()) {
                auto sorted = tuple;
                std::sort(sorted.begin(), sorted.end());
                expect.insert(sorted);
            }
            return;
        }
        for (int c : w_candidates) {
            if (used[c]) continue;
            used[c] = 1;
            tuple[i] = c;
            self(self, i + 1);
            used[c] = 0;
        }
    };
    rec(rec, 0);

    std::set<std::vector<int>> got(systems[0].edges.begin(), systems[0].edges.end());
    EXPECT_EQ(got, expect);
    // Witnesses realize their edges.
    for (std::size_t i = 0; i < systems[0].edges.size(); ++i) {
        for (int j = 0; j < 6; ++j) tuple[j] = systems[0].witnesses[i][j];
        EXPECT_TRUE(ok_tuple());
    }
}

TEST(ConnectorHypergraph, EmptyWithoutCrossEdges) {
    // Empty host means empty B-sets, hence no candidate edges at all.
    int n = 12;
    Graph host(n);
    TargetSpec spec = parse_target("ham-power:k=2", n);
    FamilyDescriptor fam = make_family(spec, 0.9, 4, 6);
    if (fam.kind != FamilyKind::path_power) GTEST_SKIP();
    Graph f = realize(spec);
    std::vector<int> gmap(n, -1);
    for (int v : fam.fstar_vertices) gmap[v] = v;
    Embedding fhat(f, host, gmap);
    auto res = build_reservoirs(host, fhat, {});
    std::vector<int> unembedded;
    for (int v = 0; v < n; ++v)
        if (gmap[v] < 0) unembedded.push_back(v);
    auto aux = build_auxiliary(host, fhat, res, unembedded);
    Graph g2 = gnp_sample(2 * n, 0.9, 1);
    std::vector<char> top_free(2 * n, 1);
    auto systems = build_connection_hypergraphs(fam, gmap, aux, g2, top_free, 100);
    for (auto& s : systems) EXPECT_TRUE(s.edges.empty());
}

TEST(Rainbow, ForcedSelection) {
    auto l1 = make_system(2, 0, {{0, 1}, {2, 3}});
    auto l2 = make_system(2, 1, {{0, 1}});
    auto match = rainbow_matching({l1, l2});
    ASSERT_TRUE(match.ok);
    EXPECT_EQ(l1.edges[match.chosen[0]], (std::vector<int>{2, 3}));
    EXPECT_EQ(l2.edges[match.chosen[1]], (std::vector<int>{0, 1}));
}

TEST(Rainbow, PigeonholeFailureNamesBlockingSet) {
    auto l1 = make_system(2, 0, {{0, 1}});
    auto l2 = make_system(2, 1, {{0, 1}});
    auto match = rainbow_matching({l1, l2});
    EXPECT_FALSE(match.ok);
    EXPECT_EQ(match.blocking, (std::vector<int>{0, 1}));
}

TEST(Rainbow, EmptySystemFailsImmediately) {
    auto l1 = make_system(2, 7, {});
    auto match = rainbow_matching({l1});
    EXPECT_FALSE(match.ok);
    EXPECT_NE(match.reason.find("7"), std::string::npos);
}

TEST(Rainbow, AgreesWithExhaustiveSearch) {
    for (int trial = 0; trial < 60; ++trial) {
        Rng rng(9000 + trial);
        int t = 2 + rng.uniform_int(0, 3);  // up to 5 systems
        std::vector<ConnectionHypergraph> systems;
        for (int i = 0; i < t; ++i) {
            int m = 1 + rng.uniform_int(0, 7);
            std::vector<std::vector<int>> edges;
            for (int e = 0; e < m; ++e) {
                std::set<int> pick;
                while (pick.size() < 3) pick.insert(rng.uniform_int(0, 11));
                edges.push_back({pick.begin(), pick.end()});
            }
            systems.push_back(make_system(3, i, std::move(edges)));
        }
        auto match = rainbow_matching(systems);
        std::set<int> used;
        bool feasible = brute_rainbow(systems, 0, used);
        EXPECT_EQ(match.ok, feasible) << trial;
        if (match.ok) {
            std::set<int> seen;
            for (int i = 0; i < t; ++i) {
                for (int v : systems[i].edges[match.chosen[i]]) {
                    EXPECT_FALSE(seen.count(v));
                    seen.insert(v);
                }
            }
        }
    }
}

TEST(Hall, SubsetScanMatchesExamples) {
    // Rich systems: every union subset carries a matching beyond s(|I|-1).
    auto r1 = make_system(2, 0, {{0, 1}, {2, 3}, {4, 5}});
    auto r2 = make_system(2, 1, {{0, 1}, {6, 7}, {8, 9}});
    EXPECT_TRUE(hall_condition_check({r1, r2}, 2).pass);

    // The condition is sufficient, not necessary: these two systems admit a
    // selection, yet their union matches only 2 = s(|I|-1) edges.
    auto l1 = make_system(2, 0, {{0, 1}, {2, 3}});
    auto l2 = make_system(2, 1, {{0, 1}});
    ASSERT_TRUE(rainbow_matching({l1, l2}).ok);
    auto borderline = hall_condition_check({l1, l2}, 2);
    EXPECT_FALSE(borderline.pass);
    EXPECT_EQ(borderline.witness_matching, 2);

    auto l3 = make_system(2, 0, {{0, 1}});
    auto l4 = make_system(2, 1, {{0, 1}});
    auto rep = hall_condition_check({l3, l4}, 2);
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.violating, (std::vector<int>{0, 1}));
    EXPECT_EQ(rep.witness_matching, 1);

    EXPECT_TRUE(hall_condition_check({}, 3).pass);
}

TEST(Pipeline, CompleteHostNeedsNoRandomness) {
    // Deterministic host alone carries the square of a Hamilton cycle.
    PipelineConfig cfg;
    for (int n : {5, 9, 16, 30}) {
        TargetSpec spec = parse_target("ham-power:k=2", n);
        auto result = embed_perturbed(spec, HostSpec{HostKind::complete, n, 1.0}, 0.0, cfg, 42);
        EXPECT_TRUE(result.success) << "n=" << n << " stage=" << result.stage << " " << result.reason;
        EXPECT_TRUE(is_embedding(result.g).valid);
    }
}

TEST(Pipeline, TriangleFactorAtFullDensity) {
    PipelineConfig cfg;
    cfg.epsilon_op = 0.34;
    TargetSpec spec = parse_target("factor:K3", 30);
    HostSpec host{HostKind::complete_bipartite_unbalanced, 30, 0.34};
    auto result = embed_perturbed(spec, host, 1.0, cfg, 7);
    EXPECT_TRUE(result.success) << result.stage << ": " << result.reason;
}

TEST(Pipeline, BipartiteHostAloneHasNoTriangles) {
    PipelineConfig cfg;
    cfg.epsilon_op = 0.34;
    TargetSpec spec = parse_target("factor:K3", 30);
    HostSpec host{HostKind::complete_bipartite_unbalanced, 30, 0.34};
    auto result = embed_perturbed(spec, host, 0.0, cfg, 7);
    EXPECT_FALSE(result.success);
    EXPECT_EQ(result.stage, "round1");
}

TEST(Pipeline, SuccessVerifiesAgainstSampledRounds) {
    // The returned embedding must be valid against host + all sampled rounds
    // (re-checked here), across a small randomized matrix.
    PipelineConfig cfg;
    cfg.epsilon_op = 0.4;
    int successes = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int n = 12 + 3 * (trial % 4);
        TargetSpec spec = (trial % 2 == 0) ? parse_target("ham-power:k=2", n)
                                           : parse_target("factor:K3", n - (n % 3));
        if (spec.n != n) spec.n = n - (n % 3);
        HostSpec host{HostKind::random_min_degree, spec.n, 0.45};
        auto result = embed_perturbed(spec, host, 0.5, cfg, 5000 + trial);
        if (!result.success) continue;
        ++successes;
        Graph allowed = graph_union(result.host, result.round_union);
        Embedding check(result.g.target, allowed, result.g.map);
        EXPECT_TRUE(is_embedding(check).valid);
    }
    EXPECT_GT(successes, 20);
}

TEST(Pipeline, ScheduleCouplingHoldsOnEveryRun) {
    PipelineConfig cfg;
    cfg.epsilon_op = 0.4;
    for (double p : {0.0, 0.2, 0.7, 1.0}) {
        TargetSpec spec = parse_target("factor:K3", 15);
        auto result = embed_perturbed(spec, HostSpec{HostKind::complete, 15, 1.0}, p, cfg, 1);
        if (p < 1.0) EXPECT_LE(result.schedule.exposure(), -std::log1p(-p) + 1e-9);
    }
}

TEST(Pipeline, DeterministicGivenSeed) {
    PipelineConfig cfg;
    cfg.epsilon_op = 0.4;
    TargetSpec spec = parse_target("factor:K3", 18);
    HostSpec host{HostKind::random_min_degree, 18, 0.4};
    auto a = embed_perturbed(spec, host, 0.4, cfg, 99);
    auto b = embed_perturbed(spec, host, 0.4, cfg, 99);
    EXPECT_EQ(a.success, b.success);
    if (a.success) EXPECT_EQ(a.g.map, b.g.map);
    auto c = embed_perturbed(spec, host, 0.4, cfg, 100);
    (void)c;  // different seed may differ; just has to run cleanly
}

TEST(Pipeline, PathFactorTarget) {
    PipelineConfig cfg;
    cfg.epsilon_op = 0.4;
    TargetSpec spec = parse_target("path-factor:k=2,m=8", 24);
    auto result = embed_perturbed(spec, HostSpec{HostKind::complete, 24, 1.0}, 0.0, cfg, 3);
    EXPECT_TRUE(result.success) << result.stage << ": " << result.reason;
}

TEST(Pipeline, EmptyHostPureModelRunsToo) {
    // Pure-model arm: empty host, everything from the rounds.
    PipelineConfig cfg;
    cfg.epsilon_op = 0.5;
    TargetSpec spec = parse_target("factor:K3", 9);
    auto result = embed_perturbed(spec, Graph(9), 1.0, cfg, 11);
    EXPECT_TRUE(result.success) << result.stage << ": " << result.reason;
}

TEST(Pipeline, SuccessRateMonotoneInP) {
    // Statistical monotonicity: rates over an increasing p-grid may wobble
    // within CI width but must not strictly decrease beyond it.
    SweepGrid grid;
    grid.ns = {9};
    grid.alphas = {0.35};
    grid.ps = {0.1, 0.4, 0.8, 1.0};
    grid.target = "factor:K3";
    grid.host = "random-min-degree";
    grid.trials = 30;
    PipelineConfig cfg;
    cfg.epsilon_op = 0.5;
    auto rows = sweep(grid, 2026, 2, cfg);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double ciw = std::max(rows[i - 1].ci_hi - rows[i - 1].ci_lo,
                              rows[i].ci_hi - rows[i].ci_lo);
        EXPECT_GE(rows[i].rate, rows[i - 1].rate - ciw)
            << "rate dropped beyond CI width between p=" << rows[i - 1].p << " and " << rows[i].p;
    }
}
