// Command-line front end: graph generation, single pipeline runs, embedding
// verification, decompositions, density reports, tail bounds, Monte Carlo
// sweeps and model comparisons.
//
// Primary outputs (CSV/JSON/edge lists) are byte-identical across reruns with
// the same flags and PERTURB_SEED.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "perturb/decomposition.hpp"
#include "perturb/embedder.hpp"
#include "perturb/harness.hpp"

namespace {

using namespace perturb;

std::uint64_t master_seed_default() {
    if (const char* env = std::getenv("PERTURB_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    return file;
}

Graph host_from_cli(const std::string& host, int n, double alpha, std::uint64_t seed) {
    if (host.rfind("file:", 0) == 0) {
        Graph g = read_edge_list_file(host.substr(5));
        if (g.n() != n) throw std::invalid_argument("host file has " + std::to_string(g.n()) +
                                                    " vertices, expected " + std::to_string(n));
        return g;
    }
    return detail::build_host_graph(host, n, alpha, seed);
}

PipelineConfig config_from_cli(const std::string& config_path, std::optional<double> eps,
                               std::optional<int> m, std::optional<int> ell) {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (eps) cfg.epsilon_op = *eps;
    if (m) cfg.m = *m;
    if (ell) cfg.ell = *ell;
    return cfg;
}

int cmd_gen(const std::string& kind_gnp_or_empty, double gnp_p, const std::string& host,
            const std::string& target, int n, double alpha, std::uint64_t seed,
            const std::string& out_path) {
    Graph g;
    if (!kind_gnp_or_empty.empty()) {
        g = gnp_sample(n, gnp_p, seed);
    } else if (!host.empty()) {
        g = host_from_cli(host, n, alpha, seed);
    } else if (!target.empty()) {
        g = realize(parse_target(target, n));
    } else {
        throw std::invalid_argument("gen: pass one of --gnp, --host, --target");
    }
    std::ofstream file;
    write_edge_list(open_out(file, out_path), g);
    return 0;
}

int cmd_embed(const std::string& target, const std::string& host, int n, double alpha, double p,
              std::uint64_t seed, const PipelineConfig& cfg, const std::string& plan_path) {
    TargetSpec spec = parse_target(target, n);
    Graph host_graph = host_from_cli(host, spec.n, alpha, derive_seed(seed, 0xa1fa));
    PipelineResult result = embed_perturbed(spec, host_graph, p, cfg, seed);
    if (!result.success) {
        std::cerr << result.stage << ": " << result.reason << "\n";
        return 2;
    }
    if (!plan_path.empty()) {
        std::ofstream file(plan_path);
        if (!file) throw std::runtime_error("cannot open " + plan_path);
        file << to_json(result.plan).dump(2) << "\n";
    }
    std::cout << "success\n";
    for (int v = 0; v < result.g.target.n(); ++v)
        std::cout << v << " " << result.g.at(v) << "\n";
    return 0;
}

int cmd_verify(const std::string& target_path, const std::string& host_path,
               const std::string& map_path) {
    Graph target = read_edge_list_file(target_path);
    Graph host = read_edge_list_file(host_path);
    std::ifstream in(map_path);
    if (!in) throw std::runtime_error("cannot open map file " + map_path);
    std::vector<int> map(static_cast<std::size_t>(target.n()), -1);
    long long tv, hv;
    while (in >> tv >> hv) {
        if (tv < 0 || tv >= target.n()) throw std::invalid_argument("map: target vertex out of range");
        map[static_cast<std::size_t>(tv)] = static_cast<int>(hv);
    }
    auto check = is_embedding(Embedding(std::move(target), std::move(host), std::move(map)));
    if (!check.valid) {
        std::cerr << "invalid: " << check.reason << "\n";
        return 2;
    }
    std::cout << "valid\n";
    return 0;
}

int cmd_decompose(const std::string& target, const std::string& in_path, int n, int delta,
                  double epsilon, const std::string& out_path) {
    Graph f = in_path.empty() ? realize(parse_target(target, n)) : read_edge_list_file(in_path);
    if (delta <= 0) delta = max_degree(f);
    Decomposition dec = decompose(f, delta, epsilon);
    std::ofstream file;
    open_out(file, out_path) << to_json(dec).dump(2) << "\n";
    return 0;
}

int cmd_density(const std::string& in_path, const std::string& target, int n, int max_enum) {
    Graph h = in_path.empty() ? realize(parse_target(target, n)) : read_edge_list_file(in_path);
    auto rep = density_report(h, max_enum);
    nlohmann::ordered_json j;
    j["m1"] = {{"num", rep.m1.num}, {"den", rep.m1.den}, {"value", rep.m1.value()}};
    if (rep.gamma)
        j["gamma"] = {{"num", rep.gamma->num}, {"den", rep.gamma->den}, {"value", rep.gamma->value()}};
    else
        j["gamma"] = nullptr;
    j["m1_witness"] = rep.m1_witness;
    j["gamma_witness"] = rep.gamma_witness;
    j["strictly_balanced"] = rep.strictly_balanced;
    j["bounded"] = rep.bounded;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_janson(double p, double gamma, int triangles_n, const std::vector<std::string>& files) {
    std::vector<Graph> family;
    if (triangles_n > 0) {
        for (int a = 0; a < triangles_n; ++a)
            for (int b = a + 1; b < triangles_n; ++b)
                for (int c = b + 1; c < triangles_n; ++c)
                    family.push_back(Graph(triangles_n, {{a, b}, {a, c}, {b, c}}));
    }
    for (auto& f : files) family.push_back(read_edge_list_file(f));
    if (family.empty()) throw std::invalid_argument("janson: no family given");
    auto rep = janson_report(family, p, gamma);
    nlohmann::ordered_json j;
    j["family_size"] = family.size();
    j["mu"] = rep.mu;
    j["delta"] = rep.delta;
    j["gamma"] = rep.gamma;
    j["bound"] = rep.bound;
    std::cout << j.dump(2) << "\n";
    return 0;
}

void emit_rows(const std::vector<SweepRow>& rows, const std::string& out_path) {
    std::ofstream file;
    write_csv(open_out(file, out_path), rows);
    if (!out_path.empty() && out_path != "-") {
        std::string svg_path = out_path;
        auto dot = svg_path.rfind('.');
        svg_path = (dot == std::string::npos ? svg_path : svg_path.substr(0, dot)) + ".svg";
        std::ofstream svg(svg_path);
        if (svg) write_svg(svg, rows);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomly perturbed graph embedding toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = master_seed_default();
    std::string target, host = "complete", out_path, config_path, in_path, plan_path;
    std::string map_path, host_path;
    int n = 0, delta = 0, max_enum = 22, trials = 100, workers = 1, triangles_n = 0;
    double alpha = 0.3, p = 0.0, gnp_p = -1.0, gamma = 0.5, epsilon = 0.1;
    std::optional<double> eps_opt;
    std::optional<int> m_opt, ell_opt;
    std::vector<int> ns;
    std::vector<double> alphas, ps;
    std::vector<std::string> family_files;

    auto* gen = app.add_subcommand("gen", "generate a graph as an edge list");
    gen->add_option("--n", n, "vertex count")->required();
    gen->add_option("--gnp", gnp_p, "G(n,p) edge probability");
    gen->add_option("--host", host, "host kind")->default_val("");
    gen->add_option("--target", target, "target spec to realize")->default_val("");
    gen->add_option("--alpha", alpha, "minimum-degree fraction");
    gen->add_option("--seed", seed, "seed (default PERTURB_SEED)");
    gen->add_option("--out", out_path, "output path (default stdout)");

    auto* embed = app.add_subcommand("embed", "run the embedding pipeline once");
    embed->add_option("--target", target, "target spec")->required();
    embed->add_option("--host", host, "host kind or file:<path>");
    embed->add_option("--n", n, "vertex count")->required();
    embed->add_option("--alpha", alpha, "minimum-degree fraction");
    embed->add_option("--p", p, "edge probability")->required();
    embed->add_option("--seed", seed, "seed (default PERTURB_SEED)");
    embed->add_option("--config", config_path, "key = value config file");
    embed->add_option("--epsilon", eps_opt, "operational epsilon");
    embed->add_option("--m", m_opt, "path block length");
    embed->add_option("--l", ell_opt, "connector length");
    embed->add_option("--emit-switch-plan", plan_path, "write the switch plan JSON here");

    auto* verify = app.add_subcommand("verify", "check a vertex map between edge lists");
    verify->add_option("--target", in_path, "target edge list")->required();
    verify->add_option("--host", host_path, "host edge list")->required();
    verify->add_option("--map", map_path, "map file with 'target host' lines")->required();

    auto* dec = app.add_subcommand("decompose", "decompose a bounded-degree graph");
    dec->add_option("--target", target, "target spec");
    dec->add_option("--in", in_path, "edge-list input instead of a spec");
    dec->add_option("--n", n, "vertex count (with --target)");
    dec->add_option("--delta", delta, "degree bound (default: max degree)");
    dec->add_option("--epsilon", epsilon, "class budget fraction");
    dec->add_option("--out", out_path, "output path (default stdout)");

    auto* den = app.add_subcommand("density", "1-density and gamma of a graph");
    den->add_option("--in", in_path, "edge-list input");
    den->add_option("--target", target, "target spec instead of a file");
    den->add_option("--n", n, "vertex count (with --target)");
    den->add_option("--max-enum", max_enum, "exact enumeration cap");

    auto* jan = app.add_subcommand("janson", "lower-tail bound for a subgraph family");
    jan->add_option("--p", p, "edge probability")->required();
    jan->add_option("--gamma", gamma, "tail parameter")->required();
    jan->add_option("--triangles", triangles_n, "use all triangles of K_n");
    jan->add_option("--files", family_files, "edge-list files forming the family");

    auto* sw = app.add_subcommand("sweep", "Monte Carlo success-rate sweep");
    sw->add_option("--target", target, "target spec")->required();
    sw->add_option("--host", host, "host kind");
    sw->add_option("--n", ns, "vertex counts")->required();
    sw->add_option("--alpha", alphas, "minimum-degree fractions")->required();
    sw->add_option("--p", ps, "edge probabilities")->required();
    sw->add_option("--trials", trials, "trials per cell");
    sw->add_option("--seed", seed, "master seed (default PERTURB_SEED)");
    sw->add_option("--workers", workers, "worker threads");
    sw->add_option("--config", config_path, "key = value config file");
    sw->add_option("--epsilon", eps_opt, "operational epsilon");
    sw->add_option("--out", out_path, "CSV output path (default stdout)");

    auto* cmp = app.add_subcommand("compare", "perturbed vs pure model, common random numbers");
    cmp->add_option("--target", target, "target spec")->required();
    cmp->add_option("--host", host, "host kind for the perturbed arm");
    cmp->add_option("--n", n, "vertex count")->required();
    cmp->add_option("--alpha", alpha, "minimum-degree fraction");
    cmp->add_option("--p", ps, "edge probabilities")->required();
    cmp->add_option("--trials", trials, "trials per point");
    cmp->add_option("--seed", seed, "master seed (default PERTURB_SEED)");
    cmp->add_option("--workers", workers, "worker threads");
    cmp->add_option("--config", config_path, "key = value config file");
    cmp->add_option("--epsilon", eps_opt, "operational epsilon");
    cmp->add_option("--out", out_path, "CSV output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gnp_p >= 0 ? "gnp" : "", gnp_p, host, target, n, alpha, seed, out_path);
        if (embed->parsed())
            return cmd_embed(target, host, n, alpha, p, seed,
                             config_from_cli(config_path, eps_opt, m_opt, ell_opt), plan_path);
        if (verify->parsed()) return cmd_verify(in_path, host_path, map_path);
        if (dec->parsed()) return cmd_decompose(target, in_path, n, delta, epsilon, out_path);
        if (den->parsed()) return cmd_density(in_path, target, n, max_enum);
        if (jan->parsed()) return cmd_janson(p, gamma, triangles_n, family_files);
        if (sw->parsed()) {
            SweepGrid grid;
            grid.ns = ns;
            grid.alphas = alphas;
            grid.ps = ps;
            grid.target = target;
            grid.host = host;
            grid.trials = trials;
            auto rows = sweep(grid, seed, workers,
                              config_from_cli(config_path, eps_opt, m_opt, ell_opt));
            emit_rows(rows, out_path);
            return 0;
        }
        if (cmp->parsed()) {
            auto pairs = compare_models(n, alpha, ps, target, host, trials, seed, workers,
                                        config_from_cli(config_path, eps_opt, m_opt, ell_opt));
            std::vector<SweepRow> rows;
            for (auto& pr : pairs) {
                rows.push_back(pr.perturbed);
                rows.push_back(pr.pure);
            }
            emit_rows(rows, out_path);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
