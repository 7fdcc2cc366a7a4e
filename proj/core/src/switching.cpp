#include "birg/switching.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace birg {

namespace {

constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

int degree_of(const GraphConfig& cfg, Color color) {
    return color == Color::black ? cfg.d_b : cfg.d_w;
}

int side_count(const GraphConfig& cfg, Color color) {
    return color == Color::black ? cfg.M : cfg.N;
}

Edge edge_by_id(const BiregularGraph& g, long long id) {
    const int d_b = g.config().d_b;
    const int b = static_cast<int>(id / d_b);
    return Edge{b, g.black_adj()[b][static_cast<int>(id % d_b)]};
}

bool edge_contains(const Edge& e, Color color, int v) {
    return color == Color::black ? e.b == v : e.w == v;
}

// Uniform edge id among edges avoiding v, by rejection over all edge ids.
long long uniform_edge_avoiding(const BiregularGraph& g, Color color, int v, Rng& rng) {
    const long long total = g.config().edges();
    for (;;) {
        const long long id = static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
        if (!edge_contains(edge_by_id(g, id), color, v)) return id;
    }
}

bool all_distinct(const std::array<int, 3>& t) {
    return t[0] != t[1] && t[0] != t[2] && t[1] != t[2];
}

// Vertex sets of a component, separated by side.
struct ComponentVertices {
    std::array<int, 3> blacks, whites;
};

ComponentVertices component_vertices(const SwitchProposal& s) {
    return {s.blacks(), s.whites()};
}

bool sides_share_only(const std::array<int, 3>& a, const std::array<int, 3>& b, int only) {
    for (int x : a)
        for (int y : b)
            if (x == y && x != only) return false;
    return true;
}

bool sides_disjoint(const std::array<int, 3>& a, const std::array<int, 3>& b) {
    return sides_share_only(a, b, std::numeric_limits<int>::min());
}

}  // namespace

SwitchProposal draw_configuration(const BiregularGraph& graph, Color color, int v, int mu,
                                  Rng& rng) {
    const auto& cfg = graph.config();
    if (v < 0 || v >= side_count(cfg, color)) throw std::invalid_argument("vertex out of range");
    const int degree = degree_of(cfg, color);
    if (mu < 0 || mu >= degree) throw std::invalid_argument("edge label out of range");
    if (cfg.edges() - degree < 2)
        throw DegenerateGraph("fewer than two edges avoid the chosen vertex");

    SwitchProposal s;
    s.color = color;
    s.v = v;
    s.mu = mu;
    if (color == Color::black)
        s.e = Edge{v, graph.black_adj()[v][mu]};
    else
        s.e = Edge{graph.white_adj()[v][mu], v};

    const long long pid = uniform_edge_avoiding(graph, color, v, rng);
    long long qid;
    do {
        qid = uniform_edge_avoiding(graph, color, v, rng);
    } while (qid == pid);
    s.p = edge_by_id(graph, pid);
    s.q = edge_by_id(graph, qid);
    return s;
}

std::vector<SwitchProposal> draw_full_configuration(const BiregularGraph& graph, Color color,
                                                    int v, Rng& rng) {
    const int degree = degree_of(graph.config(), color);
    std::vector<SwitchProposal> configuration;
    configuration.reserve(degree);
    for (int mu = 0; mu < degree; ++mu)
        configuration.push_back(draw_configuration(graph, color, v, mu, rng));
    return configuration;
}

bool indicator_I(const SwitchProposal& proposal) {
    return all_distinct(proposal.blacks()) && all_distinct(proposal.whites());
}

bool indicator_J(const std::vector<SwitchProposal>& configuration, int mu) {
    const auto& s = configuration.at(mu);
    const auto sv = component_vertices(s);
    for (int other = 0; other < static_cast<int>(configuration.size()); ++other) {
        if (other == mu) continue;
        const auto ov = component_vertices(configuration[other]);
        if (s.color == Color::black) {
            if (!sides_share_only(sv.blacks, ov.blacks, s.v)) return false;
            if (!sides_disjoint(sv.whites, ov.whites)) return false;
        } else {
            if (!sides_share_only(sv.whites, ov.whites, s.v)) return false;
            if (!sides_disjoint(sv.blacks, ov.blacks)) return false;
        }
    }
    return true;
}

bool indicator_h(const std::vector<SwitchProposal>& configuration, int mu) {
    const auto& s = configuration.at(mu);
    // Neighbor endpoint of e at v; it lives on the side opposite to v.
    const int neighbor = s.color == Color::black ? s.e.w : s.e.b;
    for (int other = 0; other < static_cast<int>(configuration.size()); ++other) {
        if (other == mu) continue;
        const auto ov = component_vertices(configuration[other]);
        const auto& opposite = s.color == Color::black ? ov.whites : ov.blacks;
        for (int x : opposite)
            if (x == neighbor) return false;
    }
    return true;
}

ActiveSet active_set(const std::vector<SwitchProposal>& configuration) {
    ActiveSet w;
    for (int mu = 0; mu < static_cast<int>(configuration.size()); ++mu)
        if (indicator_I(configuration[mu]) && indicator_J(configuration, mu))
            w.labels.push_back(mu);
    return w;
}

std::vector<Matching> replacement_matchings(const BiregularGraph& graph,
                                            const SwitchProposal& proposal) {
    if (!indicator_I(proposal))
        throw std::invalid_argument("replacement_matchings requires six distinct endpoints");
    const auto B = proposal.blacks();
    const auto W = proposal.whites();

    std::vector<Matching> out;
    for (const auto& perm : kPerms) {
        if (perm[0] == 0 && perm[1] == 1 && perm[2] == 2) continue;  // the current matching
        bool admissible = true;
        for (int i = 0; i < 3 && admissible; ++i)
            if (perm[i] != i && graph.has_edge(B[i], W[perm[i]])) admissible = false;
        if (!admissible) continue;
        out.push_back(Matching{Edge{B[0], W[perm[0]]}, Edge{B[1], W[perm[1]]}, Edge{B[2], W[perm[2]]}});
    }
    return out;
}

namespace {

std::vector<std::vector<int>> rows_of(const BiregularGraph& g) { return g.black_adj(); }

void remove_edge(std::vector<std::vector<int>>& rows, const Edge& e) {
    auto& row = rows[e.b];
    auto it = std::find(row.begin(), row.end(), e.w);
    if (it == row.end()) throw std::logic_error("removing a missing edge");
    row.erase(it);
}

void insert_edge(std::vector<std::vector<int>>& rows, const Edge& e) { rows[e.b].push_back(e.w); }

BiregularGraph rebuild(const GraphConfig& cfg, std::vector<std::vector<int>> rows) {
    for (auto& row : rows) std::sort(row.begin(), row.end());
    return BiregularGraph::from_adjacency_lists(cfg, std::move(rows));
}

}  // namespace

BiregularGraph apply_local_switching(const BiregularGraph& graph, const SwitchProposal& proposal,
                                     Rng& rng) {
    if (!indicator_I(proposal)) return graph;
    const auto replacements = replacement_matchings(graph, proposal);
    if (replacements.empty()) return graph;
    const auto& chosen = replacements[rng.below(replacements.size())];

    auto rows = rows_of(graph);
    remove_edge(rows, proposal.e);
    remove_edge(rows, proposal.p);
    remove_edge(rows, proposal.q);
    for (const auto& e : chosen) insert_edge(rows, e);
    return rebuild(graph.config(), rows);
}

BiregularGraph apply_global_switching(const BiregularGraph& graph, Color color, int v, Rng& rng) {
    const auto configuration = draw_full_configuration(graph, color, v, rng);
    const auto active = active_set(configuration);
    if (active.labels.empty()) return graph;

    auto rows = rows_of(graph);
    bool changed = false;
    for (int mu : active.labels) {
        const auto& s = configuration[mu];
        // Admissibility against the original graph: active components are
        // disjoint away from v, so their replacements cannot collide.
        const auto replacements = replacement_matchings(graph, s);
        if (replacements.empty()) continue;
        const auto& chosen = replacements[rng.below(replacements.size())];
        remove_edge(rows, s.e);
        remove_edge(rows, s.p);
        remove_edge(rows, s.q);
        for (const auto& e : chosen) insert_edge(rows, e);
        changed = true;
    }
    if (!changed) return graph;
    return rebuild(graph.config(), rows);
}

// ---------------------------------------------------------------------------
// Chain sampler. Mutable flat-array state so that a single move is O(1).

namespace {

struct ChainState {
    GraphConfig cfg;
    long long total;                // M * d_b edges; edge id = b * d_b + slot
    std::vector<std::int32_t> bw;     // edge id -> white endpoint
    std::vector<std::int32_t> bw_ws;  // edge id -> slot in the white list
    std::vector<std::int32_t> wb;     // white slot (w * d_w + t) -> black endpoint
    std::vector<std::int32_t> wb_e;   // white slot -> edge id
    std::vector<std::uint8_t> present;  // (b * N + w) membership

    explicit ChainState(const BiregularGraph& g) : cfg(g.config()), total(cfg.edges()) {
        if (static_cast<long long>(cfg.M) * cfg.N > (1ll << 28))
            throw TooLarge("chain membership table guard: M*N too large");
        bw.resize(total);
        bw_ws.resize(total);
        wb.resize(static_cast<std::size_t>(cfg.N) * cfg.d_w);
        wb_e.resize(wb.size());
        present.assign(static_cast<std::size_t>(cfg.M) * cfg.N, 0);
        std::vector<int> fill(cfg.N, 0);
        for (int b = 0; b < cfg.M; ++b)
            for (int s = 0; s < cfg.d_b; ++s) {
                const long long e = static_cast<long long>(b) * cfg.d_b + s;
                const int w = g.black_adj()[b][s];
                bw[e] = w;
                const int t = fill[w]++;
                bw_ws[e] = t;
                wb[static_cast<std::size_t>(w) * cfg.d_w + t] = b;
                wb_e[static_cast<std::size_t>(w) * cfg.d_w + t] = e;
                present[static_cast<std::size_t>(b) * cfg.N + w] = 1;
            }
    }

    bool has(int b, int w) const { return present[static_cast<std::size_t>(b) * cfg.N + w] != 0; }
    void set(int b, int w, bool on) {
        present[static_cast<std::size_t>(b) * cfg.N + w] = on ? 1 : 0;
    }

    // Rewires edge `e` to white endpoint `w` occupying white slot `t`.
    void attach(long long e, int w, int t) {
        const int b = static_cast<int>(e / cfg.d_b);
        bw[e] = w;
        bw_ws[e] = t;
        wb[static_cast<std::size_t>(w) * cfg.d_w + t] = b;
        wb_e[static_cast<std::size_t>(w) * cfg.d_w + t] = e;
        set(b, w, true);
    }

    void step(Rng& rng) {
        // One draw over all M+N vertices equals color-by-size then a uniform
        // vertex of that color.
        const int u = rng.below_int(cfg.M + cfg.N);
        const bool black = u < cfg.M;
        const int v = black ? u : u - cfg.M;
        const int mu = rng.below_int(black ? cfg.d_b : cfg.d_w);
        const bool swap_move = rng.bit();

        long long e_id;
        int e_b, e_w;
        if (black) {
            e_id = static_cast<long long>(v) * cfg.d_b + mu;
            e_b = v;
            e_w = bw[e_id];
        } else {
            const std::size_t slot = static_cast<std::size_t>(v) * cfg.d_w + mu;
            e_b = wb[slot];
            e_id = wb_e[slot];
            e_w = v;
        }

        if (swap_move) {
            if (total < 2) return;
            long long f;
            do {
                f = static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
            } while (f == e_id);
            const int f_b = static_cast<int>(f / cfg.d_b);
            const int f_w = bw[f];
            if (f_b == e_b || f_w == e_w) return;
            if (has(e_b, f_w) || has(f_b, e_w)) return;
            const int t_e = bw_ws[e_id], t_f = bw_ws[f];
            set(e_b, e_w, false);
            set(f_b, f_w, false);
            attach(e_id, f_w, t_f);
            attach(f, e_w, t_e);
            return;
        }

        // Three-edge switching, gated by the six-distinct-vertices indicator.
        const int degree = black ? cfg.d_b : cfg.d_w;
        if (total - degree < 2) return;
        auto draw_avoiding = [&]() {
            for (;;) {
                const long long id =
                    static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
                if (black ? (id / cfg.d_b != v) : (bw[id] != v)) return id;
            }
        };
        const long long p = draw_avoiding();
        long long q;
        do {
            q = draw_avoiding();
        } while (q == p);

        const std::array<long long, 3> ids{e_id, p, q};
        const std::array<int, 3> B{e_b, static_cast<int>(p / cfg.d_b), static_cast<int>(q / cfg.d_b)};
        const std::array<int, 3> W{e_w, bw[p], bw[q]};
        if (B[0] == B[1] || B[0] == B[2] || B[1] == B[2]) return;
        if (W[0] == W[1] || W[0] == W[2] || W[1] == W[2]) return;

        int admissible[5];
        int count = 0;
        for (int k = 1; k < 6; ++k) {
            const auto& perm = kPerms[k];
            bool ok = true;
            for (int i = 0; i < 3 && ok; ++i)
                if (perm[i] != i && has(B[i], W[perm[i]])) ok = false;
            if (ok) admissible[count++] = k;
        }
        if (count == 0) return;
        const auto& perm = kPerms[admissible[rng.below_int(count)]];

        const std::array<int, 3> t{bw_ws[ids[0]], bw_ws[ids[1]], bw_ws[ids[2]]};
        for (int i = 0; i < 3; ++i)
            if (perm[i] != i) set(B[i], W[i], false);
        for (int i = 0; i < 3; ++i)
            if (perm[i] != i) attach(ids[i], W[perm[i]], t[perm[i]]);
    }

    BiregularGraph graph() const {
        std::vector<std::vector<int>> rows(cfg.M);
        for (int b = 0; b < cfg.M; ++b) {
            rows[b].assign(bw.begin() + static_cast<long long>(b) * cfg.d_b,
                           bw.begin() + static_cast<long long>(b + 1) * cfg.d_b);
            std::sort(rows[b].begin(), rows[b].end());
        }
        return BiregularGraph::from_adjacency_lists(cfg, std::move(rows));
    }
};

}  // namespace

BiregularGraph run_chain(const GraphConfig& config, long long steps, Rng& rng) {
    if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
    ChainState state(seed_graph(config));
    for (long long i = 0; i < steps; ++i) state.step(rng);
    return state.graph();
}

UniformityReport uniformity_report(const GraphConfig& config, long long chain_steps,
                                   long long samples, std::uint64_t seed, int workers) {
    const auto oracle = enumerate_graphs(config);
    std::unordered_map<std::string, int> index;
    index.reserve(oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) index.emplace(graph_key(oracle[i]), i);

    const BiregularGraph seed_state = seed_graph(config);
    std::vector<long long> counts(oracle.size(), 0);
    workers = std::max(1, workers);
    std::vector<std::vector<long long>> local(workers, std::vector<long long>(oracle.size(), 0));

    auto run_block = [&](int worker, long long lo, long long hi) {
        for (long long s = lo; s < hi; ++s) {
            ChainState fresh(seed_state);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
            for (long long i = 0; i < chain_steps; ++i) fresh.step(rng);
            const auto it = index.find(graph_key(fresh.graph()));
            if (it == index.end()) throw std::logic_error("chain produced a graph outside the oracle set");
            ++local[worker][it->second];
        }
    };

    if (workers == 1) {
        run_block(0, 0, samples);
    } else {
        std::vector<std::thread> pool;
        const long long chunk = (samples + workers - 1) / workers;
        for (int t = 0; t < workers; ++t) {
            const long long lo = t * chunk, hi = std::min<long long>(samples, (t + 1) * chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_block, t, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (int t = 0; t < workers; ++t)
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += local[t][i];

    UniformityReport report;
    report.config = config;
    report.chain_steps = chain_steps;
    report.samples = samples;
    report.oracle_size = oracle.size();
    double tv = 0.0;
    for (long long c : counts)
        tv += std::abs(static_cast<double>(c) / samples - 1.0 / static_cast<double>(oracle.size()));
    report.tv_distance = 0.5 * tv;

    // Endpoint laws of (p, q) at the seed graph, v = black 0, mu = 0.
    const long long total = config.edges();
    if (total - config.d_b < 2) {
        report.tv_p_edges = std::numeric_limits<double>::quiet_NaN();
        report.tv_q_edges = std::numeric_limits<double>::quiet_NaN();
    } else {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(samples) + 1));
        std::vector<long long> p_counts(total, 0), q_counts(total, 0);
        auto edge_id_of = [&](const Edge& e) {
            const auto& row = seed_state.black_adj()[e.b];
            const auto it = std::lower_bound(row.begin(), row.end(), e.w);
            return static_cast<long long>(e.b) * config.d_b + (it - row.begin());
        };
        for (long long s = 0; s < samples; ++s) {
            const auto proposal = draw_configuration(seed_state, Color::black, 0, 0, rng);
            ++p_counts[edge_id_of(proposal.p)];
            ++q_counts[edge_id_of(proposal.q)];
        }
        auto tv_uniform = [&](const std::vector<long long>& c) {
            double d = 0.0;
            for (long long x : c)
                d += std::abs(static_cast<double>(x) / samples - 1.0 / static_cast<double>(total));
            return 0.5 * d;
        };
        report.tv_p_edges = tv_uniform(p_counts);
        report.tv_q_edges = tv_uniform(q_counts);
    }
    return report;
}

}  // namespace birg
