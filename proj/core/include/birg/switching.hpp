#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "birg/graph.hpp"
#include "birg/rng.hpp"

namespace birg {

enum class Color { black, white };

struct Edge {
    int b = -1;
    int w = -1;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// One rewiring candidate: the mu-th edge e at vertex v plus an ordered pair
// (p, q) of distinct edges avoiding v.
struct SwitchProposal {
    Color color = Color::black;
    int v = -1;
    int mu = -1;
    Edge e, p, q;

    // The three black and three white endpoints, in (e, p, q) order.
    std::array<int, 3> blacks() const { return {e.b, p.b, q.b}; }
    std::array<int, 3> whites() const { return {e.w, p.w, q.w}; }
};

struct ActiveSet {
    std::vector<int> labels;  // subset of [0, degree)
};

// Uniform ordered pair (p, q) of distinct edges not containing v.
// Throws DegenerateGraph when fewer than two such edges exist.
SwitchProposal draw_configuration(const BiregularGraph& graph, Color color, int v, int mu,
                                  Rng& rng);

// Full configuration vector: one independent proposal per edge label at v.
std::vector<SwitchProposal> draw_full_configuration(const BiregularGraph& graph, Color color,
                                                    int v, Rng& rng);

// 1 iff the three edges e, p, q span six distinct vertices.
bool indicator_I(const SwitchProposal& proposal);

// 1 iff component mu meets every other component exactly in {v}.
bool indicator_J(const std::vector<SwitchProposal>& configuration, int mu);

// 1 iff the neighbor v_mu avoids the vertex set of every other component.
// Diagnostic companion of indicator_J; the rare h = 0 event is what makes
// J fail almost surely.
bool indicator_h(const std::vector<SwitchProposal>& configuration, int mu);

ActiveSet active_set(const std::vector<SwitchProposal>& configuration);

// A replacement matching pairs the three black endpoints with the three
// white endpoints of a proposal; edges listed in blacks() order.
using Matching = std::array<Edge, 3>;

// All perfect matchings on the six endpoints other than {e, p, q} itself
// whose insertion keeps the graph simple. May be empty.
std::vector<Matching> replacement_matchings(const BiregularGraph& graph,
                                            const SwitchProposal& proposal);

// The three-edge rewiring: identity when the proposal collapses (I = 0) or
// no replacement is admissible, otherwise {e,p,q} -> uniform replacement.
BiregularGraph apply_local_switching(const BiregularGraph& graph, const SwitchProposal& proposal,
                                     Rng& rng);

// Composite across all labels at v restricted to the active set; the active
// components are pairwise disjoint away from v, so composition order is
// immaterial.
BiregularGraph apply_global_switching(const BiregularGraph& graph, Color color, int v, Rng& rng);

// Degree-preserving Markov chain sampler over the set of biregular graphs
// with the given configuration. Starts from seed_graph and alternates (by
// fair coin) between three-edge local switchings and classic double edge
// swaps; both move kernels are symmetric, so the uniform distribution is
// stationary, and the swap component keeps the chain irreducible on graphs
// too small for three disjoint edges. Deterministic given (config, steps,
// rng state).
BiregularGraph run_chain(const GraphConfig& config, long long steps, Rng& rng);

struct UniformityReport {
    GraphConfig config;
    long long chain_steps = 0;
    long long samples = 0;
    double tv_distance = 0.0;    // empirical chain law vs uniform on the oracle set
    std::size_t oracle_size = 0;
    // Empirical law of the p / q endpoints of drawn proposals at the seed
    // graph (v = black 0, mu = 0) against uniform over all edges. NaN when
    // proposals are degenerate.
    double tv_p_edges = 0.0;
    double tv_q_edges = 0.0;
};

// Runs `samples` independent chains of `chain_steps` moves each (stream
// seeds derived from rng) and measures total variation against the
// enumeration oracle. Throws TooLarge if the oracle guard trips.
UniformityReport uniformity_report(const GraphConfig& config, long long chain_steps,
                                   long long samples, std::uint64_t seed, int workers = 1);

}  // namespace birg
