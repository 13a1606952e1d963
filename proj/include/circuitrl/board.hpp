#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circuitrl/circuit.hpp"

namespace circuitrl {

enum class DedupPolicy { Global, LayerLocal };
enum class CoeffMode { Modular, Integer };

// GateCount enumerates action sequences, so a node's layer is the true
// minimal number of gates needed to compute it and every stored optimal
// sequence replays to the node with exactly that many gates. PairBfs is the
// layered pair-combination scheme behind the published board tables; there a
// node's layer is only a lower bound on its circuit complexity.
enum class Layering { GateCount, PairBfs };

struct BoardConfig {
    int n_vars = 2;
    std::int64_t p = 5;
    int max_complexity = 3;
    std::size_t node_cap = 20000;
    DedupPolicy dedup = DedupPolicy::Global;
    Layering layering = Layering::GateCount;
    CoeffMode coeff_mode = CoeffMode::Modular;
    bool include_constant_one = true;
    int sequence_limit = 8;  // optimal action sequences retained per node

    int seed_count() const { return n_vars + (include_constant_one ? 1 : 0); }
    std::int64_t effective_modulus() const { return coeff_mode == CoeffMode::Modular ? p : 0; }
};

// A derivation references board node ids of the two parents.
struct BoardDerivation {
    OpKind op;
    int left;
    int right;
    friend auto operator<=>(const BoardDerivation&, const BoardDerivation&) = default;
};

struct BoardNode {
    Polynomial poly;
    int min_depth = 0;
    std::vector<BoardDerivation> derivations;
    // Minimal action sequences in circuit-id space (GateCount boards only).
    std::vector<std::vector<Action>> optimal_sequences;
    std::uint64_t optimal_circuit_count = 1;  // shortest root-to-node paths in the edge DAG
    std::uint64_t total_circuit_count = 1;    // all root-to-node paths, saturating
};

struct BoardStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t root_count = 0;
    std::size_t multi_optimal_count = 0;
    double multi_optimal_pct = 0.0;
    std::uint64_t max_optimal_count = 0;
    std::uint64_t max_total_count = 0;
    std::map<int, std::size_t> depth_histogram;
};

constexpr std::uint64_t kCircuitCountCap = 0xffffffffULL;

class GameBoard {
  public:
    static GameBoard build(const BoardConfig& config);

    const BoardConfig& config() const { return config_; }
    std::size_t size() const { return nodes_.size(); }
    const BoardNode& node(int id) const;
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Id of the node holding this canonical polynomial string (first
    // occurrence under layer-local dedup).
    std::optional<int> find(const std::string& canonical_key) const;

    std::map<int, std::size_t> depth_histogram() const;
    BoardStats stats() const;
    std::uint64_t count_optimal_circuits(int id) const;

    std::vector<int> nodes_at_depth(int depth) const;

    // Uniform over nodes at min_depth == complexity with more than one
    // optimal circuit; with allow_single, over all non-seed nodes at that
    // depth. Throws SamplingError when the candidate set is empty.
    int sample_interesting(int complexity, std::mt19937_64& rng, bool allow_single = false) const;

    std::vector<std::vector<Action>> extract_optimal_action_sequences(int id, int limit) const;

    void save(std::ostream& os) const;
    static GameBoard load(std::istream& is);

  private:
    GameBoard() = default;
    void build_gate_count();
    void build_pair_bfs();
    void finalize_counts();
    int add_node(const Polynomial& poly, int depth);

    BoardConfig config_;
    std::vector<BoardNode> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::unordered_map<std::string, int> index_;
};

// Independent oracle: iterative-deepening search over gate sequences with
// canonical operand ordering and intra-sequence polynomial dedup. Returns the
// minimal gate count and one witness sequence, or nullopt if the target is
// not reachable within max_complexity gates.
std::optional<std::pair<int, std::vector<Action>>> brute_force_min_complexity(
    const Polynomial& target, int n_vars, std::int64_t p, int max_complexity);

std::string to_string(DedupPolicy p);
std::string to_string(CoeffMode m);
std::string to_string(Layering l);

}  // namespace circuitrl
