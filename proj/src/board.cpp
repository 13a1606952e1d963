#include "circuitrl/board.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace circuitrl {

std::string to_string(DedupPolicy p) {
    return p == DedupPolicy::Global ? "global" : "layer-local";
}
std::string to_string(CoeffMode m) {
    return m == CoeffMode::Modular ? "modular" : "integer";
}
std::string to_string(Layering l) {
    return l == Layering::GateCount ? "gate-count" : "pair-bfs";
}

namespace {

void validate(const BoardConfig& c) {
    if (c.max_complexity < 1) throw ConfigError("board max_complexity must be >= 1");
    if (c.node_cap < static_cast<std::size_t>(c.seed_count())) {
        throw ConfigError("board node_cap smaller than the seed set");
    }
    if (!is_prime(c.p)) throw ConfigError("board field modulus must be prime");
    if (c.n_vars < 1) throw ConfigError("board needs at least one variable");
    if (c.layering == Layering::GateCount && c.dedup == DedupPolicy::LayerLocal) {
        throw ConfigError("layer-local dedup applies to pair-bfs layering only");
    }
    if (c.sequence_limit < 1) throw ConfigError("board sequence_limit must be >= 1");
}

std::vector<Polynomial> seed_polys(const BoardConfig& c) {
    std::vector<Polynomial> seeds;
    std::int64_t m = c.effective_modulus();
    for (int i = 0; i < c.n_vars; ++i) seeds.push_back(Polynomial::variable(i, c.n_vars, m));
    if (c.include_constant_one) seeds.push_back(Polynomial::constant(1, c.n_vars, m));
    return seeds;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return std::min<std::uint64_t>(s < a ? kCircuitCountCap : s, kCircuitCountCap);
}

}  // namespace

const BoardNode& GameBoard::node(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw ReferenceError("board node id out of range: " + std::to_string(id));
    }
    return nodes_[id];
}

std::optional<int> GameBoard::find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int GameBoard::add_node(const Polynomial& poly, int depth) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(BoardNode{poly, depth, {}, {}, 1, 1});
    index_.emplace(poly.to_string(), id);
    return id;
}

GameBoard GameBoard::build(const BoardConfig& config) {
    validate(config);
    GameBoard board;
    board.config_ = config;
    if (config.layering == Layering::GateCount) {
        board.build_gate_count();
    } else {
        board.build_pair_bfs();
    }
    board.finalize_counts();
    return board;
}

void GameBoard::build_gate_count() {
    const BoardConfig& cfg = config_;
    const auto seeds = seed_polys(cfg);
    const int seed_count = static_cast<int>(seeds.size());
    for (const auto& s : seeds) add_node(s, 0);

    // A state is one partially built circuit: the board ids of its created
    // nodes in creation order plus the action list that created them. Two
    // states with the same node set behave identically from here on, so the
    // frontier is deduplicated on the sorted id set.
    struct State {
        std::vector<int> created;
        std::vector<Action> actions;
    };
    auto state_key = [](const std::vector<int>& created) {
        std::vector<int> s(created);
        std::sort(s.begin(), s.end());
        std::string key;
        for (int id : s) {
            key += std::to_string(id);
            key += ',';
        }
        return key;
    };
    // Circuit id of the state member at position `pos`: seeds first (the
    // constant-one gate always sits at index n_vars in a circuit even when it
    // is not a board seed), then created nodes.
    auto circuit_id = [&](int pos) {
        if (pos < cfg.n_vars) return pos;
        if (cfg.include_constant_one && pos == cfg.n_vars) return cfg.n_vars;
        return cfg.n_vars + 1 + (pos - seed_count);
    };

    std::vector<State> frontier{State{}};
    std::unordered_set<std::string> visited{state_key({})};
    bool capped = false;

    for (int depth = 0; depth < cfg.max_complexity && !capped && !frontier.empty(); ++depth) {
        std::vector<State> next;
        for (const State& st : frontier) {
            std::vector<int> members(seed_count + st.created.size());
            for (int i = 0; i < seed_count; ++i) members[i] = i;
            std::copy(st.created.begin(), st.created.end(), members.begin() + seed_count);
            const int total = static_cast<int>(members.size());
            for (int b = 0; b < total && !capped; ++b) {
                for (int a = 0; a <= b && !capped; ++a) {
                    for (OpKind op : {OpKind::Add, OpKind::Mul}) {
                        const Polynomial& fa = nodes_[members[a]].poly;
                        const Polynomial& fb = nodes_[members[b]].poly;
                        Polynomial r = op == OpKind::Add ? poly_add(fa, fb) : poly_mul(fa, fb);
                        std::string key = r.to_string();
                        auto found = index_.find(key);
                        int id;
                        if (found == index_.end()) {
                            if (nodes_.size() >= cfg.node_cap) {
                                capped = true;
                                break;
                            }
                            id = add_node(r, depth + 1);
                        } else {
                            id = found->second;
                            // Intra-sequence dedup: never recreate a member.
                            if (std::find(members.begin(), members.end(), id) != members.end()) {
                                continue;
                            }
                        }
                        Action act{op, circuit_id(a), circuit_id(b)};
                        BoardNode& nd = nodes_[id];
                        if (nd.min_depth == depth + 1) {
                            BoardDerivation deriv{op, members[a], members[b]};
                            if (std::find(nd.derivations.begin(), nd.derivations.end(), deriv) ==
                                nd.derivations.end()) {
                                nd.derivations.push_back(deriv);
                            }
                            if (static_cast<int>(nd.optimal_sequences.size()) < cfg.sequence_limit) {
                                std::vector<Action> seq = st.actions;
                                seq.push_back(act);
                                nd.optimal_sequences.push_back(std::move(seq));
                            }
                        }
                        if (depth + 1 < cfg.max_complexity) {
                            std::vector<int> created = st.created;
                            created.push_back(id);
                            std::string skey = state_key(created);
                            if (visited.insert(skey).second) {
                                std::vector<Action> actions = st.actions;
                                actions.push_back(act);
                                next.push_back(State{std::move(created), std::move(actions)});
                            }
                        }
                    }
                }
            }
            if (capped) break;
        }
        frontier = std::move(next);
    }
}

void GameBoard::build_pair_bfs() {
    const BoardConfig& cfg = config_;
    const auto seeds = seed_polys(cfg);
    for (const auto& s : seeds) add_node(s, 0);
    // Representatives: one node id per distinct polynomial, in creation
    // order. Layer-local duplicates share their representative's expansions.
    std::vector<int> reps(nodes_.size());
    for (std::size_t i = 0; i < reps.size(); ++i) reps[i] = static_cast<int>(i);

    bool capped = false;
    for (int layer = 1; layer <= cfg.max_complexity && !capped; ++layer) {
        const int rep_count = static_cast<int>(reps.size());
        std::unordered_map<std::string, int> layer_ids;  // key -> node id created this layer
        std::vector<int> new_reps;
        for (int b = 0; b < rep_count && !capped; ++b) {
            for (int a = 0; a <= b && !capped; ++a) {
                for (OpKind op : {OpKind::Add, OpKind::Mul}) {
                    const Polynomial& fa = nodes_[reps[a]].poly;
                    const Polynomial& fb = nodes_[reps[b]].poly;
                    Polynomial r = op == OpKind::Add ? poly_add(fa, fb) : poly_mul(fa, fb);
                    std::string key = r.to_string();
                    BoardDerivation deriv{op, reps[a], reps[b]};
                    auto prior = index_.find(key);
                    int id = -1;
                    if (cfg.dedup == DedupPolicy::Global) {
                        if (prior != index_.end()) {
                            // Known from an earlier layer (skip) or created in
                            // this one (extra minimal derivation).
                            if (nodes_[prior->second].min_depth == layer) id = prior->second;
                        } else {
                            if (nodes_.size() >= cfg.node_cap) {
                                capped = true;
                                break;
                            }
                            id = add_node(r, layer);
                            new_reps.push_back(id);
                        }
                    } else {
                        auto in_layer = layer_ids.find(key);
                        if (in_layer != layer_ids.end()) {
                            id = in_layer->second;
                        } else {
                            if (nodes_.size() >= cfg.node_cap) {
                                capped = true;
                                break;
                            }
                            id = static_cast<int>(nodes_.size());
                            nodes_.push_back(BoardNode{r, layer, {}, {}, 1, 1});
                            layer_ids.emplace(key, id);
                            if (prior == index_.end()) {
                                index_.emplace(key, id);
                                new_reps.push_back(id);
                            }
                        }
                    }
                    if (id >= 0) {
                        BoardNode& nd = nodes_[id];
                        if (std::find(nd.derivations.begin(), nd.derivations.end(), deriv) ==
                            nd.derivations.end()) {
                            nd.derivations.push_back(deriv);
                        }
                    }
                }
            }
        }
        if (new_reps.empty() && !capped) break;
        reps.insert(reps.end(), new_reps.begin(), new_reps.end());
    }
}

void GameBoard::finalize_counts() {
    std::set<std::pair<int, int>> edge_set;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        for (const BoardDerivation& d : nodes_[v].derivations) {
            edge_set.insert({d.left, static_cast<int>(v)});
            edge_set.insert({d.right, static_cast<int>(v)});
        }
    }
    edges_.assign(edge_set.begin(), edge_set.end());

    std::vector<std::vector<int>> in_edges(nodes_.size());
    for (const auto& [u, v] : edges_) in_edges[v].push_back(u);

    // Creation order is nondecreasing in depth and every derivation parent
    // sits at a strictly smaller depth, so a single forward pass settles both
    // shortest-path distances and path counts.
    std::vector<int> dist(nodes_.size(), 0);
    std::vector<std::uint64_t> opt(nodes_.size(), 1);
    std::vector<std::uint64_t> total(nodes_.size(), 1);
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        if (nodes_[v].min_depth == 0) continue;
        int best = -1;
        for (int u : in_edges[v]) best = best < 0 ? dist[u] + 1 : std::min(best, dist[u] + 1);
        dist[v] = best < 0 ? 0 : best;
        std::uint64_t o = 0;
        std::uint64_t t = 0;
        for (int u : in_edges[v]) {
            if (dist[u] + 1 == dist[v]) o = saturating_add(o, opt[u]);
            t = saturating_add(t, total[u]);
        }
        opt[v] = std::max<std::uint64_t>(o, 1);
        total[v] = std::max<std::uint64_t>(t, 1);
        nodes_[v].optimal_circuit_count = opt[v];
        nodes_[v].total_circuit_count = total[v];
    }
}

std::map<int, std::size_t> GameBoard::depth_histogram() const {
    std::map<int, std::size_t> hist;
    for (const BoardNode& n : nodes_) ++hist[n.min_depth];
    return hist;
}

std::uint64_t GameBoard::count_optimal_circuits(int id) const {
    return node(id).optimal_circuit_count;
}

BoardStats GameBoard::stats() const {
    BoardStats s;
    s.node_count = nodes_.size();
    s.edge_count = edges_.size();
    s.depth_histogram = depth_histogram();
    for (const BoardNode& n : nodes_) {
        if (n.min_depth == 0) ++s.root_count;
        if (n.optimal_circuit_count > 1) ++s.multi_optimal_count;
        s.max_optimal_count = std::max(s.max_optimal_count, n.optimal_circuit_count);
        s.max_total_count = std::max(s.max_total_count, n.total_circuit_count);
    }
    if (s.node_count > 0) {
        s.multi_optimal_pct = 100.0 * static_cast<double>(s.multi_optimal_count) /
                              static_cast<double>(s.node_count);
    }
    return s;
}

std::vector<int> GameBoard::nodes_at_depth(int depth) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].min_depth == depth) out.push_back(static_cast<int>(i));
    }
    return out;
}

int GameBoard::sample_interesting(int complexity, std::mt19937_64& rng, bool allow_single) const {
    std::vector<int> candidates;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const BoardNode& n = nodes_[i];
        if (n.min_depth != complexity) continue;
        if (!allow_single && n.optimal_circuit_count <= 1) continue;
        candidates.push_back(static_cast<int>(i));
    }
    if (candidates.empty()) {
        throw SamplingError("no " + std::string(allow_single ? "" : "interesting ") +
                            "board nodes at complexity " + std::to_string(complexity));
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

std::vector<std::vector<Action>> GameBoard::extract_optimal_action_sequences(int id,
                                                                             int limit) const {
    const BoardNode& nd = node(id);
    if (limit < 1) throw DomainError("sequence limit must be >= 1");
    if (nd.min_depth == 0) return {std::vector<Action>{}};
    if (config_.layering == Layering::GateCount) {
        std::vector<std::vector<Action>> out(
            nd.optimal_sequences.begin(),
            nd.optimal_sequences.begin() +
                std::min<std::size_t>(nd.optimal_sequences.size(), limit));
        return out;
    }
    // Pair-BFS boards carry no stored sequences; backtrack derivations. The
    // result replays to the node's polynomial but may use more than
    // min_depth gates when parents do not share subcircuits.
    std::vector<std::vector<Action>> out;
    const int variants = std::min<int>(limit, static_cast<int>(nd.derivations.size()));
    for (int variant = 0; variant < variants; ++variant) {
        std::vector<Action> seq;
        std::unordered_map<int, int> built;  // board id -> circuit id
        for (int i = 0; i < config_.n_vars; ++i) built[i] = i;
        if (config_.include_constant_one) built[config_.n_vars] = config_.n_vars;
        int next_circuit_id = config_.n_vars + 1;
        auto emit = [&](auto&& self, int board_id, int deriv_choice) -> int {
            auto it = built.find(board_id);
            if (it != built.end()) return it->second;
            const BoardNode& n = nodes_[board_id];
            const BoardDerivation& d =
                n.derivations[std::min<std::size_t>(deriv_choice, n.derivations.size() - 1)];
            int l = self(self, d.left, 0);
            int r = self(self, d.right, 0);
            seq.push_back(Action{d.op, std::min(l, r), std::max(l, r)});
            built[board_id] = next_circuit_id;
            return next_circuit_id++;
        };
        emit(emit, id, variant);
        if (std::find(out.begin(), out.end(), seq) == out.end()) out.push_back(std::move(seq));
    }
    return out;
}

void GameBoard::save(std::ostream& os) const {
    const BoardConfig& c = config_;
    os << "circuitrl-board v1\n";
    os << "n_vars " << c.n_vars << "\n";
    os << "p " << c.p << "\n";
    os << "max_complexity " << c.max_complexity << "\n";
    os << "node_cap " << c.node_cap << "\n";
    os << "dedup " << to_string(c.dedup) << "\n";
    os << "layering " << to_string(c.layering) << "\n";
    os << "coeff_mode " << to_string(c.coeff_mode) << "\n";
    os << "include_one " << (c.include_constant_one ? 1 : 0) << "\n";
    os << "sequence_limit " << c.sequence_limit << "\n";
    os << "nodes " << nodes_.size() << "\n";
    os << "edges " << edges_.size() << "\n";
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const BoardNode& n = nodes_[i];
        os << "node|" << i << "|" << n.min_depth << "|" << n.optimal_circuit_count << "|"
           << n.total_circuit_count << "|" << n.poly.to_string() << "|";
        for (std::size_t d = 0; d < n.derivations.size(); ++d) {
            if (d) os << ";";
            os << static_cast<int>(n.derivations[d].op) << "," << n.derivations[d].left << ","
               << n.derivations[d].right;
        }
        os << "|";
        for (std::size_t s = 0; s < n.optimal_sequences.size(); ++s) {
            if (s) os << ";";
            for (std::size_t a = 0; a < n.optimal_sequences[s].size(); ++a) {
                if (a) os << ",";
                const Action& act = n.optimal_sequences[s][a];
                os << static_cast<int>(act.op) << "," << act.left << "," << act.right;
            }
        }
        os << "\n";
    }
    for (const auto& [u, v] : edges_) os << "edge|" << u << "|" << v << "\n";
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

GameBoard GameBoard::load(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "circuitrl-board v1") {
        throw DataError("unrecognized board file header");
    }
    GameBoard board;
    BoardConfig& c = board.config_;
    std::size_t node_count = 0, edge_count = 0;
    auto read_kv = [&](const std::string& key) {
        std::string got_key, value;
        if (!std::getline(is, line)) throw DataError("truncated board header");
        std::istringstream ls(line);
        ls >> got_key >> value;
        if (got_key != key) throw DataError("expected board key '" + key + "', got '" + got_key + "'");
        return value;
    };
    c.n_vars = std::stoi(read_kv("n_vars"));
    c.p = std::stoll(read_kv("p"));
    c.max_complexity = std::stoi(read_kv("max_complexity"));
    c.node_cap = std::stoull(read_kv("node_cap"));
    std::string dedup = read_kv("dedup");
    c.dedup = dedup == "global" ? DedupPolicy::Global : DedupPolicy::LayerLocal;
    std::string layering = read_kv("layering");
    c.layering = layering == "gate-count" ? Layering::GateCount : Layering::PairBfs;
    std::string coeff = read_kv("coeff_mode");
    c.coeff_mode = coeff == "modular" ? CoeffMode::Modular : CoeffMode::Integer;
    c.include_constant_one = read_kv("include_one") == "1";
    c.sequence_limit = std::stoi(read_kv("sequence_limit"));
    node_count = std::stoull(read_kv("nodes"));
    edge_count = std::stoull(read_kv("edges"));

    const std::int64_t m = c.effective_modulus();
    for (std::size_t i = 0; i < node_count; ++i) {
        if (!std::getline(is, line)) throw DataError("truncated board node section");
        auto fields = split(line, '|');
        if (fields.size() != 8 || fields[0] != "node") throw DataError("bad board node line");
        BoardNode n{Polynomial::parse(fields[5], c.n_vars, m),
                    std::stoi(fields[2]),
                    {},
                    {},
                    std::stoull(fields[3]),
                    std::stoull(fields[4])};
        if (!fields[6].empty()) {
            for (const std::string& d : split(fields[6], ';')) {
                auto parts = split(d, ',');
                if (parts.size() != 3) throw DataError("bad board derivation");
                n.derivations.push_back(BoardDerivation{static_cast<OpKind>(std::stoi(parts[0])),
                                                        std::stoi(parts[1]), std::stoi(parts[2])});
            }
        }
        if (!fields[7].empty()) {
            for (const std::string& seq_text : split(fields[7], ';')) {
                auto parts = split(seq_text, ',');
                if (parts.size() % 3 != 0) throw DataError("bad board sequence");
                std::vector<Action> seq;
                for (std::size_t k = 0; k + 2 < parts.size(); k += 3) {
                    seq.push_back(Action{static_cast<OpKind>(std::stoi(parts[k])),
                                         std::stoi(parts[k + 1]), std::stoi(parts[k + 2])});
                }
                n.optimal_sequences.push_back(std::move(seq));
            }
        }
        std::string key = n.poly.to_string();
        if (!board.index_.contains(key)) board.index_.emplace(key, static_cast<int>(i));
        board.nodes_.push_back(std::move(n));
    }
    for (std::size_t i = 0; i < edge_count; ++i) {
        if (!std::getline(is, line)) throw DataError("truncated board edge section");
        auto fields = split(line, '|');
        if (fields.size() != 3 || fields[0] != "edge") throw DataError("bad board edge line");
        board.edges_.push_back({std::stoi(fields[1]), std::stoi(fields[2])});
    }
    return board;
}

std::optional<std::pair<int, std::vector<Action>>> brute_force_min_complexity(
    const Polynomial& target, int n_vars, std::int64_t p, int max_complexity) {
    Circuit base(n_vars, p);
    for (int i = 0; i < base.size(); ++i) {
        if (base.poly(i) == target) return std::make_pair(0, std::vector<Action>{});
    }
    for (int limit = 1; limit <= max_complexity; ++limit) {
        std::vector<Action> actions;
        // Depth-first over sequences of exactly `limit` gates, canonical
        // operand order, skipping gates that duplicate an existing node.
        auto dfs = [&](auto&& self, Circuit& cur, int depth) -> bool {
            int total = cur.size();
            for (int b = 0; b < total; ++b) {
                for (int a = 0; a <= b; ++a) {
                    for (OpKind op : {OpKind::Add, OpKind::Mul}) {
                        const Polynomial r = op == OpKind::Add ? poly_add(cur.poly(a), cur.poly(b))
                                                               : poly_mul(cur.poly(a), cur.poly(b));
                        bool duplicate = false;
                        for (int i = 0; i < total && !duplicate; ++i) duplicate = cur.poly(i) == r;
                        if (duplicate) continue;
                        actions.push_back(Action{op, a, b});
                        if (r == target) return true;
                        if (depth + 1 < limit) {
                            Circuit ext = cur;
                            ext.append_gate(op, a, b);
                            if (self(self, ext, depth + 1)) return true;
                        }
                        actions.pop_back();
                    }
                }
            }
            return false;
        };
        Circuit root(n_vars, p);
        if (dfs(dfs, root, 0)) return std::make_pair(limit, actions);
    }
    return std::nullopt;
}

}  // namespace circuitrl
