#include "circuitrl/circuit.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace circuitrl {

Circuit::Circuit(int n_vars, std::int64_t p) : n_vars_(n_vars), p_(p) {
    if (n_vars < 1) throw ConfigError("circuit needs at least one variable");
    if (!is_prime(p)) throw ConfigError("circuit modulus must be prime");
    gates_.reserve(n_vars + 1);
    for (int i = 0; i < n_vars; ++i) {
        gates_.push_back({Gate::Kind::Variable, i});
        polys_.push_back(Polynomial::variable(i, n_vars, p));
    }
    gates_.push_back({Gate::Kind::One});
    polys_.push_back(Polynomial::constant(1, n_vars, p));
}

void Circuit::check_id(int id) const {
    if (id < 0 || id >= size()) {
        throw ReferenceError("node id " + std::to_string(id) + " out of range (size " +
                             std::to_string(size()) + ")");
    }
}

const Gate& Circuit::gate(int id) const {
    check_id(id);
    return gates_[id];
}

const Polynomial& Circuit::poly(int id) const {
    check_id(id);
    return polys_[id];
}

int Circuit::append_gate(OpKind op, int i, int j) {
    check_id(i);
    check_id(j);
    if (i > j) std::swap(i, j);
    Gate g{Gate::Kind::Op};
    g.op = op;
    g.left = i;
    g.right = j;
    gates_.push_back(g);
    polys_.push_back(op == OpKind::Add ? poly_add(polys_[i], polys_[j])
                                       : poly_mul(polys_[i], polys_[j]));
    return size() - 1;
}

int Circuit::depth() const {
    std::vector<int> d(gates_.size(), 0);
    for (size_t i = 0; i < gates_.size(); ++i) {
        if (gates_[i].kind == Gate::Kind::Op) {
            d[i] = 1 + std::max(d[gates_[i].left], d[gates_[i].right]);
        }
    }
    return d.empty() ? 0 : d.back();
}

int Circuit::syntactic_degree(int id) const {
    check_id(id);
    std::vector<int> deg(id + 1, 0);
    for (int i = 0; i <= id; ++i) {
        switch (gates_[i].kind) {
            case Gate::Kind::Variable: deg[i] = 1; break;
            case Gate::Kind::One: deg[i] = 0; break;
            case Gate::Kind::Op:
                deg[i] = gates_[i].op == OpKind::Add
                             ? std::max(deg[gates_[i].left], deg[gates_[i].right])
                             : deg[gates_[i].left] + deg[gates_[i].right];
                break;
        }
    }
    return deg[id];
}

void Circuit::serialize(std::ostream& os) const {
    os << "circuit " << n_vars_ << " " << p_ << "\n";
    for (const Gate& g : gates_) {
        if (g.kind != Gate::Kind::Op) continue;
        os << "(" << (g.op == OpKind::Add ? "add" : "mul") << "," << g.left << "," << g.right
           << ")\n";
    }
}

Circuit Circuit::deserialize(std::istream& is) {
    std::string tag;
    int n_vars = 0;
    std::int64_t p = 0;
    is >> tag >> n_vars >> p;
    if (tag != "circuit" || !is) throw DataError("bad circuit header");
    Circuit c(n_vars, p);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        char opname[4] = {};
        int left = -1, right = -1;
        if (std::sscanf(line.c_str(), "(%3[a-z],%d,%d)", opname, &left, &right) != 3) {
            throw DataError("bad circuit action line: '" + line + "'");
        }
        std::string op(opname);
        if (op != "add" && op != "mul") throw DataError("bad op in circuit action: " + op);
        c.append_gate(op == "add" ? OpKind::Add : OpKind::Mul, left, right);
    }
    return c;
}

int horner_reference_circuit(std::span<const int> coefficient_nodes, int x_node, Circuit& circuit) {
    if (coefficient_nodes.empty()) throw DomainError("horner needs at least one coefficient node");
    for (int id : coefficient_nodes) circuit.gate(id);
    circuit.gate(x_node);
    int d = static_cast<int>(coefficient_nodes.size()) - 1;
    int acc = coefficient_nodes[d];
    for (int i = d - 1; i >= 0; --i) {
        int prod = circuit.append_gate(OpKind::Mul, x_node, acc);
        acc = circuit.append_gate(OpKind::Add, coefficient_nodes[i], prod);
    }
    return acc;
}

}  // namespace circuitrl
