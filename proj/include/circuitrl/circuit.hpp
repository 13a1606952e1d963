#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "circuitrl/poly.hpp"

namespace circuitrl {

enum class OpKind : int { Add = 0, Mul = 1 };

struct Gate {
    enum class Kind { Variable, One, Op };
    Kind kind;
    int var_index = -1;       // Kind::Variable only
    OpKind op = OpKind::Add;  // Kind::Op only
    int left = -1;            // operands, left <= right
    int right = -1;
};

// Append-only DAG of gates. Nodes 0..n_vars-1 are the input variables, node
// n_vars is the constant 1, every later node is an operation on two earlier
// nodes. The polynomial computed at each node is cached at append time.
class Circuit {
  public:
    Circuit(int n_vars, std::int64_t p);

    int n_vars() const { return n_vars_; }
    std::int64_t modulus() const { return p_; }
    int size() const { return static_cast<int>(gates_.size()); }
    int complexity() const { return size() - n_vars_ - 1; }
    int one_node() const { return n_vars_; }

    const Gate& gate(int id) const;
    const Polynomial& poly(int id) const;

    // Appends op(i, j) with operands reordered so left <= right; returns the
    // new node id.
    int append_gate(OpKind op, int i, int j);

    // Longest directed input-to-output path, the output being the most
    // recently appended node. 0 for a fresh circuit.
    int depth() const;

    // Inductive degree bound: 0 for the constant, 1 for variables, max at
    // Add, sum at Mul.
    int syntactic_degree(int id) const;

    // Line-oriented serialization: "circuit <n_vars> <p>" then one
    // "(op,left,right)" triple per operation gate.
    void serialize(std::ostream& os) const;
    static Circuit deserialize(std::istream& is);

  private:
    void check_id(int id) const;

    int n_vars_;
    std::int64_t p_;
    std::vector<Gate> gates_;
    std::vector<Polynomial> polys_;
};

struct Action {
    OpKind op;
    int left;
    int right;
    friend bool operator==(const Action&, const Action&) = default;
};

// Builds a Horner evaluation of a0 + x*(a1 + x*(... + x*ad)) from existing
// coefficient nodes; appends exactly d multiplication and d addition gates
// and returns the output node id (a0's node when d = 0).
int horner_reference_circuit(std::span<const int> coefficient_nodes, int x_node, Circuit& circuit);

}  // namespace circuitrl
