#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circuitrl/field.hpp"

namespace circuitrl {

// Exponent vector of a monomial; length is always the run's variable count.
struct Monomial {
    std::vector<int> exps;

    int total_degree() const;
    friend bool operator==(const Monomial&, const Monomial&) = default;
};

// Graded lexicographic order, larger first: higher total degree wins, ties
// broken lexicographically on the exponent vector.
bool monomial_greater(const Monomial& a, const Monomial& b);

// Canonical sparse multivariate polynomial. Coefficients are residues in
// [0, p) when modulus > 0; modulus 0 keeps unreduced 64-bit integer
// coefficients (used only by the board reproduction mode). Polynomials are
// formal: x^p is never reduced to x. Terms are stored strictly decreasing in
// graded-lex order with no zero coefficients, so structural equality is
// mathematical equality.
class Polynomial {
  public:
    struct Term {
        Monomial mono;
        std::int64_t coeff;
        friend bool operator==(const Term&, const Term&) = default;
    };

    Polynomial(int n_vars, std::int64_t modulus);

    static Polynomial zero(int n_vars, std::int64_t modulus);
    static Polynomial constant(std::int64_t c, int n_vars, std::int64_t modulus);
    static Polynomial variable(int index, int n_vars, std::int64_t modulus);

    int n_vars() const { return n_vars_; }
    std::int64_t modulus() const { return modulus_; }
    const std::vector<Term>& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    int total_degree() const;  // -1 for the zero polynomial

    // Evaluation over F_p at a point of length n_vars. Requires modulus > 0.
    std::int64_t eval(std::span<const std::int64_t> point) const;

    // Stable text form, e.g. "1*x0^2 + 2*x0^1*x1^1 + 1*x1^2"; the board
    // persistence key. Constants render bare ("2"), zero renders "0".
    std::string to_string() const;
    static Polynomial parse(const std::string& text, int n_vars, std::int64_t modulus);

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    friend Polynomial poly_add(const Polynomial& f, const Polynomial& g);
    friend Polynomial poly_mul(const Polynomial& f, const Polynomial& g);

  private:
    void insert_term(const Monomial& m, std::int64_t c);
    std::int64_t reduce(std::int64_t c) const;

    int n_vars_;
    std::int64_t modulus_;
    std::vector<Term> terms_;
};

Polynomial poly_add(const Polynomial& f, const Polynomial& g);
Polynomial poly_mul(const Polynomial& f, const Polynomial& g);

// e_k over n variables via the two-term recurrence
// e_k(x_1..x_n) = e_k(x_1..x_{n-1}) + x_n * e_{k-1}(x_1..x_{n-1}).
// The result has exactly n variables; e_0 = 1, e_k = 0 for k > n.
Polynomial elementary_symmetric(int n, int k, std::int64_t modulus);

// per_n = sum over permutations sigma of prod_i x_{i,sigma(i)}, over n^2
// variables x_{i,j} indexed row-major.
Polynomial permanent_polynomial(int n, std::int64_t modulus, int max_vars = 16);

}  // namespace circuitrl
