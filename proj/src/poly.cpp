#include "circuitrl/poly.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace circuitrl {

int Monomial::total_degree() const {
    return std::accumulate(exps.begin(), exps.end(), 0);
}

bool monomial_greater(const Monomial& a, const Monomial& b) {
    int da = a.total_degree();
    int db = b.total_degree();
    if (da != db) return da > db;
    return a.exps > b.exps;
}

Polynomial::Polynomial(int n_vars, std::int64_t modulus) : n_vars_(n_vars), modulus_(modulus) {
    if (n_vars < 1) throw ConfigError("polynomial needs at least one variable");
    if (modulus != 0 && !is_prime(modulus)) {
        throw ConfigError("polynomial modulus must be prime (or 0 for unreduced coefficients)");
    }
}

std::int64_t Polynomial::reduce(std::int64_t c) const {
    if (modulus_ == 0) return c;
    c %= modulus_;
    if (c < 0) c += modulus_;
    return c;
}

Polynomial Polynomial::zero(int n_vars, std::int64_t modulus) {
    return Polynomial(n_vars, modulus);
}

Polynomial Polynomial::constant(std::int64_t c, int n_vars, std::int64_t modulus) {
    Polynomial p(n_vars, modulus);
    c = p.reduce(c);
    if (c != 0) p.terms_.push_back({Monomial{std::vector<int>(n_vars, 0)}, c});
    return p;
}

Polynomial Polynomial::variable(int index, int n_vars, std::int64_t modulus) {
    if (index < 0 || index >= n_vars) throw ReferenceError("variable index out of range");
    Polynomial p(n_vars, modulus);
    Monomial m{std::vector<int>(n_vars, 0)};
    m.exps[index] = 1;
    p.terms_.push_back({m, 1});
    return p;
}

int Polynomial::total_degree() const {
    if (terms_.empty()) return -1;
    return terms_.front().mono.total_degree();  // leading term has the max degree
}

std::int64_t Polynomial::eval(std::span<const std::int64_t> point) const {
    if (modulus_ == 0) throw ConfigError("evaluation requires a prime modulus");
    if (static_cast<int>(point.size()) != n_vars_) {
        throw ConfigError("evaluation point length must equal the variable count");
    }
    std::int64_t acc = 0;
    for (const Term& t : terms_) {
        std::int64_t v = t.coeff % modulus_;
        for (int i = 0; i < n_vars_; ++i) {
            std::int64_t base = point[i] % modulus_;
            if (base < 0) base += modulus_;
            for (int e = 0; e < t.mono.exps[i]; ++e) v = v * base % modulus_;
        }
        acc = (acc + v) % modulus_;
    }
    return acc < 0 ? acc + modulus_ : acc;
}

static void check_compatible(const Polynomial& f, const Polynomial& g) {
    if (f.n_vars() != g.n_vars()) throw ConfigError("polynomial variable count mismatch");
    if (f.modulus() != g.modulus()) throw ConfigError("polynomial modulus mismatch");
}

Polynomial poly_add(const Polynomial& f, const Polynomial& g) {
    check_compatible(f, g);
    Polynomial out(f.n_vars_, f.modulus_);
    out.terms_.reserve(f.terms_.size() + g.terms_.size());
    auto it = f.terms_.begin();
    auto jt = g.terms_.begin();
    while (it != f.terms_.end() || jt != g.terms_.end()) {
        if (jt == g.terms_.end() || (it != f.terms_.end() && monomial_greater(it->mono, jt->mono))) {
            out.terms_.push_back(*it++);
        } else if (it == f.terms_.end() || monomial_greater(jt->mono, it->mono)) {
            out.terms_.push_back(*jt++);
        } else {
            std::int64_t c = out.reduce(it->coeff + jt->coeff);
            if (c != 0) out.terms_.push_back({it->mono, c});
            ++it;
            ++jt;
        }
    }
    return out;
}

Polynomial poly_mul(const Polynomial& f, const Polynomial& g) {
    check_compatible(f, g);
    std::map<std::vector<int>, std::int64_t, std::greater<>> acc;
    for (const auto& a : f.terms_) {
        for (const auto& b : g.terms_) {
            std::vector<int> e(f.n_vars_);
            for (int i = 0; i < f.n_vars_; ++i) e[i] = a.mono.exps[i] + b.mono.exps[i];
            acc[std::move(e)] += a.coeff * b.coeff;
        }
    }
    Polynomial out(f.n_vars_, f.modulus_);
    std::vector<std::pair<Monomial, std::int64_t>> items;
    items.reserve(acc.size());
    for (auto& [e, c] : acc) {
        std::int64_t r = out.reduce(c);
        if (r != 0) items.push_back({Monomial{e}, r});
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return monomial_greater(a.first, b.first); });
    for (auto& [m, c] : items) out.terms_.push_back({m, c});
    return out;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const Term& t : terms_) {
        if (!first) os << " + ";
        first = false;
        os << t.coeff;
        for (int i = 0; i < n_vars_; ++i) {
            if (t.mono.exps[i] > 0) os << "*x" << i << "^" << t.mono.exps[i];
        }
    }
    return os.str();
}

Polynomial Polynomial::parse(const std::string& text, int n_vars, std::int64_t modulus) {
    Polynomial out(n_vars, modulus);
    std::string s;
    for (char c : text) {
        if (c != ' ') s.push_back(c);  // tolerate arbitrary spacing
    }
    if (s.empty()) throw DomainError("empty polynomial string");
    if (s == "0") return out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t end = s.find('+', pos);
        if (end == std::string::npos) end = s.size();
        std::string term = s.substr(pos, end - pos);
        pos = end + 1;
        size_t cur = 0;
        size_t star = term.find('*');
        std::string coeff_str = term.substr(0, star == std::string::npos ? term.size() : star);
        std::int64_t coeff;
        try {
            size_t used = 0;
            coeff = std::stoll(coeff_str, &used);
            if (used != coeff_str.size()) throw std::invalid_argument(coeff_str);
        } catch (const std::exception&) {
            throw DomainError("bad coefficient in polynomial term: '" + term + "'");
        }
        Monomial m{std::vector<int>(n_vars, 0)};
        cur = (star == std::string::npos) ? term.size() : star + 1;
        while (cur < term.size()) {
            if (term[cur] != 'x') throw DomainError("expected variable in term: '" + term + "'");
            ++cur;
            size_t caret = term.find('^', cur);
            if (caret == std::string::npos) throw DomainError("missing exponent in term: '" + term + "'");
            int var = std::stoi(term.substr(cur, caret - cur));
            cur = caret + 1;
            size_t next = term.find('*', cur);
            if (next == std::string::npos) next = term.size();
            int exp = std::stoi(term.substr(cur, next - cur));
            cur = next == term.size() ? next : next + 1;
            if (var < 0 || var >= n_vars) throw DomainError("variable index out of range in term");
            if (exp < 0) throw DomainError("negative exponent");
            m.exps[var] += exp;
        }
        out.insert_term(m, coeff);
    }
    return out;
}

void Polynomial::insert_term(const Monomial& m, std::int64_t c) {
    c = reduce(c);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m, [](const Term& t, const Monomial& key) {
        return monomial_greater(t.mono, key);
    });
    if (it != terms_.end() && it->mono == m) {
        it->coeff = reduce(it->coeff + c);
        if (it->coeff == 0) terms_.erase(it);
    } else if (c != 0) {
        terms_.insert(it, {m, c});
    }
}

Polynomial elementary_symmetric(int n, int k, std::int64_t modulus) {
    if (n < 0 || k < 0) throw DomainError("elementary_symmetric requires n, k >= 0");
    int n_vars = std::max(n, 1);
    if (k == 0) return Polynomial::constant(1, n_vars, modulus);
    if (k > n) return Polynomial::zero(n_vars, modulus);
    // e[j] holds e_j over the variables processed so far.
    std::vector<Polynomial> e(static_cast<size_t>(k) + 1, Polynomial::zero(n_vars, modulus));
    e[0] = Polynomial::constant(1, n_vars, modulus);
    for (int v = 0; v < n; ++v) {
        Polynomial xv = Polynomial::variable(v, n_vars, modulus);
        for (int j = std::min(k, v + 1); j >= 1; --j) {
            e[j] = poly_add(e[j], poly_mul(xv, e[j - 1]));
        }
    }
    return e[k];
}

Polynomial permanent_polynomial(int n, std::int64_t modulus, int max_vars) {
    if (n < 1) throw DomainError("permanent_polynomial requires n >= 1");
    if (n * n > max_vars) {
        throw CapacityError("permanent_polynomial: " + std::to_string(n * n) +
                            " variables exceed the budget of " + std::to_string(max_vars));
    }
    int n_vars = n * n;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Polynomial out = Polynomial::zero(n_vars, modulus);
    do {
        Polynomial prod = Polynomial::constant(1, n_vars, modulus);
        for (int i = 0; i < n; ++i) {
            prod = poly_mul(prod, Polynomial::variable(i * n + perm[i], n_vars, modulus));
        }
        out = poly_add(out, prod);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace circuitrl
