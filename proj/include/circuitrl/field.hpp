#pragma once

#include <cstdint>

#include "circuitrl/errors.hpp"

namespace circuitrl {

bool is_prime(std::int64_t n);

// A residue in [0, p) for a fixed prime p.
class FieldElement {
  public:
    FieldElement(std::int64_t value, std::int64_t p);

    std::int64_t value() const { return value_; }
    std::int64_t modulus() const { return p_; }

    friend bool operator==(const FieldElement&, const FieldElement&) = default;

  private:
    std::int64_t value_;
    std::int64_t p_;
};

FieldElement fe_add(const FieldElement& a, const FieldElement& b);
FieldElement fe_mul(const FieldElement& a, const FieldElement& b);

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return fe_add(a, b); }
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) { return fe_mul(a, b); }

}  // namespace circuitrl
