#include "circuitrl/field.hpp"

namespace circuitrl {

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::int64_t d = 3; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

FieldElement::FieldElement(std::int64_t value, std::int64_t p) : p_(p) {
    if (!is_prime(p)) throw ConfigError("field modulus must be prime, got " + std::to_string(p));
    value_ = value % p;
    if (value_ < 0) value_ += p;
}

static void check_same_modulus(const FieldElement& a, const FieldElement& b) {
    if (a.modulus() != b.modulus()) {
        throw ConfigError("field modulus mismatch: " + std::to_string(a.modulus()) + " vs " +
                          std::to_string(b.modulus()));
    }
}

FieldElement fe_add(const FieldElement& a, const FieldElement& b) {
    check_same_modulus(a, b);
    return FieldElement(a.value() + b.value(), a.modulus());
}

FieldElement fe_mul(const FieldElement& a, const FieldElement& b) {
    check_same_modulus(a, b);
    return FieldElement(a.value() * b.value(), a.modulus());
}

}  // namespace circuitrl
