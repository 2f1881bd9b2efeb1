#include "bosecrit/errors.hpp"

#include <cmath>

namespace bosecrit {

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace bosecrit
