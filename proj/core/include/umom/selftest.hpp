#pragma once

#include <iosfwd>

namespace umom {

struct SelftestOptions {
    double tolerance = 1e-10;
    bool verbose = false;
};

// Exact-identity sweep: every built-in kernel, orders 2..4, 2-4 atom laws,
// N in 6..12. Checks the component-variance identity, the brute-force
// Var(U) cross-check, projection orthogonality, pointwise reconstruction,
// and the Hajek gap bound. Returns true iff every residual is below
// tolerance; writes one line per failure (or per combination, if verbose).
bool run_identity_selftest(std::ostream& out, const SelftestOptions& options = {});

}  // namespace umom
