#pragma once

#include "ddlmi/linalg.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace ddlmi {

// Conic program in dual standard form:
//
//   maximize  b'y
//   s.t.      Z_k = C_k - sum_i y_i A_{k,i}  >= 0   (semidefinite blocks)
//             z_r = c_r - sum_i y_i a_{r,i}  >= 0   (scalar rows)
//
// with primal  minimize <C,X> s.t. A(X) = b, X >= 0.

struct SdpConeBlock {
    Matrix c;
    std::vector<std::pair<int, Matrix>> a;  // (variable index, symmetric coefficient)
};

struct LpRow {
    double c = 0.0;
    std::vector<std::pair<int, double>> a;
};

struct ConeProblem {
    int num_vars = 0;
    Vector b;
    std::vector<SdpConeBlock> sdp;
    std::vector<LpRow> lp;
};

/// Writes the program in SDPA sparse format (min c'x s.t. sum F_i x_i - F_0 >= 0).
/// Scalar rows are emitted as one diagonal block with negative size.
void write_sdpa(const ConeProblem& problem, std::ostream& out);

}  // namespace ddlmi
