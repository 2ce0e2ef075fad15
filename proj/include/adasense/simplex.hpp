// simplex.hpp
#pragma once
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace adasense {

template <class Scalar>
struct LpSolution {
    Scalar value{};
    std::vector<Scalar> x;
    std::size_t pivots = 0;
};

class LpUnbounded : public std::runtime_error {
public:
    LpUnbounded() : std::runtime_error("linear program is unbounded") {}
};

template <class Scalar>
struct SimplexTolerance {
    // exact arithmetic types compare against zero; floating types need slack
    static Scalar value() {
        if constexpr (std::is_floating_point_v<Scalar>)
            return Scalar(1e-12);
        else
            return Scalar(0);
    }
};

// maximize c.x subject to A x <= b, x >= 0, with b >= 0 so the origin is
// feasible. Dictionary simplex with Bland's rule (terminates on degenerate
// problems). Instantiate with an exact rational type for exact optima.
template <class Scalar>
LpSolution<Scalar> simplex_maximize(const std::vector<std::vector<Scalar>>& A, const std::vector<Scalar>& b,
                                    const std::vector<Scalar>& c) {
    const std::size_t rows = b.size();
    const std::size_t cols = c.size();
    if (A.size() != rows) throw std::invalid_argument("simplex: A and b disagree on row count");
    for (const auto& row : A)
        if (row.size() != cols) throw std::invalid_argument("simplex: ragged constraint matrix");
    const Scalar tol = SimplexTolerance<Scalar>::value();
    for (const auto& v : b)
        if (v < -tol) throw std::invalid_argument("simplex: right-hand side must be non-negative");

    // x_basic[r] = beta[r] - sum_j D[r][j] x_nonbasic[j];  z = z0 + sum_j cbar[j] x_nonbasic[j]
    std::vector<std::vector<Scalar>> D = A;
    std::vector<Scalar> beta = b;
    std::vector<Scalar> cbar = c;
    Scalar z0 = Scalar(0);
    std::vector<std::size_t> basic(rows), nonbasic(cols);
    for (std::size_t r = 0; r < rows; ++r) basic[r] = cols + r;
    for (std::size_t j = 0; j < cols; ++j) nonbasic[j] = j;

    LpSolution<Scalar> sol;
    for (;;) {
        // entering: lowest-numbered variable with positive reduced cost
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j)
            if (cbar[j] > tol && (enter == cols || nonbasic[j] < nonbasic[enter])) enter = j;
        if (enter == cols) break;

        // leaving: minimum ratio, ties to lowest-numbered basic variable
        std::size_t leave = rows;
        Scalar best{};
        for (std::size_t r = 0; r < rows; ++r) {
            if (!(D[r][enter] > tol)) continue;
            Scalar ratio = beta[r] / D[r][enter];
            if (leave == rows || ratio < best || (!(best < ratio) && basic[r] < basic[leave])) {
                leave = r;
                best = ratio;
            }
        }
        if (leave == rows) throw LpUnbounded();

        const Scalar piv = D[leave][enter];
        auto& prow = D[leave];
        beta[leave] /= piv;
        for (std::size_t k = 0; k < cols; ++k)
            if (k != enter) prow[k] /= piv;
        prow[enter] = Scalar(1) / piv;

        for (std::size_t r = 0; r < rows; ++r) {
            if (r == leave) continue;
            const Scalar f = D[r][enter];
            if (f == Scalar(0)) continue;
            beta[r] -= f * beta[leave];
            for (std::size_t k = 0; k < cols; ++k)
                if (k != enter) D[r][k] -= f * prow[k];
            D[r][enter] = -f * prow[enter];
        }
        const Scalar ce = cbar[enter];
        z0 += ce * beta[leave];
        for (std::size_t k = 0; k < cols; ++k)
            if (k != enter) cbar[k] -= ce * prow[k];
        cbar[enter] = -ce * prow[enter];

        std::swap(basic[leave], nonbasic[enter]);
        ++sol.pivots;
    }

    sol.value = z0;
    sol.x.assign(cols, Scalar(0));
    for (std::size_t r = 0; r < rows; ++r)
        if (basic[r] < cols) sol.x[basic[r]] = beta[r];
    return sol;
}

} // namespace adasense
