// bounds.hpp
#pragma once
#include <cmath>
#include <map>
#include <string>

#include "errors.hpp"

namespace adasense {

// A critical amplitude evaluated from a closed-form bound. Natural logs
// throughout except where log2 is explicit.
struct BoundSpec {
    std::string name;
    std::map<std::string, double> inputs;
    double value = 0.0;
    bool clamped = false;        // the bracket under the square root was negative
    bool validity_flag = false;  // inputs fall outside the bound's stated regime
};

namespace detail {

inline void require_epsilon(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidEpsilon("epsilon must lie in (0, 1)");
}

inline void require_budget(double m) {
    if (!(m > 0.0)) throw ValidationError("budget m must be positive");
}

inline BoundSpec sqrt_of(std::string name, std::map<std::string, double> inputs, double radicand) {
    BoundSpec b{std::move(name), std::move(inputs), 0.0, false, false};
    if (radicand > 0.0)
        b.value = std::sqrt(radicand);
    else
        b.clamped = true;
    return b;
}

} // namespace detail

// Minimum amplitude for any adaptive test with R <= eps on a symmetric class:
// sqrt( 2|Xi| / (s m) * ln(1/(2 eps)) ). Also covers R~ <= eps/2 and R- <= eps.
inline BoundSpec detection_lower_bound(double xi_size, double s, double m, double eps) {
    detail::require_epsilon(eps);
    detail::require_budget(m);
    if (!(s >= 1.0)) throw InvalidSparsity("s must be >= 1");
    if (xi_size < s) throw InvalidDimension("|Xi| must be at least s");
    return detail::sqrt_of("detection_lower", {{"xi", xi_size}, {"s", s}, {"m", m}, {"epsilon", eps}},
                           2.0 * xi_size / (s * m) * std::log(1.0 / (2.0 * eps)));
}

namespace detail {
inline BoundSpec estimation_lower_impl(std::string name, double n, double s, double m, double eps) {
    require_epsilon(eps);
    require_budget(m);
    if (!(s >= 1.0)) throw InvalidSparsity("s must be >= 1");
    if (s >= n) throw InvalidSparsity("s must be smaller than n");
    const double bracket = std::log(s) + std::log((n - s) / (n + 1.0)) + std::log(1.0 / (2.0 * eps));
    return sqrt_of(std::move(name), {{"n", n}, {"s", s}, {"m", m}, {"epsilon", eps}}, 2.0 * n / m * bracket);
}
} // namespace detail

// Minimum amplitude for max E[d] <= eps over supports of size s-1, s, s+1:
// sqrt( (2n/m) (ln s + ln((n-s)/(n+1)) + ln(1/(2 eps))) ).
inline BoundSpec estimation_lower_bound(double n, double s, double m, double eps) {
    return detail::estimation_lower_impl("estimation_lower", n, s, m, eps);
}

// Same expression for adaptive compressed sensing with E||A||_F^2 <= m.
inline BoundSpec cs_lower_bound(double n, double s, double m, double eps) {
    return detail::estimation_lower_impl("cs_lower", n, s, m, eps);
}

// Amplitude sufficient for distilled-sensing style exact recovery:
// sqrt( (4n/m) (2 ln(s+1) + 5 ln(log2 n)) ). Flags s+1 > n/(log2(n)^2 - 3).
inline BoundSpec estimation_upper_bound(double n, double s, double m) {
    detail::require_budget(m);
    if (n < 5.0) throw InvalidDimension("estimation upper bound needs n >= 5");
    if (!(s >= 1.0)) throw InvalidSparsity("s must be >= 1");
    const double lg = std::log2(n);
    auto b = detail::sqrt_of("estimation_upper", {{"n", n}, {"s", s}, {"m", m}},
                             4.0 * n / m * (2.0 * std::log(s + 1.0) + 5.0 * std::log(lg)));
    b.validity_flag = s + 1.0 > n / (lg * lg - 3.0);
    return b;
}

// Amplitude sufficient for subsampled distilled-sensing detection:
// sqrt( 32 n lnlnln(n) / (s m) ). Flags s <= lnlnln n.
inline BoundSpec mds_sufficient_magnitude(double n, double s, double m) {
    detail::require_budget(m);
    if (n < 16.0) throw InvalidDimension("mds bound needs n >= 16 so that ln ln ln n > 0");
    if (!(s >= 1.0)) throw InvalidSparsity("s must be >= 1");
    const double l3 = std::log(std::log(std::log(n)));
    auto b = detail::sqrt_of("mds_sufficient", {{"n", n}, {"s", s}, {"m", m}}, 32.0 * n * l3 / (s * m));
    b.validity_flag = s <= l3;
    return b;
}

} // namespace adasense
