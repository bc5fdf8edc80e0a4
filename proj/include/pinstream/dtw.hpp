#ifndef PINSTREAM_DTW_HPP
#define PINSTREAM_DTW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

enum class DtwCost { L1, L2 };

struct DtwOptions {
    DtwCost cost = DtwCost::L1;
    /// Sakoe-Chiba half-width in samples; negative disables the band. The band
    /// is widened to |n - m| when narrower, so a path always exists.
    long band = -1;
};

inline std::string to_string(DtwCost c) { return c == DtwCost::L1 ? "l1" : "l2"; }

inline DtwCost parse_dtw_cost(const std::string& s)
{
    if (s == "l1")
        return DtwCost::L1;
    if (s == "l2")
        return DtwCost::L2;
    throw Error(ErrorCode::SchemaError, "unknown DTW cost '" + s + "'");
}

/// Classic dynamic time warping distance: sum of local costs along the
/// cheapest monotone alignment using match / insert / delete steps. No
/// normalization by path length.
template <class T>
double dtw(std::span<const T> a, std::span<const T> b, const DtwOptions& opt = {})
{
    if (a.empty() || b.empty())
        throw Error(ErrorCode::EmptySeries, "dtw needs two non-empty series");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t diff = n > m ? n - m : m - n;
    const std::size_t band = opt.band < 0 ? std::max(n, m) : std::max<std::size_t>(static_cast<std::size_t>(opt.band), diff);
    constexpr double inf = std::numeric_limits<double>::infinity();

    const auto cost = [&](std::size_t i, std::size_t j) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[j]);
        return opt.cost == DtwCost::L1 ? std::abs(d) : d * d;
    };

    std::vector<double> prev(m, inf), cur(m, inf);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        const std::size_t jlo = i > band ? i - band : 0;
        const std::size_t jhi = std::min(m - 1, i + band);
        for (std::size_t j = jlo; j <= jhi; ++j) {
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                best = inf;
                if (i > 0)
                    best = std::min(best, prev[j]);
                if (j > 0)
                    best = std::min(best, cur[j - 1]);
                if (i > 0 && j > 0)
                    best = std::min(best, prev[j - 1]);
            }
            cur[j] = best + cost(i, j);
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

inline double dtw(const std::vector<double>& a, const std::vector<double>& b, const DtwOptions& opt = {})
{
    return dtw<double>(std::span<const double>(a), std::span<const double>(b), opt);
}

} // namespace pinstream

#endif
