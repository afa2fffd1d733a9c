#pragma once

#include <span>
#include <vector>

namespace sknn {

// Two-sided Wilcoxon signed-rank p for paired samples. Zero differences
// are dropped; exact distribution (sign-flip counting over midranks) for
// n <= 25, normal approximation with tie correction above. All pairs tied
// returns 1.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Two-sided Mann-Whitney U p. Exact (label-assignment counting over
// midranks) when both samples are small, normal approximation with tie
// correction otherwise.
double mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Midranks of a pooled sample (average rank for ties), 1-based.
std::vector<double> midranks(std::span<const double> values);

}  // namespace sknn
