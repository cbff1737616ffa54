#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distances.hpp"
#include "tensor.hpp"

namespace adarnn {

// Evenly sized minimal units over the raw time axis. Periods returned by
// the splitters are always unions of whole units.
struct UnitPartition {
    // n_units + 1 row indices, starting at 0 and ending at the length.
    std::vector<std::size_t> boundaries;

    std::size_t units() const { return boundaries.size() - 1; }
    std::size_t length() const { return boundaries.back(); }
};

// Splits [0, length) into n_units contiguous units whose sizes differ by
// at most one; the remainder goes to the leading units.
UnitPartition partition_units(std::size_t length, std::size_t n_units);

// A unit-aligned partition of the series into k periods, together with
// the mean pairwise distribution distance it achieves.
struct PeriodSplit {
    std::size_t k = 0;
    std::vector<std::size_t> boundaries; // k + 1 raw row indices, 0 .. n
    double objective = 0.0;
    std::string distance;

    static PeriodSplit trivial(std::size_t length); // single period, no matching
    void validate(std::size_t min_k = 1) const;

    std::string to_json() const;
    static PeriodSplit from_json(const std::string& text);
};

struct SegmentationOptions {
    DistanceKind kind;
    // Ranges larger than this are evenly strided down before the distance
    // evaluation; 0 disables the cap.
    std::size_t max_samples = 512;
};

// Distance between two disjoint row ranges of the feature matrix, where
// every time step's feature vector is one sample.
double period_distance(const Tensor& features, std::size_t a_begin, std::size_t a_end,
                       std::size_t b_begin, std::size_t b_end, const SegmentationOptions& opts);

// Greedy boundary insertion: each of the k - 1 insertions picks the
// remaining candidate unit boundary that maximizes the mean pairwise
// distance among the resulting periods, earliest boundary on ties.
PeriodSplit greedy_split(const Tensor& features, const UnitPartition& units, std::size_t k,
                         const SegmentationOptions& opts);

// Exhaustive maximization over all C(n_units - 1, k - 1) boundary sets;
// test oracle for small unit counts, same tie-break as greedy.
PeriodSplit brute_force_split(const Tensor& features, const UnitPartition& units, std::size_t k,
                              const SegmentationOptions& opts);

struct SelectResult {
    PeriodSplit best;
    // (k, objective) per candidate, in candidate order.
    std::vector<std::pair<std::size_t, double>> candidates;
};

// Runs greedy_split for every candidate k and keeps the split with the
// largest objective; ties prefer the smaller k and then the
// lexicographically earliest boundaries.
SelectResult select_split(const Tensor& features, const UnitPartition& units,
                          std::vector<std::size_t> k_candidates, const SegmentationOptions& opts);

inline const std::vector<std::size_t>& default_k_candidates() {
    static const std::vector<std::size_t> ks{2, 3, 5, 7, 10};
    return ks;
}

} // namespace adarnn
