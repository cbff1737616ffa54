#pragma once

#include <string>
#include <vector>

#include "tensor.hpp"

namespace adarnn {

// A sample set is an n x dim tensor whose rows are the samples. Batches of
// hidden states and slices of raw feature rows both use this convention;
// ops that reduce a set to a vector (cosine) work on its column mean.

enum class DistanceId { kCosine, kMmd, kMmdLinear, kCoral, kAdversarial };

struct DistanceKind {
    DistanceId id = DistanceId::kMmd;
    // RBF bandwidths are these multipliers applied to the median pairwise
    // squared distance of the pooled sets.
    std::vector<double> rbf_multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
    // Pins the base bandwidth instead of the median heuristic when > 0.
    // The heuristic is not differentiated through, so gradient checks pin
    // it at the evaluation point.
    double fixed_bandwidth = 0.0;
    std::size_t adv_hidden = 0; // 0 picks the feature dimension
    double grl_coeff = 1.0;

    bool needs_discriminator() const { return id == DistanceId::kAdversarial; }

    // Config / CLI names: cosine | mmd | mmd_linear | coral | adv.
    static DistanceKind parse(const std::string& name);
    std::string name() const;
};

// Two-layer domain discriminator dim -> hidden -> 1 with sigmoid output.
// One instance is shared across every period pair and time step during
// training; per-pair networks are too expensive to learn.
struct Discriminator {
    Tensor w1, b1, w2, b2;
    double grl_coeff = 1.0;

    static Discriminator init(std::size_t dim, std::size_t hidden, std::uint64_t seed,
                              double grl_coeff = 1.0);
    // Probability in (0,1) that a row came from the first sample set.
    Tensor forward(const Tensor& h) const;
    std::vector<Tensor> params();
    std::size_t input_dim() const { return w1.rows(); }
};

// 1 - <mean(a), mean(b)> / (||mean(a)|| * ||mean(b)||); range [0, 2].
Tensor cosine_distance(const Tensor& a, const Tensor& b);

// Median pairwise squared Euclidean distance over the pooled samples;
// 1.0 when the median vanishes. Not differentiated through.
double median_bandwidth(const Tensor& a, const Tensor& b);

// Biased MMD estimator. RBF kinds use the mean of kernels at
// multipliers x median_bandwidth; the linear kind uses <x, y>.
Tensor mmd_distance(const Tensor& a, const Tensor& b, const DistanceKind& kind);

// ||C_a - C_b||_F^2 / (4 q^2) with unbiased (n-1) covariances.
Tensor coral_distance(const Tensor& a, const Tensor& b);

// Discriminator binary cross-entropy -(E[log D(a)] + E[log(1 - D(b))]),
// outputs clamped to [1e-7, 1 - 1e-7] before the log. Gradients w.r.t.
// the discriminator minimize this value; gradients into a and b pass a
// reversal layer so upstream features maximize confusion.
Tensor adversarial_distance(const Tensor& a, const Tensor& b, const Discriminator& disc);

// Dispatch on kind; disc may be null for the non-adversarial kinds.
Tensor distance(const DistanceKind& kind, const Tensor& a, const Tensor& b,
                const Discriminator* disc = nullptr);

// Maps a raw distance value to a "larger means more divergent" indicator
// for the boosting rule. The adversarial BCE peaks at confusion, so it is
// mapped through max(0, 2 ln 2 - d); other kinds pass through.
double divergence_indicator(const DistanceKind& kind, double value);

// Column mean of a sample set as a 1 x dim tensor (differentiable).
Tensor column_mean(const Tensor& a);

} // namespace adarnn
