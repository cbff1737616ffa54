#include "distances.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace adarnn {
namespace {

constexpr double kProbClamp = 1e-7;

void require_same_dim(const char* op, const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": sample sets have different dimensions");
    }
    if (a.rows() == 0 || b.rows() == 0) {
        throw DataError(std::string(op) + ": empty sample set");
    }
}

// n x n matrix of squared Euclidean distances between the rows of a and b,
// assembled from matmuls so it stays differentiable. Cancellation can
// leave slightly negative entries for near-identical rows, which would
// explode under a tiny bandwidth; the relu pins them at zero.
Tensor pairwise_sq_dists(const Tensor& a, const Tensor& b) {
    Tensor ra = matmul(square(a), Tensor::full(a.cols(), 1, 1.0)); // n_a x 1 row norms
    Tensor rb = matmul(square(b), Tensor::full(b.cols(), 1, 1.0));
    Tensor left = matmul(ra, Tensor::full(1, b.rows(), 1.0));
    Tensor right = matmul(Tensor::full(a.rows(), 1, 1.0), transpose(rb));
    return relu(add(add(left, right), scale(matmul(a, transpose(b)), -2.0)));
}

Tensor rbf_block(const Tensor& sqdists, const std::vector<double>& multipliers, double median) {
    Tensor acc;
    for (double mult : multipliers) {
        Tensor k = exp(scale(sqdists, -1.0 / (mult * median)));
        acc = acc.defined() ? add(acc, k) : k;
    }
    return scale(acc, 1.0 / static_cast<double>(multipliers.size()));
}

} // namespace

DistanceKind DistanceKind::parse(const std::string& name) {
    DistanceKind kind;
    if (name == "cosine") {
        kind.id = DistanceId::kCosine;
    } else if (name == "mmd") {
        kind.id = DistanceId::kMmd;
    } else if (name == "mmd_linear") {
        kind.id = DistanceId::kMmdLinear;
    } else if (name == "coral") {
        kind.id = DistanceId::kCoral;
    } else if (name == "adv") {
        kind.id = DistanceId::kAdversarial;
    } else {
        throw ConfigError("unknown distance '" + name +
                          "' (expected cosine | mmd | mmd_linear | coral | adv)");
    }
    return kind;
}

std::string DistanceKind::name() const {
    switch (id) {
        case DistanceId::kCosine: return "cosine";
        case DistanceId::kMmd: return "mmd";
        case DistanceId::kMmdLinear: return "mmd_linear";
        case DistanceId::kCoral: return "coral";
        case DistanceId::kAdversarial: return "adv";
    }
    return "mmd";
}

Discriminator Discriminator::init(std::size_t dim, std::size_t hidden, std::uint64_t seed,
                                  double grl_coeff) {
    if (dim < 1 || hidden < 1) throw ConfigError("discriminator: dim and hidden must be >= 1");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto uniform_matrix = [&](std::size_t r, std::size_t c) {
        std::vector<double> data(r * c);
        for (double& v : data) v = rng.uniform(-bound, bound);
        return Tensor::from_data(r, c, std::move(data)).set_requires_grad(true);
    };
    Discriminator d;
    d.w1 = uniform_matrix(dim, hidden);
    d.b1 = Tensor::zeros(1, hidden).set_requires_grad(true);
    d.w2 = uniform_matrix(hidden, 1);
    d.b2 = Tensor::zeros(1, 1).set_requires_grad(true);
    d.grl_coeff = grl_coeff;
    return d;
}

Tensor Discriminator::forward(const Tensor& h) const {
    if (h.cols() != w1.rows()) throw DimensionError("discriminator: input dimension mismatch");
    Tensor hidden = relu(add(matmul(h, w1), b1));
    return sigmoid(add(matmul(hidden, w2), b2));
}

std::vector<Tensor> Discriminator::params() { return {w1, b1, w2, b2}; }

Tensor column_mean(const Tensor& a) {
    Tensor ones = Tensor::full(1, a.rows(), 1.0 / static_cast<double>(a.rows()));
    return matmul(ones, a);
}

Tensor cosine_distance(const Tensor& a, const Tensor& b) {
    require_same_dim("cosine_distance", a, b);
    Tensor ma = column_mean(a);
    Tensor mb = column_mean(b);
    Tensor na = sqrt(sum(square(ma)));
    Tensor nb = sqrt(sum(square(mb)));
    if (na.item() == 0.0 || nb.item() == 0.0) {
        throw DataError("cosine_distance: zero-norm mean vector");
    }
    Tensor cosine = divide(sum(mul(ma, mb)), mul(na, nb));
    return add_scalar(scale(cosine, -1.0), 1.0);
}

double median_bandwidth(const Tensor& a, const Tensor& b) {
    require_same_dim("median_bandwidth", a, b);
    const std::size_t dim = a.cols();
    std::vector<const Tensor*> parts{&a, &b};
    std::vector<const double*> rows;
    rows.reserve(a.rows() + b.rows());
    for (const Tensor* t : parts)
        for (std::size_t i = 0; i < t->rows(); ++i) rows.push_back(t->values().data() + i * dim);
    const std::size_t n = rows.size();
    if (n < 2) throw DataError("median_bandwidth: pooled set needs at least 2 samples");

    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = rows[i][k] - rows[j][k];
                acc += d * d;
            }
            dists.push_back(acc);
        }
    }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        const double lower = *std::max_element(dists.begin(), dists.begin() + mid);
        median = 0.5 * (median + lower);
    }
    // Medians at rounding-noise scale mean the pooled set has collapsed;
    // fall back as for exact zero instead of dividing by dust.
    return median > 1e-12 ? median : 1.0;
}

Tensor mmd_distance(const Tensor& a, const Tensor& b, const DistanceKind& kind) {
    require_same_dim("mmd_distance", a, b);
    Tensor kaa, kbb, kab;
    if (kind.id == DistanceId::kMmdLinear) {
        kaa = matmul(a, transpose(a));
        kbb = matmul(b, transpose(b));
        kab = matmul(a, transpose(b));
    } else {
        if (kind.rbf_multipliers.empty()) {
            throw ConfigError("mmd_distance: kernel needs at least one bandwidth multiplier");
        }
        for (double m : kind.rbf_multipliers) {
            if (m <= 0.0) throw ConfigError("mmd_distance: bandwidth multipliers must be positive");
        }
        const double base =
            kind.fixed_bandwidth > 0.0 ? kind.fixed_bandwidth : median_bandwidth(a, b);
        kaa = rbf_block(pairwise_sq_dists(a, a), kind.rbf_multipliers, base);
        kbb = rbf_block(pairwise_sq_dists(b, b), kind.rbf_multipliers, base);
        kab = rbf_block(pairwise_sq_dists(a, b), kind.rbf_multipliers, base);
    }
    return add(add(mean(kaa), mean(kbb)), scale(mean(kab), -2.0));
}

Tensor coral_distance(const Tensor& a, const Tensor& b) {
    require_same_dim("coral_distance", a, b);
    if (a.rows() < 2 || b.rows() < 2) {
        throw DataError("coral_distance: covariance needs at least 2 samples per set");
    }
    auto covariance = [](const Tensor& x) {
        Tensor centered = add(x, scale(column_mean(x), -1.0));
        return scale(matmul(transpose(centered), centered), 1.0 / static_cast<double>(x.rows() - 1));
    };
    const double q = static_cast<double>(a.cols());
    return scale(sum(square(sub(covariance(a), covariance(b)))), 1.0 / (4.0 * q * q));
}

Tensor adversarial_distance(const Tensor& a, const Tensor& b, const Discriminator& disc) {
    require_same_dim("adversarial_distance", a, b);
    Tensor pa = clamp(disc.forward(grad_reverse(a, disc.grl_coeff)), kProbClamp, 1.0 - kProbClamp);
    Tensor pb = clamp(disc.forward(grad_reverse(b, disc.grl_coeff)), kProbClamp, 1.0 - kProbClamp);
    Tensor ll = add(mean(log(pa)), mean(log(add_scalar(scale(pb, -1.0), 1.0))));
    return scale(ll, -1.0);
}

Tensor distance(const DistanceKind& kind, const Tensor& a, const Tensor& b,
                const Discriminator* disc) {
    switch (kind.id) {
        case DistanceId::kCosine: return cosine_distance(a, b);
        case DistanceId::kMmd:
        case DistanceId::kMmdLinear: return mmd_distance(a, b, kind);
        case DistanceId::kCoral: return coral_distance(a, b);
        case DistanceId::kAdversarial:
            if (disc == nullptr) {
                throw ContractError("distance: adversarial kind needs a discriminator");
            }
            return adversarial_distance(a, b, *disc);
    }
    throw ContractError("distance: unhandled kind");
}

double divergence_indicator(const DistanceKind& kind, double value) {
    if (kind.id == DistanceId::kAdversarial) {
        return std::max(0.0, 2.0 * std::log(2.0) - value);
    }
    return value;
}

} // namespace adarnn
