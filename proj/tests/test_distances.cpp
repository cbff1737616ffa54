#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "distances.hpp"
#include "optim.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace adarnn;

namespace {

Tensor gaussian_set(Rng& rng, std::size_t n, std::size_t dim, double mean, double stddev = 1.0) {
    std::vector<double> data(n * dim);
    for (double& v : data) v = rng.normal(mean, stddev);
    return Tensor::from_data(n, dim, std::move(data));
}

std::vector<std::vector<double>> to_rows(const Tensor& t) {
    std::vector<std::vector<double>> rows(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) rows[i][j] = t.at(i, j);
    return rows;
}

// Median of pairwise squared distances via full sort, mirroring the
// documented rule (average of the two middle values for even counts).
double median_sq_dist(const Tensor& a, const Tensor& b) {
    auto rows = to_rows(a);
    for (auto& r : to_rows(b)) rows.push_back(r);
    std::vector<double> d;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j) d.push_back(oracle::sq_dist(rows[i], rows[j]));
    std::sort(d.begin(), d.end());
    const std::size_t mid = d.size() / 2;
    double med = d.size() % 2 == 1 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
    return med > 0.0 ? med : 1.0;
}

} // namespace

TEST_CASE("cosine distance on hand cases") {
    Tensor z = Tensor::from_data(2, 2, {1, 2, 3, 4});
    CHECK(cosine_distance(z, z).item() == doctest::Approx(0.0).epsilon(1e-12));

    Tensor ex = Tensor::from_data(1, 2, {1, 0});
    Tensor ey = Tensor::from_data(1, 2, {0, 1});
    CHECK(cosine_distance(ex, ey).item() == doctest::Approx(1.0));
    Tensor mex = Tensor::from_data(1, 2, {-1, 0});
    CHECK(cosine_distance(ex, mex).item() == doctest::Approx(2.0));

    Tensor zero = Tensor::zeros(3, 2);
    CHECK_THROWS_AS(cosine_distance(zero, ex), DataError);
}

TEST_CASE("median bandwidth rules") {
    Tensor a = Tensor::from_data(1, 1, {0.0});
    Tensor b = Tensor::from_data(1, 1, {2.0});
    CHECK(median_bandwidth(a, b) == doctest::Approx(4.0)); // single pair

    Tensor same = Tensor::full(4, 2, 0.3);
    CHECK(median_bandwidth(same, same) == 1.0); // degenerate fallback

    Tensor trio_a = Tensor::from_data(2, 1, {0.0, 1.0});
    Tensor trio_b = Tensor::from_data(1, 1, {3.0});
    CHECK(median_bandwidth(trio_a, trio_b) == doctest::Approx(4.0)); // median of {1, 9, 4}
}

TEST_CASE("mmd hand cases") {
    DistanceKind mmd = DistanceKind::parse("mmd");
    Rng rng(5);
    Tensor a = gaussian_set(rng, 12, 3, 0.0);
    CHECK(mmd_distance(a, a, mmd).item() == doctest::Approx(0.0).epsilon(1e-9));

    DistanceKind lin = DistanceKind::parse("mmd_linear");
    Tensor pa = Tensor::from_data(1, 2, {1, 0});
    Tensor pb = Tensor::from_data(1, 2, {0, 1});
    CHECK(mmd_distance(pa, pb, lin).item() == doctest::Approx(2.0));

    Tensor bad = Tensor::zeros(4, 5);
    CHECK_THROWS_AS(mmd_distance(a, bad, mmd), DimensionError);
}

TEST_CASE("mmd equals the naive double-sum oracle") {
    Rng rng(17);
    Tensor a = gaussian_set(rng, 10, 4, 0.0);
    Tensor b = gaussian_set(rng, 10, 4, 1.0);

    DistanceKind lin = DistanceKind::parse("mmd_linear");
    const double lin_oracle =
        oracle::mmd_double_sum(to_rows(a), to_rows(b), [](const auto& x, const auto& y) {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
            return acc;
        });
    CHECK(mmd_distance(a, b, lin).item() == doctest::Approx(lin_oracle).epsilon(1e-10));

    DistanceKind rbf = DistanceKind::parse("mmd");
    const double med = median_sq_dist(a, b);
    const double rbf_oracle =
        oracle::mmd_double_sum(to_rows(a), to_rows(b), [&](const auto& x, const auto& y) {
            double acc = 0.0;
            for (double m : {0.25, 0.5, 1.0, 2.0, 4.0})
                acc += std::exp(-oracle::sq_dist(x, y) / (m * med));
            return acc / 5.0;
        });
    CHECK(mmd_distance(a, b, rbf).item() == doctest::Approx(rbf_oracle).epsilon(1e-10));
}

TEST_CASE("coral hand cases and oracle") {
    Rng rng(23);
    Tensor a = gaussian_set(rng, 8, 3, 0.0);
    CHECK(coral_distance(a, a).item() == doctest::Approx(0.0));

    // q=1: var({-1,1}) = 2 against var({0,0}) = 0 gives (2-0)^2 / 4 = 1.
    Tensor va = Tensor::from_data(2, 1, {-1.0, 1.0});
    Tensor vb = Tensor::from_data(2, 1, {0.0, 0.0});
    CHECK(coral_distance(va, vb).item() == doctest::Approx(1.0).epsilon(1e-12));

    Tensor b = gaussian_set(rng, 11, 3, 0.5, 1.5);
    CHECK(coral_distance(a, b).item() ==
          doctest::Approx(oracle::coral_naive(to_rows(a), to_rows(b))).epsilon(1e-10));

    Tensor single = Tensor::from_data(1, 3, {1, 2, 3});
    CHECK_THROWS_AS(coral_distance(single, a), DataError);
}

TEST_CASE("adversarial distance hand cases") {
    // All-zero weights keep the discriminator at 0.5 everywhere.
    Discriminator flat;
    flat.w1 = Tensor::zeros(1, 2);
    flat.b1 = Tensor::zeros(1, 2);
    flat.w2 = Tensor::zeros(2, 1);
    flat.b2 = Tensor::zeros(1, 1);
    Rng rng(3);
    Tensor a = gaussian_set(rng, 6, 1, 1.0);
    Tensor b = gaussian_set(rng, 6, 1, -1.0);
    CHECK(adversarial_distance(a, b, flat).item() ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    // Hand-built perfect separator: BCE collapses toward 0.
    Discriminator sharp;
    sharp.w1 = Tensor::from_data(1, 2, {10.0, -10.0});
    sharp.b1 = Tensor::zeros(1, 2);
    sharp.w2 = Tensor::from_data(2, 1, {10.0, -10.0});
    sharp.b2 = Tensor::zeros(1, 1);
    Tensor far_a = Tensor::full(4, 1, 5.0);
    Tensor far_b = Tensor::full(4, 1, -5.0);
    CHECK(adversarial_distance(far_a, far_b, sharp).item() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("adversarial training on identical sets settles at confusion") {
    Rng rng(9);
    Tensor a = gaussian_set(rng, 32, 2, 0.0);
    Discriminator disc = Discriminator::init(2, 4, 1);
    AdamOptimizer opt(disc.params(), {.lr = 0.01});
    double last = 0.0;
    for (int it = 0; it < 200; ++it) {
        opt.zero_grad();
        Tape tape;
        Tensor loss = adversarial_distance(a, a, disc);
        tape.backward(loss);
        opt.step();
        last = loss.item();
    }
    CHECK(last == doctest::Approx(2.0 * std::log(2.0)).epsilon(0.1));
}

TEST_CASE("symmetry within 1e-10") {
    Rng rng(31);
    Tensor a = gaussian_set(rng, 9, 3, 0.0);
    Tensor b = gaussian_set(rng, 14, 3, 0.8, 1.3);
    for (const char* name : {"cosine", "mmd", "mmd_linear", "coral"}) {
        DistanceKind kind = DistanceKind::parse(name);
        const double dab = distance(kind, a, b).item();
        const double dba = distance(kind, b, a).item();
        CHECK(std::abs(dab - dba) <= 1e-10);
    }
}

TEST_CASE("range and sign properties") {
    Rng rng(37);
    for (int rep = 0; rep < 8; ++rep) {
        Tensor a = gaussian_set(rng, 10, 2, rng.uniform(-1, 1));
        Tensor b = gaussian_set(rng, 10, 2, rng.uniform(-1, 1));
        CHECK(mmd_distance(a, b, DistanceKind::parse("mmd")).item() >= -1e-12);
        CHECK(coral_distance(a, b).item() >= 0.0);
        const double cos = cosine_distance(a, b).item();
        CHECK(cos >= 0.0);
        CHECK(cos <= 2.0);
    }
}

TEST_CASE("mmd grows with the mean gap") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        DistanceKind mmd = DistanceKind::parse("mmd");
        double prev = -1.0;
        for (double gap : {0.0, 1.0, 2.0, 4.0}) {
            Rng rng(100 + seed);
            Tensor a = gaussian_set(rng, 200, 1, 0.0);
            Tensor b = gaussian_set(rng, 200, 1, gap);
            const double d = mmd_distance(a, b, mmd).item();
            CHECK(d > prev);
            prev = d;
        }
    }
}

TEST_CASE("distances are differentiable w.r.t. sample values") {
    Rng rng(41);
    Tensor a0 = gaussian_set(rng, 5, 3, 0.2);
    Tensor b = gaussian_set(rng, 6, 3, -0.4);
    for (const char* name : {"cosine", "mmd", "mmd_linear", "coral"}) {
        DistanceKind kind = DistanceKind::parse(name);
        if (kind.id == DistanceId::kMmd) kind.fixed_bandwidth = median_bandwidth(a0, b);
        CHECK(grad_check([&](const Tensor& t) { return distance(kind, t, b); }, a0, 1e-5) < 1e-4);
        CHECK(grad_check([&](const Tensor& t) { return distance(kind, b, t); }, a0, 1e-5) < 1e-4);
    }

    // The adversarial kind reverses gradients flowing into the samples by
    // contract, so the analytic gradient must equal the negated central
    // difference of the value.
    Discriminator disc = Discriminator::init(3, 4, 7);
    auto f = [&](const Tensor& t) { return adversarial_distance(t, b, disc); };
    const auto fd = finite_difference_grad(f, a0, 1e-5);
    Tensor leaf = Tensor::from_data(a0.rows(), a0.cols(), a0.values()).set_requires_grad(true);
    {
        Tape tape;
        Tensor loss = f(leaf);
        tape.backward(loss);
    }
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double denom = std::max(1.0, std::abs(fd[i]));
        CHECK(std::abs(leaf.grad()[i] + fd[i]) / denom < 1e-4);
    }

    // Discriminator weights get plain minimizing gradients.
    Tensor a = a0;
    CHECK(grad_check(
              [&](const Tensor& w) {
                  Discriminator probe = disc;
                  probe.w1 = w;
                  return adversarial_distance(a, b, probe);
              },
              disc.w1, 1e-5) < 1e-4);
}

TEST_CASE("divergence indicator orientation") {
    DistanceKind mmd = DistanceKind::parse("mmd");
    CHECK(divergence_indicator(mmd, 0.37) == 0.37);
    DistanceKind adv = DistanceKind::parse("adv");
    CHECK(divergence_indicator(adv, 2.0 * std::log(2.0)) == doctest::Approx(0.0));
    CHECK(divergence_indicator(adv, 0.2) == doctest::Approx(2.0 * std::log(2.0) - 0.2));
    CHECK(divergence_indicator(adv, 5.0) == 0.0); // clamped
}

TEST_CASE("kind parsing") {
    for (const char* name : {"cosine", "mmd", "mmd_linear", "coral", "adv"}) {
        CHECK(DistanceKind::parse(name).name() == name);
    }
    CHECK_THROWS_AS(DistanceKind::parse("dtw"), ConfigError);
}
