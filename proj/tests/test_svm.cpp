#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "vfdet/errors.hpp"
#include "vfdet/rng.hpp"
#include "vfdet/svm.hpp"

using namespace vfdet;

namespace {

Dataset from_rows(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    Dataset d;
    for (std::size_t i = 0; i < rows.size(); ++i) d.append_row(rows[i], labels[i], "");
    return d;
}

// Random small problem with both classes present.
void random_problem(std::uint64_t seed, std::size_t n, std::vector<std::vector<double>>& x,
                    std::vector<int>& y) {
    Rng rng(seed);
    x.assign(n, std::vector<double>(2));
    y.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i][0] = rng.uniform(-1.0, 1.0);
        x[i][1] = rng.uniform(-1.0, 1.0);
        y[i] = rng.below(2) == 0 ? +1 : -1;
    }
    y[0] = +1;  // force both classes
    y[1] = -1;
}

}  // namespace

TEST_CASE("rbf kernel hand values and bounds") {
    const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};
    CHECK(rbf_kernel(a, a, 45.0) == doctest::Approx(1.0));
    CHECK(rbf_kernel(a, b, 0.0) == doctest::Approx(1.0));
    CHECK(rbf_kernel(a, b, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(rbf_kernel(a, b, 0.5) == doctest::Approx(0.367879).epsilon(1e-5));
    CHECK_THROWS_AS(rbf_kernel(a, std::vector<double>{1.0}, 1.0), InputError);
    CHECK_THROWS_AS(rbf_kernel(a, b, -1.0), InputError);
}

TEST_CASE("kernel matrices are symmetric positive semi-definite") {
    // Smallest eigenvalue via shifted inverse power is overkill; use the
    // equivalent Cholesky-with-jitter criterion: K + 1e-8 I factors.
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 20;
        std::vector<std::vector<double>> pts(n, std::vector<double>(3));
        for (auto& p : pts)
            for (auto& v : p) v = rng.uniform(-2.0, 2.0);
        std::vector<std::vector<double>> k(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf_kernel(pts[i], pts[j], 1.5);

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(k[i][j] == doctest::Approx(k[j][i]));

        auto chol = k;
        for (std::size_t i = 0; i < n; ++i) chol[i][i] += 1e-8;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = chol[i][j];
                for (std::size_t p = 0; p < j; ++p) s -= chol[i][p] * chol[j][p];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    chol[i][i] = std::sqrt(s);
                } else {
                    chol[i][j] = s / chol[j][j];
                }
            }
        }
        CHECK(ok);
    }
}

TEST_CASE("two-point problem separates with antisymmetric decisions") {
    const auto data = from_rows({{-1.0}, {1.0}}, {-1, +1});
    SvmTrainConfig cfg;
    cfg.c = 1000.0;
    cfg.gamma = 1.0;
    const auto model = train_svm(data, cfg);

    const auto neg = predict(model, std::vector<double>{-1.0});
    const auto pos = predict(model, std::vector<double>{1.0});
    CHECK(neg.label == -1);
    CHECK(pos.label == +1);
    CHECK(neg.decision_value == doctest::Approx(-pos.decision_value).epsilon(1e-6));
    CHECK(model.n_sv == 2);
    for (double d : model.dual_coefficients) CHECK(std::abs(d) <= cfg.c + 1e-9);
}

TEST_CASE("the XOR set is fit exactly with an RBF") {
    const auto data =
        from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {+1, +1, -1, -1});
    SvmTrainConfig cfg;
    cfg.c = 10.0;
    cfg.gamma = 1.0;
    const auto model = train_svm(data, cfg);
    for (std::size_t i = 0; i < data.n_rows; ++i)
        CHECK(predict(model, data.row(i)).label == data.labels[i]);
}

TEST_CASE("zero duals reduce prediction to the bias sign") {
    SvmModel m;
    m.dim = 2;
    m.n_sv = 1;
    m.support_vectors = {0.0, 0.0};
    m.dual_coefficients = {0.0};
    m.bias = 0.5;
    m.gamma = 1.0;
    CHECK(predict(m, std::vector<double>{9.0, -4.0}).label == +1);
    CHECK(predict(m, std::vector<double>{9.0, -4.0}).decision_value == doctest::Approx(0.5));
    m.bias = 0.0;  // exact zero decision goes to the positive class
    CHECK(predict(m, std::vector<double>{1.0, 1.0}).label == +1);
}

TEST_CASE("training rejects degenerate inputs") {
    const auto one_class = from_rows({{0.0}, {1.0}}, {+1, +1});
    CHECK_THROWS_AS(train_svm(one_class, {}), InputError);

    auto bad_label = from_rows({{0.0}, {1.0}}, {+1, -1});
    bad_label.labels[1] = 3;
    CHECK_THROWS_AS(train_svm(bad_label, {}), InputError);

    SvmTrainConfig cfg;
    cfg.c = 0.0;
    CHECK_THROWS_AS(train_svm(from_rows({{0.0}, {1.0}}, {+1, -1}), cfg), InputError);
}

TEST_CASE("dual solution matches the projected-gradient reference") {
    // Random problems of up to 12 points across seeds and (C, gamma) values;
    // objectives agree to 1e-4 relative and held-out decisions to 1e-3.
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        random_problem(seed, 4 + seed % 9, x, y);

        for (const auto& [c, gamma] : std::vector<std::pair<double, double>>{
                 {1.0, 1.0}, {10.0, 2.0}}) {
            const auto data = from_rows(x, y);
            SvmTrainConfig cfg;
            cfg.c = c;
            cfg.gamma = gamma;
            cfg.tolerance = 1e-4;
            std::vector<double> alphas;
            const auto model = train_svm(data, cfg, &alphas);
            const auto ref = oracle::solve_svm_dual(x, y, c, gamma);

            const double smo_obj = dual_objective(data, alphas, gamma);
            CHECK(smo_obj ==
                  doctest::Approx(ref.objective).epsilon(1e-4).scale(1.0));

            Rng probe(seed * 31);
            for (int p = 0; p < 8; ++p) {
                const std::vector<double> pt{probe.uniform(-1.2, 1.2), probe.uniform(-1.2, 1.2)};
                const double got = predict(model, pt).decision_value;
                const double want = oracle::oracle_decision(x, y, ref, gamma, pt);
                CHECK(got == doctest::Approx(want).epsilon(1e-3).scale(1.0));
            }
            ++checked;
        }
    }
    CHECK(checked == 50);
}

TEST_CASE("trained models satisfy the dual constraints") {
    for (std::uint64_t seed = 3; seed <= 8; ++seed) {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        random_problem(seed, 30, x, y);
        const auto data = from_rows(x, y);
        SvmTrainConfig cfg;
        cfg.c = 10.0;
        cfg.gamma = 3.0;
        std::vector<double> alphas;
        const auto model = train_svm(data, cfg, &alphas);

        double balance = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            CHECK(alphas[i] >= -1e-12);
            CHECK(alphas[i] <= cfg.c + 1e-12);
            balance += alphas[i] * y[i];
        }
        CHECK(std::abs(balance) <= 1e-6);

        // margin vectors sit on the margin
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (alphas[i] > 1e-8 && alphas[i] < cfg.c - 1e-8) {
                const double margin = y[i] * predict(model, x[i]).decision_value;
                CHECK(std::abs(margin - 1.0) <= 10 * cfg.tolerance);
            }
        }

        // every stored support vector carries a nonzero coefficient
        for (std::size_t s = 0; s < model.n_sv; ++s)
            CHECK(std::abs(model.dual_coefficients[s]) > 0.0);
    }
}

TEST_CASE("prediction is invariant to support-vector storage order") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    random_problem(17, 20, x, y);
    SvmTrainConfig cfg;
    cfg.c = 5.0;
    cfg.gamma = 2.0;
    const auto model = train_svm(from_rows(x, y), cfg);
    REQUIRE(model.n_sv >= 2);

    auto reversed = model;
    for (std::size_t i = 0; i < model.n_sv; ++i) {
        const auto sv = model.support_vector(model.n_sv - 1 - i);
        std::copy(sv.begin(), sv.end(),
                  reversed.support_vectors.begin() + static_cast<std::ptrdiff_t>(i * model.dim));
        reversed.dual_coefficients[i] = model.dual_coefficients[model.n_sv - 1 - i];
    }
    const std::vector<double> probe{0.3, -0.8};
    CHECK(predict(reversed, probe).decision_value ==
          doctest::Approx(predict(model, probe).decision_value).epsilon(1e-12));
}

TEST_CASE("prediction accepts full rows through the embedded mask") {
    auto data = from_rows({{0.0, 5.0}, {1.0, 5.0}, {0.2, 5.0}, {0.9, 5.0}}, {-1, +1, -1, +1});
    SvmTrainConfig cfg;
    cfg.gamma = 2.0;
    cfg.c = 100.0;
    auto model = train_svm(data, cfg);
    CHECK_THROWS_AS(predict(model, std::vector<double>{1.0, 2.0, 3.0}), InputError);

    // Same data as the tail of a wider feature space, selected by a mask.
    model.mask.selected_indices = {1, 3};
    model.mask.fraction = 0.5;
    model.mask.full_dim = 4;
    const auto full = predict(model, std::vector<double>{-9.0, 0.95, -9.0, 5.0});
    const auto direct = predict(model, std::vector<double>{0.95, 5.0});
    CHECK(full.label == direct.label);
    CHECK(full.decision_value == doctest::Approx(direct.decision_value));
    CHECK_THROWS_AS(predict(model, std::vector<double>{1.0, 2.0, 3.0}), InputError);
}

namespace {

// Deterministic ring dataset: class +1 inside the unit circle, -1 outside.
Dataset ring_data(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = i % 2 == 0 ? rng.uniform(0.0, 0.8) : rng.uniform(1.2, 2.0);
        const double th = rng.uniform(0.0, 6.28318);
        d.append_row(std::vector<double>{r * std::cos(th), r * std::sin(th)},
                     i % 2 == 0 ? +1 : -1, "");
    }
    return d;
}

}  // namespace

TEST_CASE("grid search scans every point and picks the validation argmax") {
    const auto train = ring_data(80, 1);
    const auto validation = ring_data(60, 2);

    GridSearchSpec spec;
    spec.c_values = {0.5, 5.0, 50.0};
    spec.gamma_values = {0.05, 1.0, 4.0};
    spec.jobs = 3;
    const auto result = grid_search(train, validation, spec);
    REQUIRE(result.points.size() == 9);

    // report order is row-major over (c, gamma)
    for (std::size_t ci = 0; ci < 3; ++ci)
        for (std::size_t gi = 0; gi < 3; ++gi) {
            CHECK(result.points[ci * 3 + gi].c == spec.c_values[ci]);
            CHECK(result.points[ci * 3 + gi].gamma == spec.gamma_values[gi]);
        }

    // independent re-evaluation: best is the first strict maximum
    std::size_t best = 0;
    for (std::size_t p = 1; p < result.points.size(); ++p)
        if (result.points[p].objective_value > result.points[best].objective_value) best = p;
    CHECK(result.best_c == result.points[best].c);
    CHECK(result.best_gamma == result.points[best].gamma);

    // every point's report is self-consistent
    for (const auto& p : result.points) {
        if (p.sensitivity > 0 && p.specificity > 0)
            CHECK(p.g_mean == doctest::Approx(std::sqrt(p.sensitivity * p.specificity)));
        CHECK(p.objective_value == p.g_mean);
    }

    // a sane RBF setting separates rings; the degenerate gamma should lose
    CHECK(result.points[best].g_mean > 0.9);
}

TEST_CASE("grid search respects the accuracy objective and single points") {
    const auto train = ring_data(40, 3);
    const auto validation = ring_data(30, 4);
    GridSearchSpec spec;
    spec.c_values = {10.0};
    spec.gamma_values = {2.0};
    spec.objective = GridObjective::Accuracy;
    const auto result = grid_search(train, validation, spec);
    REQUIRE(result.points.size() == 1);
    CHECK(result.best_c == 10.0);
    CHECK(result.best_gamma == 2.0);
    CHECK(result.points[0].objective_value == result.points[0].accuracy);

    GridSearchSpec empty;
    empty.c_values.clear();
    CHECK_THROWS_AS(grid_search(train, validation, empty), InputError);
    CHECK_THROWS_AS(grid_search(train, Dataset{}, spec), InputError);
}

TEST_CASE("subsample split is per-class, seeded, and clamped") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(+1);
    for (int i = 0; i < 100; ++i) labels.push_back(-1);

    const auto split = subsample_split(labels, 10, 30, 5);
    CHECK(split.train_indices.size() == 40);
    CHECK(split.validation_indices.size() == 100);
    CHECK(std::is_sorted(split.train_indices.begin(), split.train_indices.end()));
    CHECK(std::is_sorted(split.validation_indices.begin(), split.validation_indices.end()));

    std::size_t train_vf = 0, train_not = 0;
    for (auto i : split.train_indices) (labels[i] == +1 ? train_vf : train_not) += 1;
    CHECK(train_vf == 10);
    CHECK(train_not == 30);

    // partition: every index exactly once
    std::vector<int> seen(labels.size(), 0);
    for (auto i : split.train_indices) seen[i] += 1;
    for (auto i : split.validation_indices) seen[i] += 1;
    for (int s : seen) CHECK(s == 1);

    // oversized requests leave at least one validation sample per class
    const auto clamped = subsample_split(labels, 1000, 1000, 5);
    std::size_t vf_train = 0;
    for (auto i : clamped.train_indices)
        if (labels[i] == +1) ++vf_train;
    CHECK(vf_train == 39);
    CHECK(clamped.train_indices.size() == 39 + 99);

    // determinism + seed sensitivity
    const auto again = subsample_split(labels, 10, 30, 5);
    CHECK(again.train_indices == split.train_indices);
    const auto other = subsample_split(labels, 10, 30, 6);
    CHECK(other.train_indices != split.train_indices);
}
