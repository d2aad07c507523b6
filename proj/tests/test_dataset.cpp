#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fairsens/dataset.hpp"
#include "fairsens/error.hpp"
#include "fairsens/rng.hpp"

using namespace fairsens;

namespace {

// Independent transcription of the neighbor rule: full pairwise distances,
// minimizer set, uniform draw keyed by (tie_seed, row).
std::vector<std::int64_t> brute_force_nn(const Eigen::MatrixXd& pts, std::uint64_t tie_seed) {
    const auto n = pts.rows();
    std::vector<std::int64_t> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::int64_t> cands;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d2 = (pts.row(i) - pts.row(j)).squaredNorm();
            if (d2 < best) {
                best = d2;
                cands.assign(1, j);
            } else if (d2 == best) {
                cands.push_back(j);
            }
        }
        std::sort(cands.begin(), cands.end());
        const std::uint64_t h =
            rng::hash_key(tie_seed, static_cast<std::uint64_t>(rng::Stream::nn_tie_break),
                          static_cast<std::uint64_t>(i), 0);
        out[static_cast<std::size_t>(i)] =
            cands[static_cast<std::size_t>(rng::bounded(h, cands.size()))];
    }
    return out;
}

} // namespace

TEST_CASE("ranks: counting definitions") {
    {
        const std::vector<double> v{1.0, 3.0, 2.0};
        const RankVector r = ranks(v);
        CHECK(r.ranks == std::vector<std::int64_t>{1, 3, 2});
        CHECK(r.geq_counts == std::vector<std::int64_t>{3, 1, 2});
    }
    {
        const std::vector<double> v{1.0, 1.0, 2.0};
        const RankVector r = ranks(v);
        CHECK(r.ranks == std::vector<std::int64_t>{2, 2, 3});
        CHECK(r.geq_counts == std::vector<std::int64_t>{3, 3, 1});
    }
    {
        const std::vector<double> v{5.0};
        const RankVector r = ranks(v);
        CHECK(r.ranks == std::vector<std::int64_t>{1});
        CHECK(r.geq_counts == std::vector<std::int64_t>{1});
    }
    CHECK_THROWS_WITH_AS(ranks(std::vector<double>{}), doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("ranks: permutation property and monotone invariance") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 100);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = unif(gen);

        const RankVector r = ranks(v);
        std::vector<std::int64_t> sorted = r.ranks;
        std::sort(sorted.begin(), sorted.end());
        std::int64_t sum = 0;
        bool perm = true;
        for (int i = 0; i < n; ++i) {
            if (sorted[static_cast<std::size_t>(i)] != i + 1) perm = false;
            sum += r.ranks[static_cast<std::size_t>(i)];
            // tie-free: R_i + L_i = n + 1
            CHECK(r.ranks[static_cast<std::size_t>(i)] +
                      r.geq_counts[static_cast<std::size_t>(i)] ==
                  n + 1);
        }
        CHECK(perm);
        CHECK(sum == static_cast<std::int64_t>(n) * (n + 1) / 2);

        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(2.0 * v[i]) + 1.0;
        CHECK(ranks(w).ranks == r.ranks);
        CHECK(ranks(w).geq_counts == r.geq_counts);
    }
}

TEST_CASE("nearest_neighbors: hand instances") {
    {
        Eigen::MatrixXd p(3, 1);
        p << 0.0, 1.0, 3.0;
        const NeighborMap nm = nearest_neighbors(p, 0);
        CHECK(nm.nn_index == std::vector<std::int64_t>{1, 0, 1});
    }
    {
        // row 1 is equidistant from 0 and 2
        Eigen::MatrixXd p(3, 1);
        p << 0.0, 1.0, 2.0;
        const NeighborMap a = nearest_neighbors(p, 42);
        CHECK((a.nn_index[1] == 0 || a.nn_index[1] == 2));
        const NeighborMap b = nearest_neighbors(p, 42);
        CHECK(a.nn_index == b.nn_index); // same seed, same draw
        bool saw_other = false;
        for (std::uint64_t s = 0; s < 64; ++s)
            if (nearest_neighbors(p, s).nn_index[1] != a.nn_index[1]) saw_other = true;
        CHECK(saw_other); // both minimizers are reachable
    }
    {
        Eigen::MatrixXd p(3, 2);
        p << 0.0, 0.0, 3.0, 4.0, 0.0, 1.0;
        const NeighborMap nm = nearest_neighbors(p, 0);
        CHECK(nm.nn_index == std::vector<std::int64_t>{2, 2, 0});
    }
}

TEST_CASE("nearest_neighbors: errors") {
    Eigen::MatrixXd one(1, 1);
    one << 0.0;
    CHECK_THROWS_WITH_AS(nearest_neighbors(one, 0), doctest::Contains("TooFewRows"), Error);
    Eigen::MatrixXd bad(2, 1);
    bad << 0.0, std::nan("");
    CHECK_THROWS_WITH_AS(nearest_neighbors(bad, 0), doctest::Contains("NonFiniteInput"), Error);
}

TEST_CASE("nearest_neighbors: agrees with the brute-force oracle") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 199);
        const int d = 1 + static_cast<int>(gen() % 3);
        Eigen::MatrixXd p(n, d);
        const bool lattice = trial % 3 == 0; // force exact ties
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                p(i, j) = lattice ? static_cast<double>(gen() % 5) : unif(gen);
        const std::uint64_t seed = gen();
        CHECK(nearest_neighbors(p, seed).nn_index == brute_force_nn(p, seed));
    }
}

TEST_CASE("nearest_neighbors: permutation equivariance on tie-free points") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 60;
    Eigen::MatrixXd p(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) p(i, j) = unif(gen);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd q(n, 2);
    for (int i = 0; i < n; ++i) q.row(perm[static_cast<std::size_t>(i)]) = p.row(i);

    const auto nn_p = nearest_neighbors(p, 0).nn_index;
    const auto nn_q = nearest_neighbors(q, 0).nn_index;
    for (int i = 0; i < n; ++i)
        CHECK(nn_q[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] ==
              perm[static_cast<std::size_t>(nn_p[static_cast<std::size_t>(i)])]);
}

TEST_CASE("load_table: parses and assigns roles") {
    std::istringstream in("x,s,y\n1,0,2\n3,1,4\n");
    CsvSchema schema;
    schema.roles["x"] = Role::feature;
    schema.roles["s"] = Role::sensitive;
    schema.roles["y"] = Role::target;
    const DataTable t = load_table(in, schema);
    CHECK(t.n_rows() == 2);
    CHECK(t.column("x").values == std::vector<double>{1.0, 3.0});
    CHECK(t.column("s").role == Role::sensitive);
    CHECK(t.column("y").role == Role::target);
}

TEST_CASE("load_table: error contracts") {
    {
        std::istringstream in("a,b\n1,2\n");
        CsvSchema schema;
        schema.roles["missing"] = Role::sensitive;
        CHECK_THROWS_WITH_AS(load_table(in, schema), doctest::Contains("SchemaError"), Error);
    }
    {
        std::istringstream in("a,b\n1,abc\n");
        try {
            load_table(in, {});
            FAIL("expected ParseError");
        } catch (const Error& e) {
            CHECK(e.code() == errc::parse_error);
            CHECK(std::string(e.what()).find("row 1") != std::string::npos);
            CHECK(std::string(e.what()).find("'b'") != std::string::npos);
        }
    }
    {
        std::istringstream in("a,b\n1,2,3\n");
        CHECK_THROWS_WITH_AS(load_table(in, {}), doctest::Contains("ParseError"), Error);
    }
    {
        std::istringstream in("");
        CHECK_THROWS_WITH_AS(load_table(in, {}), doctest::Contains("EmptyInput"), Error);
    }
    {
        std::istringstream in("a,b\n");
        CHECK_THROWS_WITH_AS(load_table(in, {}), doctest::Contains("EmptyInput"), Error);
    }
}

TEST_CASE("load_table: quoted fields and CRLF") {
    std::istringstream in("\"a\",b\r\n\"1.5\",2\r\n-3e-2,\"4\"\r\n");
    const DataTable t = load_table(in, {});
    CHECK(t.column("a").values == std::vector<double>{1.5, -0.03});
    CHECK(t.column("b").values == std::vector<double>{2.0, 4.0});
}

TEST_CASE("DataTable: construction invariants") {
    CHECK_THROWS_WITH_AS(DataTable({{"a", Role::feature, {1.0}}, {"a", Role::target, {2.0}}}),
                         doctest::Contains("SchemaError"), Error);
    CHECK_THROWS_WITH_AS(
        DataTable({{"a", Role::feature, {1.0}}, {"b", Role::target, {2.0, 3.0}}}),
        doctest::Contains("LengthMismatch"), Error);
    CHECK_THROWS_WITH_AS(DataTable({{"a", Role::feature, {}}}), doctest::Contains("EmptyInput"),
                         Error);

    const DataTable t({{"a", Role::feature, {1.0, 2.0}}, {"b", Role::sensitive, {0.0, 1.0}}});
    CHECK(t.fingerprint() == t.fingerprint());
    const DataTable u({{"a", Role::feature, {1.0, 2.5}}, {"b", Role::sensitive, {0.0, 1.0}}});
    CHECK(t.fingerprint() != u.fingerprint());
}
