#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rcfo/modem.hpp"

using namespace rcfo;
using cd = std::complex<double>;

namespace {

CVector<double> random_vector(int n, std::uint64_t seed) {
    Rng rng(seed);
    CVector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = complex_gaussian<double>(rng, 1.0);
    return v;
}

double rel_err(const CVector<double>& a, const CVector<double>& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("16-PSK points follow the angular index order") {
    const std::vector<int> idx{0, 4, 8};
    const auto pts = map_symbols<double>(idx, Constellation::psk(16));
    CHECK(pts[0] == cd(1, 0));
    CHECK(pts[1] == cd(0, 1));
    CHECK(pts[2] == cd(-1, 0));

    const std::vector<int> one{3};
    CHECK(std::abs(map_symbols<double>(one, Constellation::psk(16))[0] - std::polar(1.0, 2 * oracle::pi * 3 / 16)) < 1e-15);
}

TEST_CASE("out-of-range symbol indices are rejected") {
    const std::vector<int> bad{16};
    CHECK_THROWS_AS(map_symbols<double>(bad, Constellation::psk(16)), std::invalid_argument);
    const std::vector<int> neg{-1};
    CHECK_THROWS_AS(map_symbols<double>(neg, Constellation::qam(16)), std::invalid_argument);
    const std::vector<int> ok{0};
    CHECK_THROWS_AS(map_symbols<double>(ok, Constellation::qam(8)), std::invalid_argument);
}

TEST_CASE("every constellation has unit average power") {
    for (const auto c : {Constellation::psk(2), Constellation::psk(4), Constellation::psk(8), Constellation::psk(16),
                         Constellation::qam(4), Constellation::qam(16), Constellation::qam(64), Constellation::qam(256)}) {
        std::vector<int> all(static_cast<std::size_t>(c.order));
        for (int i = 0; i < c.order; ++i) all[static_cast<std::size_t>(i)] = i;
        const auto pts = map_symbols<double>(all, c);
        CHECK(pts.squaredNorm() / c.order == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("modulate_block") {
    SUBCASE("all-zero block gives all-zero samples") {
        const SystemConfig cfg = make_config(8, 2, 1, 2);
        const auto out = modulate_block<double>(CVector<double>::Zero(8), cfg);
        CHECK(out.size() == 10);
        CHECK(out.isZero(0.0));
    }
    SUBCASE("DC tone is a constant 1/sqrt(N)") {
        const SystemConfig cfg = make_config(8, 2, 1, 2);
        CVector<double> x = CVector<double>::Zero(8);
        x[0] = 1.0;
        const auto out = modulate_block<double>(x, cfg);
        REQUIRE(out.size() == 10);
        for (Eigen::Index i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - cd(1.0 / std::sqrt(8.0))) < 1e-15);
    }
    SUBCASE("body matches the direct DFT and keeps the energy") {
        const SystemConfig cfg = make_config(64, 16, 1, 2);
        const auto x = random_vector(64, 11);
        const auto out = modulate_block<double>(x, cfg);
        const std::vector<cd> ref = oracle::direct_dft(std::vector<cd>(x.data(), x.data() + 64), +1);
        for (int i = 0; i < 64; ++i) CHECK(std::abs(out[16 + i] - ref[static_cast<std::size_t>(i)]) < 1e-12);
        CHECK(out.tail(64).squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
    }
    SUBCASE("cyclic prefix is a bit-exact copy of the tail") {
        const SystemConfig cfg = make_config(64, 16, 1, 2);
        const auto out = modulate_block<double>(random_vector(64, 5), cfg);
        for (int i = 0; i < 16; ++i) CHECK(out[i] == out[64 + i]);
    }
    SUBCASE("nonzero value on a null tone is rejected") {
        SystemConfig cfg = make_config(8, 2, 1, 2);
        cfg.roles.assign(8, Role::Pilot);
        cfg.roles[3] = Role::Null;
        CVector<double> x = CVector<double>::Ones(8);
        CHECK_THROWS_AS(modulate_block<double>(x, cfg), std::invalid_argument);
        x[3] = 0.0;
        CHECK_NOTHROW(modulate_block<double>(x, cfg));
    }
}

TEST_CASE("demodulate_block") {
    SUBCASE("inverts modulate_block") {
        for (int n : {8, 64, 512}) {
            const SystemConfig cfg = make_config(n, n / 8, 1, 2);
            const auto x = random_vector(n, static_cast<std::uint64_t>(n));
            CHECK(rel_err(demodulate_block<double>(modulate_block<double>(x, cfg), cfg), x) < 1e-12);
        }
    }
    SUBCASE("constant 1/sqrt(8) becomes a unit DC tone") {
        const SystemConfig cfg = make_config(8, 2, 1, 2);
        const CVector<double> s = CVector<double>::Constant(10, cd(1.0 / std::sqrt(8.0)));
        const auto x = demodulate_block<double>(s, cfg);
        CHECK(std::abs(x[0] - cd(1.0)) < 1e-15);
        for (int k = 1; k < 8; ++k) CHECK(std::abs(x[k]) < 1e-15);
    }
    SUBCASE("impulse has a flat spectrum") {
        const SystemConfig cfg = make_config(64, 8, 1, 2);
        CVector<double> s = CVector<double>::Zero(72);
        s[8] = 1.0;
        const auto x = demodulate_block<double>(s, cfg);
        for (int k = 0; k < 64; ++k) CHECK(std::abs(x[k] - cd(1.0 / 8.0)) < 1e-15);
    }
    SUBCASE("forward transform agrees with the direct DFT") {
        const SystemConfig cfg = make_config(64, 0, 1, 2);
        const auto s = random_vector(64, 3);
        const auto x = demodulate_block<double>(s, cfg);
        const auto ref = oracle::direct_dft(std::vector<cd>(s.data(), s.data() + 64), -1);
        for (int k = 0; k < 64; ++k) CHECK(std::abs(x[k] - ref[static_cast<std::size_t>(k)]) < 1e-12);
    }
    SUBCASE("wrong length is rejected") {
        const SystemConfig cfg = make_config(8, 2, 1, 2);
        CHECK_THROWS_AS(demodulate_block<double>(CVector<double>::Zero(8), cfg), std::invalid_argument);
    }
}

TEST_CASE("frame round trip and Parseval on random frames") {
    for (int n : {8, 64, 512}) {
        SystemConfig cfg = make_config(n, n / 4, 3, 2);
        Rng rng(static_cast<std::uint64_t>(n) + 99);
        const auto x = random_blocks<double>(cfg, rng);
        const auto frame = modulate_frame(x, cfg);
        CHECK(frame.size() == 3 * (n + n / 4));
        const auto back = demodulate_frame(frame, cfg);
        CHECK((back - x).norm() / x.norm() < 1e-12);
        for (int l = 0; l < 3; ++l) {
            const double body = frame.segment(l * cfg.n_b() + cfg.n_g, n).squaredNorm();
            CHECK(body == doctest::Approx(x.row(l).squaredNorm()).epsilon(1e-12));
        }
    }
}

TEST_CASE("random_blocks keeps null tones at zero") {
    SystemConfig cfg = make_config(16, 4, 4, 2);
    cfg.roles.assign(16, Role::Pilot);
    cfg.roles[0] = Role::Null;
    cfg.roles[9] = Role::Null;
    Rng rng(1);
    const auto x = random_blocks<double>(cfg, rng);
    CHECK(x.col(0).isZero(0.0));
    CHECK(x.col(9).isZero(0.0));
    CHECK(x.col(1).cwiseAbs().minCoeff() == doctest::Approx(1.0));
}
