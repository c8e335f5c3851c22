#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmlab/modulation.hpp"
#include "cmlab/rng.hpp"

using namespace cmlab;

namespace {

int popcount3(uint8_t a, uint8_t b) {
    int d = 0;
    for (int k = 0; k < 3; ++k) d += ((a >> k) & 1) != ((b >> k) & 1);
    return d;
}

}  // namespace

TEST_CASE("8psk natural labeling follows the binary index") {
    Constellation c = build_8psk(Labeling::natural);
    CHECK(c.labels[5][0] == 1);
    CHECK(c.labels[5][1] == 0);
    CHECK(c.labels[5][2] == 1);
    for (int k = 0; k < 8; ++k) CHECK(c.label_value(k) == k);
}

TEST_CASE("8psk brgc labeling is the reflected gray sequence") {
    Constellation c = build_8psk(Labeling::brgc);
    const uint8_t expected[8] = {0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100};
    for (int k = 0; k < 8; ++k) CHECK(c.label_value(k) == expected[k]);
    // circular one-bit adjacency
    for (int k = 0; k < 8; ++k)
        CHECK(popcount3(c.label_value(k), c.label_value((k + 1) % 8)) == 1);
}

TEST_CASE("8psk has unit mean energy and bijective labels") {
    for (Labeling l : {Labeling::natural, Labeling::brgc}) {
        Constellation c = build_8psk(l);
        double e = 0.0;
        for (const Point& p : c.points) e += norm2(p);
        CHECK(std::abs(e / 8.0 - 1.0) < 1e-12);
        std::array<bool, 8> seen{};
        for (int k = 0; k < 8; ++k) seen[c.label_value(k)] = true;
        for (bool s : seen) CHECK(s);
        // |I_{l,k}| = M/2 at every bit level
        for (int k = 0; k < 3; ++k) {
            int zeros = 0;
            for (int i = 0; i < 8; ++i) zeros += c.labels[i][k] == 0;
            CHECK(zeros == 4);
        }
    }
}

TEST_CASE("map_bits maps triples via the labeling") {
    Constellation c = build_8psk(Labeling::natural);
    auto s = map_bits({0, 0, 0}, c);
    REQUIRE(s.size() == 1);
    CHECK(s[0].x == doctest::Approx(1.0));
    CHECK(s[0].y == doctest::Approx(0.0).epsilon(1e-12));

    auto two = map_bits({0, 0, 0, 0, 0, 0}, c);
    REQUIRE(two.size() == 2);
    CHECK(two[0].x == two[1].x);

    auto pair = map_bits({1, 0, 1, 0, 0, 1}, c);
    CHECK(norm2(pair[0] - c.points[5]) < 1e-24);
    CHECK(norm2(pair[1] - c.points[1]) < 1e-24);

    CHECK_THROWS_AS(map_bits({0, 1}, c), std::invalid_argument);
}

TEST_CASE("symbol log-likelihoods match a direct quadratic-form evaluation") {
    Constellation c = build_8psk(Labeling::natural);

    SUBCASE("received on a point maximizes that point") {
        SymbolLL ll = symbol_log_likelihoods(c.points[3], c, Covariance::isotropic(0.1));
        for (int i = 0; i < 8; ++i) CHECK(ll[3] >= ll[i]);
    }

    SUBCASE("perpendicular bisector ties the two neighbours") {
        Point mid = {0.5 * (c.points[0].x + c.points[1].x), 0.5 * (c.points[0].y + c.points[1].y)};
        SymbolLL ll = symbol_log_likelihoods(mid, c, Covariance::isotropic(0.1));
        CHECK(ll[0] == doctest::Approx(ll[1]).epsilon(1e-12));
    }

    SUBCASE("matches dense evaluation for a correlated covariance") {
        Covariance sigma(0.1, 0.03, 0.2);
        Point y{1.0, 0.0};
        SymbolLL ll = symbol_log_likelihoods(y, c, sigma);
        // independent 2x2 inverse via the adjugate
        double det = 0.1 * 0.2 - 0.03 * 0.03;
        double ixx = 0.2 / det, ixy = -0.03 / det, iyy = 0.1 / det;
        double raw[8];
        double mx = -1e300;
        for (int i = 0; i < 8; ++i) {
            double dx = y.x - c.points[i].x, dy = y.y - c.points[i].y;
            raw[i] = -0.5 * (dx * (ixx * dx + ixy * dy) + dy * (ixy * dx + iyy * dy));
            mx = std::max(mx, raw[i]);
        }
        for (int i = 0; i < 8; ++i) CHECK(ll[i] == doctest::Approx(raw[i] - mx).epsilon(1e-10));
    }

    SUBCASE("singular covariance is rejected") {
        CHECK_THROWS_AS(symbol_log_likelihoods(Point{1, 0}, c, Covariance(0.0, 0.0, 0.0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(symbol_log_likelihoods(Point{1, 0}, c, Covariance(1.0, 1.0, 1.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("bitwise llrs marginalize the symbol likelihoods") {
    Constellation c = build_8psk(Labeling::brgc);

    SUBCASE("uniform input gives zero llrs") {
        SymbolLL ll{};
        BitLlr l = bitwise_llrs(ll, c);
        for (double v : l) CHECK(v == doctest::Approx(0.0));
    }

    SUBCASE("dominant point reproduces its label") {
        for (int i = 0; i < 8; ++i) {
            SymbolLL ll{};
            ll.fill(-200.0);
            ll[i] = 0.0;
            BitLlr l = bitwise_llrs(ll, c);
            for (int k = 0; k < 3; ++k) CHECK((l[k] < 0) == (c.labels[i][k] == 1));
        }
    }

    SUBCASE("random vectors match probability-domain marginalization") {
        Rng rng(1234);
        for (int trial = 0; trial < 100; ++trial) {
            SymbolLL ll;
            for (double& v : ll) v = 4.0 * rng.gaussian();
            BitLlr l = bitwise_llrs(ll, c);
            for (int k = 0; k < 3; ++k) {
                long double p0 = 0, p1 = 0;
                for (int i = 0; i < 8; ++i)
                    (c.labels[i][k] == 0 ? p0 : p1) += std::exp((long double)ll[i]);
                CHECK(l[k] == doctest::Approx((double)(std::log(p0) - std::log(p1))).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("bit llrs are invariant to constant shifts of the symbol lls") {
    Constellation c = build_8psk(Labeling::natural);
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        SymbolLL ll;
        for (double& v : ll) v = 3.0 * rng.gaussian();
        double shift = 10.0 * rng.gaussian();
        SymbolLL shifted = ll;
        for (double& v : shifted) v += shift;
        BitLlr a = bitwise_llrs(ll, c), b = bitwise_llrs(shifted, c);
        for (int k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
    }
}

TEST_CASE("hard demap picks the nearest point, low index on ties") {
    Constellation c = build_8psk(Labeling::natural);
    Point y{1.01 * c.points[4].x, 1.01 * c.points[4].y};
    CHECK(hard_demap(y, c).index == 4);

    // origin is an exact 8-way tie in double arithmetic
    for (int i = 0; i < 8; ++i) REQUIRE(norm2(Point{0, 0} - c.points[i]) == 1.0);
    CHECK(hard_demap(Point{0, 0}, c).index == 0);

    // a bisector point resolves to one of its two nearest neighbours
    Point mid = {0.5 * (c.points[0].x + c.points[1].x), 0.5 * (c.points[0].y + c.points[1].y)};
    int idx = hard_demap(mid, c).index;
    CHECK((idx == 0 || idx == 1));
}

TEST_CASE("hard demap agrees with the ll argmax under circular noise") {
    Constellation c = build_8psk(Labeling::brgc);
    Covariance sigma = Covariance::isotropic(0.05);
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Point y{2.0 * rng.gaussian(), 2.0 * rng.gaussian()};
        SymbolLL ll = symbol_log_likelihoods(y, c, sigma);
        int am = 0;
        for (int i = 1; i < 8; ++i)
            if (ll[i] > ll[am]) am = i;
        CHECK(hard_demap(y, c).index == am);
    }
}

TEST_CASE("pre-FEC BER at 20 dB is below 1e-3") {
    Constellation c = build_8psk(Labeling::natural);
    Rng rng(42);
    Bits bits = rng.bits(3 * 20000);
    auto tx = map_bits(bits, c);
    Covariance sigma(0.005, 0.0, 0.005);  // 20 dB circular
    size_t errors = 0;
    Rng noise(43);
    for (size_t i = 0; i < tx.size(); ++i) {
        Point y = tx[i] + Point{std::sqrt(0.005) * noise.gaussian(), std::sqrt(0.005) * noise.gaussian()};
        HardDecision hd = hard_demap(y, c);
        for (int k = 0; k < 3; ++k) errors += hd.bits[k] != bits[3 * i + k];
    }
    CHECK(static_cast<double>(errors) / static_cast<double>(bits.size()) < 1e-3);
}
