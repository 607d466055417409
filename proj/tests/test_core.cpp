#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gmm/core.hpp"
#include "support.hpp"

using namespace gmm;
using gmm::test::R;

namespace {

Ecosystem twins() { return Ecosystem::from_reserves({{R("100"), R("400000")}, {R("100"), R("400000")}}); }

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

} // namespace

TEST_CASE("parse_decimal is exact and strict")
{
    CHECK(parse_decimal("44444.44") == Rational(4444444, 100));
    CHECK(parse_decimal("-0.5") == Rational(-1, 2));
    CHECK(parse_decimal("3e-4") == Rational(3, 10000));
    CHECK(parse_decimal("1.5E3") == Rational(1500));
    CHECK(parse_decimal(".25") == Rational(1, 4));
    CHECK(parse_decimal("0.0123") == Rational(123, 10000));
    CHECK(parse_decimal("0.08") == Rational(2, 25));
    CHECK(parse_decimal("007") == 7);
    CHECK(parse_decimal("0.000") == 0);
    CHECK_THROWS_AS(parse_decimal("1,000"), DomainError);
    CHECK_THROWS_AS(parse_decimal(""), DomainError);
    CHECK_THROWS_AS(parse_decimal("0x10"), DomainError);
    CHECK_THROWS_AS(parse_decimal("1e"), DomainError);
    CHECK_THROWS_AS(parse_decimal(" 1"), DomainError);
}

TEST_CASE("rational square root")
{
    CHECK(num_sqrt(Rational(9, 4)) == Rational(3, 2));
    CHECK(num_sqrt(Rational(0)) == 0);
    const Rational two = num_sqrt(Rational(2));
    CHECK(two * two < 2);
    CHECK(std::fabs(to_double(two) - std::sqrt(2.0)) < 1e-15);
    CHECK_THROWS_AS(num_sqrt(Rational(-1)), DomainError);
}

TEST_CASE("surd_sign decides a*sqrt(s) + b exactly")
{
    CHECK(surd_sign(Rational(1), Rational(-2), Rational(4)) == 0);
    CHECK(surd_sign(Rational(1), Rational(-2), Rational(5)) == 1);
    CHECK(surd_sign(Rational(-1), Rational(2), Rational(5)) == -1);
    CHECK(surd_sign(Rational(-1), Rational(2), Rational(3)) == 1);
    CHECK(surd_sign(Rational(0), Rational(0), Rational(3)) == 0);
    CHECK(surd_sign(Rational(2), Rational(0), Rational(0)) == 0);
}

TEST_CASE("pool and ecosystem validation")
{
    CHECK_THROWS_AS(Pool("p", Rational(0), Rational(1)), DomainError);
    CHECK_THROWS_AS(Pool("p", Rational(1), Rational(-1)), DomainError);
    CHECK_THROWS_AS(Ecosystem(std::vector<Pool>{}), DomainError);
    CHECK_THROWS_AS(Ecosystem({Pool("a", Rational(1), Rational(1)), Pool("a", Rational(2), Rational(2))}),
                    DomainError);
    const auto eco = twins();
    CHECK(eco.total_x() == 200);
    CHECK(eco.total_y() == 800000);
    CHECK(eco.ratio() == 4000);
    CHECK(eco.others_x(0) == 100);
    CHECK(eco.index_of("AMM2") == std::optional<std::size_t>(1));
    CHECK_THROWS_AS(eco.pool(2), DomainError);
}

TEST_CASE("cpmm_out examples")
{
    // 44,444.44 UST (exactly 400000/9) into (400,000 UST, 100 ETH) buys 10 ETH.
    CHECK(cpmm_out(R("400000") / 9, R("400000"), R("100")) == 10);
    CHECK(std::fabs(to_double(cpmm_out(R("44444.44"), R("400000"), R("100"))) - 10.0) < 1e-5);
    CHECK(cpmm_out(Rational(0), R("400000"), R("100")) == 0);
    CHECK(rel_diff(to_double(cpmm_out(R("60000"), R("400000"), R("100"))), 13.0435) < 1e-5);
    CHECK(cpmm_out(R("250"), R("250"), R("250")) == R("125"));
    CHECK_THROWS_AS(cpmm_out(Rational(1), Rational(0), Rational(1)), DomainError);
    CHECK_THROWS_AS(cpmm_out(Rational(-1), Rational(1), Rational(1)), DomainError);
}

TEST_CASE("cpmm conserves the product exactly")
{
    test::RandomRationals rng(11);
    for (int i = 0; i < 2000; ++i)
    {
        const Rational x = rng.log_uniform(-3, 7);
        const Rational y = rng.log_uniform(-3, 7);
        const Rational dx = rng.log_uniform(-6, 8);
        const Rational out = cpmm_out(dx, x, y);
        REQUIRE(out < y);
        REQUIRE((x + dx) * (y - out) == x * y);
    }
}

TEST_CASE("cpmm_in_for_out inverts cpmm_out")
{
    const Rational dx = cpmm_in_for_out(R("5"), R("400000"), R("100"));
    CHECK(cpmm_out(dx, R("400000"), R("100")) == 5);
    CHECK_THROWS_AS(cpmm_in_for_out(R("100"), R("1"), R("100")), DomainError);
}

TEST_CASE("ngmm_out examples")
{
    const auto eco = Ecosystem::from_reserves({{R("90"), R("4000000") / 9}, {R("100"), R("400000")}});
    CHECK(eco.total_x() == 190);
    CHECK(std::fabs(to_double(ngmm_out(R("10"), eco, 0)) - 42222.22) < 0.01);
    CHECK(ngmm_out(Rational(0), eco, 0) == 0);
    const auto tiny = Ecosystem::from_reserves({{R("90"), R("5")}, {R("100"), R("844439")}});
    CHECK(ngmm_out(R("10"), tiny, 0) == 5);
    CHECK_THROWS_AS(ngmm_out(R("-1"), eco, 0), DomainError);
}

TEST_CASE("classify_swap examples")
{
    // Equal ratios: divergent (sending UST, so the relabeled view is quoted).
    CHECK(classify_swap(R("44444"), twins().relabeled(), 0) == SwapClass::Divergent);
    const auto part6 = Ecosystem::from_reserves({{R("90"), R("444444")}, {R("100"), R("400000")}});
    CHECK(classify_swap(R("10"), part6, 0) == SwapClass::Convergent);
    const auto over = Ecosystem::from_reserves({{R("100"), R("500000")}, {R("1000"), R("4000000")}});
    CHECK(classify_swap(R("50"), over, 0) == SwapClass::Overshooting);
    CHECK(classify_swap(R("20"), over, 0) == SwapClass::Convergent);
    // Boundary dx = 25: prices coincide and the tie is labeled convergent.
    CHECK(ngmm_out(R("25"), over, 0) == cpmm_out(R("25"), R("100"), R("500000")));
    CHECK(classify_swap(R("25"), over, 0) == SwapClass::Convergent);
    CHECK(classify_swap(R("5"), Ecosystem::from_reserves({{R("1"), R("9")}}), 0) == SwapClass::Divergent);
}

TEST_CASE("overshooting fixture values")
{
    const auto over = Ecosystem::from_reserves({{R("100"), R("500000")}, {R("1000"), R("4000000")}});
    CHECK(std::fabs(to_double(ngmm_out(R("50"), over, 0)) - 195652.17) < 0.01);
    CHECK(std::fabs(to_double(cpmm_out(R("50"), R("100"), R("500000"))) - 166666.67) < 0.01);
    const auto q = gmm_out(R("50"), over, 0);
    CHECK(q.branch == Branch::LocalCpmm);
    CHECK(q.amount_out == cpmm_out(R("50"), R("100"), R("500000")));
}

TEST_CASE("gmm_out examples")
{
    auto q = gmm_out(R("44444"), twins().relabeled(), 0);
    CHECK(q.branch == Branch::LocalCpmm);
    CHECK(std::fabs(to_double(q.amount_out) - 10.0) < 1e-3);
    CHECK(std::fabs(to_double(ngmm_out(R("44444"), twins().relabeled(), 0)) - 10.53) < 0.005);

    const auto part6 = Ecosystem::from_reserves({{R("90"), R("444444")}, {R("100"), R("400000")}});
    q = gmm_out(R("10"), part6, 0);
    CHECK(q.branch == Branch::GlobalNgmm);
    CHECK(std::fabs(to_double(q.amount_out) - 42222) < 1);
}

TEST_CASE("gmm dominance and branch consistency on random inputs")
{
    test::RandomRationals rng(12);
    for (int i = 0; i < 2000; ++i)
    {
        const auto eco = rng.ecosystem(2 + rng.below(4));
        const std::size_t p = rng.below(eco.size());
        const Rational dx = eco.pool(p).x() * rng.log_uniform(-4, 1);
        const auto q = gmm_out(dx, eco, p);
        const Rational c = cpmm_out(dx, eco.pool(p).x(), eco.pool(p).y());
        const Rational n = ngmm_out(dx, eco, p);
        REQUIRE(q.amount_out <= c);
        REQUIRE(q.amount_out <= n);
        REQUIRE((q.branch == Branch::GlobalNgmm) == (q.classification == SwapClass::Convergent));
        if (q.classification != SwapClass::Convergent)
            REQUIRE(q.amount_out == c);
        if (eco.pool(p).y() * eco.others_x(p) <= eco.others_y(p) * eco.pool(p).x() && dx > 0)
            REQUIRE(q.branch == Branch::LocalCpmm);
        REQUIRE(q.amount_out < eco.pool(p).y());
    }
}

TEST_CASE("apply_swap examples")
{
    auto res = apply_swap(twins(), SwapOrder{0, Asset::Y, R("400000") / 9, SenderTag::Trader}, Algorithm::Cpmm);
    CHECK(res.ecosystem.pool(0).x() == 90);
    CHECK(res.ecosystem.pool(0).y() == R("4000000") / 9);
    CHECK(res.ecosystem.pool(1) == twins().pool(1));

    const auto before = twins();
    res = apply_swap(before, SwapOrder{1, Asset::X, Rational(0), SenderTag::Trader}, Algorithm::Gmm);
    CHECK(res.ecosystem == before);
    CHECK(res.quote.amount_out == 0);

    res = apply_swap(twins(), SwapOrder{0, Asset::X, R("10"), SenderTag::Trader}, Algorithm::Ngmm);
    CHECK(res.ecosystem.pool(0).x() == 110);
    CHECK(std::fabs(to_double(res.ecosystem.pool(0).y()) - 361905) < 0.5);

    CHECK_THROWS_AS(apply_swap(twins(), SwapOrder{0, Asset::X, R("1"), SenderTag::Trader}, Algorithm::GmmRebal),
                    std::invalid_argument);
}

TEST_CASE("apply_swap refuses to deplete a pool under nGMM")
{
    const auto eco = Ecosystem::from_reserves({{R("90"), R("5")}, {R("100"), R("844439")}});
    CHECK_THROWS_AS(apply_swap(eco, SwapOrder{0, Asset::X, R("10"), SenderTag::Trader}, Algorithm::Ngmm),
                    InvariantViolation);
}

TEST_CASE("canonicalize_direction")
{
    const Pool p("AMM1", R("100"), R("400000"));
    const SwapOrder y{0, Asset::Y, R("10"), SenderTag::Trader};
    const auto c = canonicalize_direction(y, p);
    CHECK(c.relabeled);
    CHECK(c.order.send == Asset::X);
    CHECK(c.pool.x() == 400000);
    CHECK(c.pool.y() == 100);
    const auto again = canonicalize_direction(c.order, c.pool);
    CHECK_FALSE(again.relabeled);
    CHECK(again.pool == c.pool);
    CHECK(again.order.amount_in == c.order.amount_in);
    const auto x = canonicalize_direction(SwapOrder{0, Asset::X, R("10"), SenderTag::Trader}, p);
    CHECK_FALSE(x.relabeled);
    CHECK(x.pool == p);
}

TEST_CASE("send-Y quotes equal relabeled send-X quotes")
{
    test::RandomRationals rng(13);
    for (int i = 0; i < 300; ++i)
    {
        const auto eco = rng.ecosystem(2 + rng.below(3));
        const std::size_t p = rng.below(eco.size());
        const Rational dy = eco.pool(p).y() * rng.log_uniform(-4, 0);
        for (Algorithm alg : {Algorithm::Cpmm, Algorithm::Gmm})
        {
            const auto a = quote(eco, SwapOrder{p, Asset::Y, dy, SenderTag::Trader}, alg);
            const auto b = quote(eco.relabeled(), SwapOrder{p, Asset::X, dy, SenderTag::Trader}, alg);
            REQUIRE(a.amount_out == b.amount_out);
            REQUIRE(a.branch == b.branch);
        }
    }
}

TEST_CASE("pool_value examples")
{
    CHECK(pool_value(Pool("a", R("100"), R("400000")), R("3000")) == 700000);
    CHECK(pool_value(Pool("a", R("115.47"), R("346410.16")), R("3000")) == R("692820.16"));
    const Pool p("a", R("37"), R("1234.5"));
    CHECK(pool_value(p, p.ratio()) == 2 * p.y());
    CHECK_THROWS_AS(pool_value(p, Rational(0)), DomainError);
}

TEST_CASE("product never decreases under GMM")
{
    test::RandomRationals rng(14);
    int strict = 0;
    for (int seq = 0; seq < 200; ++seq)
    {
        auto eco = rng.ecosystem(2 + rng.below(4));
        for (int step = 0; step < 8; ++step)
        {
            const std::size_t p = rng.below(eco.size());
            const Asset send = rng.below(2) ? Asset::X : Asset::Y;
            const Rational amount = eco.pool(p).reserve(send) * rng.log_uniform(-4, 0);
            const auto canonical = send == Asset::X ? eco : eco.relabeled();
            const Rational c = cpmm_out(amount, canonical.pool(p).x(), canonical.pool(p).y());
            const Rational before = eco.pool(p).product();
            const auto res = apply_swap(eco, SwapOrder{p, send, amount, SenderTag::Trader}, Algorithm::Gmm);
            const Rational after = res.ecosystem.pool(p).product();
            REQUIRE(after >= before);
            if (res.quote.classification == SwapClass::Convergent && res.quote.amount_out < c)
            {
                REQUIRE(after > before);
                ++strict;
            }
            eco = res.ecosystem;
        }
    }
    CHECK(strict > 0);
}

TEST_CASE("float path agrees with the rational path")
{
    const auto eco = Ecosystem::from_reserves({{R("90"), R("444444")}, {R("100"), R("400000")}});
    const auto ecof = convert_ecosystem<double>(eco);
    for (const char* dx : {"10", "0.001", "44444", "5"})
    {
        for (std::size_t p : {0u, 1u})
        {
            const double exact = to_double(gmm_out(R(dx), eco, p).amount_out);
            const double fast = gmm_out(to_double(R(dx)), ecof, p).amount_out;
            CHECK(rel_diff(fast, exact) < 1e-9);
        }
    }
    CHECK(rel_diff(cpmm_out(60000.0, 400000.0, 100.0), to_double(cpmm_out(R("60000"), R("400000"), R("100")))) <
          1e-9);
}

TEST_CASE("algorithm and asset names")
{
    CHECK(parse_algorithm("GMM_REBAL") == Algorithm::GmmRebal);
    CHECK(parse_algorithm("cpmm") == Algorithm::Cpmm);
    CHECK_THROWS_AS(parse_algorithm("uniswap"), DomainError);
    CHECK(parse_asset("y") == Asset::Y);
    CHECK(to_string(SwapClass::Overshooting) == "overshooting");
}
