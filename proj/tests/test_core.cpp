#include <cmath>
#include <sstream>

#include "doctest.h"
#include "newsgraph/core/errors.hpp"
#include "newsgraph/core/hash.hpp"
#include "newsgraph/core/io.hpp"
#include "newsgraph/core/model.hpp"
#include "newsgraph/core/rng.hpp"

using namespace newsgraph;

namespace {

// Reference: exact product of two raw values, rounded half to even at bit 32.
std::int64_t ref_mul(std::int64_t a, std::int64_t b) {
  const int128 p = static_cast<int128>(a) * b;
  int128 q = p >> 32;  // floor
  const int128 rem = p - (q << 32);
  const int128 half = int128{1} << 31;
  if (rem > half || (rem == half && (q & 1))) q += 1;
  return static_cast<std::int64_t>(q);
}

FixedMatrix random_fixed(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                         double hi = 1.0) {
  FixedMatrix m(rows, cols);
  for (Fixed& x : m.values()) x = Fixed::quantize(rng.uniform(lo, hi));
  return m;
}

VoteMatrix random_votes(std::size_t users, std::size_t edges, double density, Rng& rng) {
  std::vector<VoteEntry> entries;
  for (std::size_t i = 0; i < users; ++i) {
    for (std::size_t j = 0; j < edges; ++j) {
      if (j % users == i % edges || rng.uniform() < density) {
        entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           vote_from_int(static_cast<int>(rng.below(3)) - 1)});
      }
    }
  }
  return VoteMatrix::compact(users, edges, std::move(entries)).matrix;
}

StakeLedger random_stakes(std::size_t users, Rng& rng) {
  StakeLedger ledger(users);
  for (std::size_t i = 0; i < users; ++i) {
    ledger.set_stake(i, Fixed::from_raw(1 + static_cast<std::int64_t>(rng.below(5ull << 32))));
  }
  return ledger;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("quantize rounds half to even onto the 2^-32 grid") {
    CHECK(Fixed::quantize(0.5).raw() == (std::int64_t{1} << 31));
    CHECK(Fixed::quantize(-1.0).raw() == -(std::int64_t{1} << 32));
    CHECK(Fixed::quantize(0x1.8p-32).raw() == 2);  // 1.5 ulp -> 2
    CHECK(Fixed::quantize(0x1.0p-33).raw() == 0);  // 0.5 ulp -> 0
    CHECK_THROWS_AS(Fixed::quantize(std::nan("")), DomainError);
    CHECK_THROWS_AS(Fixed::quantize(3e9), ArithmeticOverflow);

    Rng rng(11);
    for (int n = 0; n < 10000; ++n) {
      const double x = rng.uniform(-1000.0, 1000.0);
      CHECK(std::abs(Fixed::quantize(x).to_double() - x) <= 0x1.0p-33);
    }
  }

  TEST_CASE("multiplication matches the exact reference") {
    CHECK(Fixed::from_raw(1) * Fixed::from_raw(std::int64_t{1} << 31) == Fixed{});
    CHECK((Fixed::from_raw(3) * Fixed::from_raw(std::int64_t{1} << 31)).raw() == 2);
    CHECK(Fixed::quantize(1.5) * Fixed::quantize(1.5) == Fixed::quantize(2.25));
    Rng rng(3);
    for (int n = 0; n < 20000; ++n) {
      const auto a = static_cast<std::int64_t>(rng.next_u64() >> 20) - (std::int64_t{1} << 43);
      const auto b = static_cast<std::int64_t>(rng.next_u64() >> 20) - (std::int64_t{1} << 43);
      REQUIRE((Fixed::from_raw(a) * Fixed::from_raw(b)).raw() == ref_mul(a, b));
    }
    CHECK_THROWS_AS(Fixed::from_int(1 << 20) * Fixed::from_int(1 << 20), ArithmeticOverflow);
    CHECK_THROWS_AS(Fixed::from_raw(INT64_MAX) + Fixed::epsilon(), ArithmeticOverflow);
  }

  TEST_CASE("dot rounds once") {
    Rng rng(5);
    for (int n = 0; n < 2000; ++n) {
      std::vector<Fixed> a(12), b(12);
      int128 exact = 0;
      for (std::size_t f = 0; f < a.size(); ++f) {
        a[f] = Fixed::quantize(rng.uniform(-2.0, 2.0));
        b[f] = Fixed::quantize(rng.uniform(-2.0, 2.0));
        exact += static_cast<int128>(a[f].raw()) * b[f].raw();
      }
      CHECK(dot(a, b).raw() == static_cast<std::int64_t>(round_shift_half_even(exact, 32)));
    }
    CHECK(round_shift_half_even(int128{5} << 31, 32) == 2);  // 2.5 -> 2
    CHECK(round_shift_half_even(int128{7} << 31, 32) == 4);  // 3.5 -> 4
    CHECK(round_shift_half_even(-(int128{5} << 31), 32) == -2);
  }

  TEST_CASE("sha256 known answers") {
    CHECK(to_hex(sha256(std::string_view("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(sha256(std::string_view(""))) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    Sha256 h;
    h.update(std::string_view("a")).update(std::string_view("bc"));
    CHECK(h.finish() == sha256(std::string_view("abc")));
    const auto x = sha256(std::string_view("abc"));
    CHECK(hash_from_hex(to_hex(x)) == x);
  }

  TEST_CASE("rng streams are reproducible and labelled") {
    Rng a(42), b(42);
    for (int n = 0; n < 100; ++n) CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
    CHECK(derive_seed(1, "x", 0) != derive_seed(1, "x", 1));
    Rng c(7);
    double sum = 0;
    for (int n = 0; n < 20000; ++n) {
      const auto k = c.below(3);
      CHECK(k < 3);
      sum += static_cast<double>(c.poisson(10.0));
    }
    CHECK(sum / 20000 == doctest::Approx(10.0).epsilon(0.03));
  }

  TEST_CASE("vote matrix construction") {
    VoteMatrix m(2, 2, {{0, 1, VoteValue::Positive}, {1, 0, VoteValue::Negative},
                        {0, 1, VoteValue::Negative}});
    CHECK(m.num_votes() == 2);
    CHECK(m.at(0, 1) == VoteValue::Negative);  // last write wins
    CHECK_FALSE(m.at(0, 0).has_value());
    CHECK_THROWS_AS(VoteMatrix(2, 3, {{0, 0, VoteValue::Neutral}, {1, 1, VoteValue::Neutral}}),
                    DomainError);
    CHECK_THROWS_AS(vote_from_int(2), DomainError);

    auto c = VoteMatrix::compact(2, 4, {{0, 3, VoteValue::Positive}, {1, 1, VoteValue::Neutral}});
    CHECK(c.matrix.num_edges() == 2);
    CHECK(c.edge_origin == std::vector<std::uint32_t>{1, 3});
    CHECK(c.matrix.at(0, 1) == VoteValue::Positive);
  }

  TEST_CASE("vote and stake files round-trip") {
    Rng rng(9);
    const auto votes = random_votes(7, 9, 0.4, rng);
    std::stringstream buffer;
    write_votes(buffer, votes);
    CHECK(read_votes(buffer) == votes);

    const auto stakes = random_stakes(7, rng);
    std::stringstream sbuf;
    write_stakes(sbuf, stakes);
    const auto back = read_stakes(sbuf, 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(back.stake(i) == stakes.stake(i));

    std::stringstream bad("users=2 edges=1\n0,0,7\n");
    CHECK_THROWS(read_votes(bad));
  }

  TEST_CASE("ledger transfers conserve tokens") {
    StakeLedger ledger(3);
    CHECK_THROWS_AS(ledger.set_stake(0, Fixed{}), DomainError);
    CHECK_THROWS_AS(ledger.set_stake(0, Fixed::from_int(5) + Fixed::epsilon()), DomainError);
    ledger.set_stake(0, Fixed::from_int(5));
    CHECK(ledger.stake(1) == Fixed{});

    ledger.mint("a", Fixed::from_int(100));
    ledger.mint("b", Fixed::from_int(20));
    ledger.transfer("a", "b", Fixed::from_int(30));
    ledger.post_bond("b", BondKind::Solver, Fixed::from_int(40));
    CHECK(ledger.bond("b", BondKind::Solver) == Fixed::from_int(40));
    CHECK(ledger.forfeit_bond("b", BondKind::Solver, "a") == Fixed::from_int(40));
    CHECK(ledger.balance("a") == Fixed::from_int(110));
    CHECK_THROWS_AS(ledger.transfer("b", "a", Fixed::from_int(11)), DomainError);
    CHECK(ledger.total_supply() == ledger.minted());
  }

  TEST_CASE("frobenius and approximation error hand cases") {
    CHECK(frobenius_sq(FixedMatrix(3, 3)) == Fixed{});
    FixedMatrix id(2, 2);
    id(0, 0) = id(1, 1) = Fixed::one();
    CHECK(frobenius_sq(id) == Fixed::from_int(2));

    VoteMatrix one(1, 1, {{0, 0, VoteValue::Positive}});
    LatentFactors zero{FixedMatrix(1, 2), FixedMatrix(1, 2)};
    StakeLedger five = StakeLedger::uniform(1, Fixed::from_int(5));
    CHECK(approximation_error(one, zero, five) == Fixed::from_int(5));
    CHECK(rsbe(one, zero, five, Fixed::quantize(0.1)) == Fixed::from_int(5));

    VoteMatrix neg(1, 1, {{0, 0, VoteValue::Negative}});
    LatentFactors unit{FixedMatrix(1, 1, Fixed::one()), FixedMatrix(1, 1, Fixed::one())};
    const auto em = error_matrix(neg, unit, StakeLedger::uniform(1, Fixed::from_int(4)));
    REQUIRE(em.cells.size() == 1);
    CHECK(em.cells[0].squared == Fixed::from_int(16));
    CHECK(em.cells[0].value == 4.0);

    CHECK_THROWS_AS(approximation_error(one, LatentFactors{FixedMatrix(2, 2), FixedMatrix(1, 2)}, five),
                    DimensionMismatch);
  }

  TEST_CASE("error formulas match a dense double oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const auto votes = random_votes(10, 10, 0.3, rng);
      const auto ledger = random_stakes(10, rng);
      LatentFactors f{random_fixed(10, 4, rng), random_fixed(votes.num_edges(), 4, rng)};
      const Fixed lambda = Fixed::quantize(0.1);

      double expect = 0.0, frob = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < votes.num_edges(); ++j) {
          const auto r = votes.at(i, j);
          if (!r) continue;
          double p = 0.0;
          for (std::size_t q = 0; q < 4; ++q) p += f.users(i, q).to_double() * f.edges(j, q).to_double();
          expect += ledger.stake(i).to_double() * (to_int(*r) - p) * (to_int(*r) - p);
        }
      }
      for (Fixed x : f.users.values()) frob += x.to_double() * x.to_double();
      for (Fixed x : f.edges.values()) frob += x.to_double() * x.to_double();

      const Fixed approx = approximation_error(votes, f, ledger);
      CHECK(approx.to_double() == doctest::Approx(expect).epsilon(1e-8));
      CHECK(frobenius_sq(f.users).to_double() + frobenius_sq(f.edges).to_double() ==
            doctest::Approx(frob).epsilon(1e-8));
      CHECK(rsbe(votes, f, ledger, lambda) ==
            approx + lambda * (frobenius_sq(f.users) + frobenius_sq(f.edges)));
      CHECK(error_matrix(votes, f, ledger).total() == approx);
    }
  }

  TEST_CASE("consistency score") {
    std::vector<VoteEntry> entries;
    for (std::uint32_t j = 0; j < 10; ++j) entries.push_back({0, j, VoteValue::Neutral});
    VoteMatrix votes(1, 10, entries);
    LatentFactors f{FixedMatrix(1, 1), FixedMatrix(10, 1)};
    CHECK(consistency_score(0, votes, f) == doctest::Approx(10.0 * 4294967296.0));

    // deviation of sqrt(0.1) on every cell: total squared deviation ~ 1
    f.users(0, 0) = Fixed::one();
    for (std::size_t j = 0; j < 10; ++j) f.edges(j, 0) = Fixed::quantize(std::sqrt(0.1));
    CHECK(consistency_score(0, votes, f) == doctest::Approx(10.0).epsilon(1e-6));

    for (std::size_t j = 0; j < 10; ++j) f.edges(j, 0) = Fixed::quantize(0.5);
    const double worse = consistency_score(0, votes, f);
    CHECK(worse == doctest::Approx(10.0 / 2.5).epsilon(1e-9));

    VoteMatrix two(2, 1, {{1, 0, VoteValue::Neutral}});
    CHECK_THROWS_AS(consistency_score(0, two, LatentFactors{FixedMatrix(2, 1), FixedMatrix(1, 1)}),
                    UndefinedScore);
  }
}
