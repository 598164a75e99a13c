#include <doctest.h>

#include <random>
#include <sstream>

#include "epq/io.hpp"
#include "fixtures.hpp"

using namespace epq;

namespace {

const char* kCounterexample = R"(# three-state example
n 3
c 0 0 0
L
-2 1 0
-1 0.5 3
0 -3 -3
Q 1
0 0 0
0 0 0.5
0 0.5 0
Q 2
0 0 -0.5
0 0 0
-0.5 0 0
Q 3
0 0 0
0 0 0
0 0 0
)";

ParseError parse_error_of(const std::string& text) {
  try {
    parse_system_string(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError for:\n" << text);
  throw;
}

}  // namespace

TEST_CASE("parse the counterexample") {
  const auto sys = parse_system_string(kCounterexample);
  const auto ref = fx::counterexample();
  CHECK(sys.L() == ref.L());
  for (int i = 0; i < 3; ++i) CHECK(sys.Q(i) == ref.Q(i));
  CHECK(sys.c() == ref.c());
}

TEST_CASE("c defaults to zero and blocks may come in any order") {
  const auto sys = parse_system_string("n 2\nQ 2\n0 0\n0 0\nL\n-1 0\n0 -1 # trailing\nQ 1\n0 0\n0 0\n");
  CHECK(sys.c().norm() == 0.0);
  CHECK(sys.L()(1, 1) == -1.0);
}

TEST_CASE("errors point at line and column") {
  const std::string bad_row = "n 2\nL\n1 2\n3\nQ 1\n0 0\n0 0\nQ 2\n0 0\n0 0\n";
  const ParseError e = parse_error_of(bad_row);
  CHECK(e.line() == 4);
  CHECK(std::string(e.what()).find("L row 2") != std::string::npos);

  const ParseError num = parse_error_of("n 2\nL\n1 x2\n");
  CHECK(num.line() == 3);
  CHECK(num.column() == 3);

  CHECK(parse_error_of("L\n1 0\n0 1\n").line() == 1);
  CHECK(parse_error_of("n 2\nfoo 1\n").line() == 2);
  CHECK(parse_error_of("n 2\nL\n1 0\n0 1\nQ 1\n0 0\n0 0\n").code() == ErrorCode::ParseError);
  CHECK(parse_error_of("n 2\nL\n1 0\n0 1\nQ 3\n").column() == 3);
  CHECK(parse_error_of("n 2\nn 2\n").line() == 2);
  CHECK(parse_error_of("n 2\nc 1 inf\n").line() == 2);
}

TEST_CASE("validation errors propagate unchanged") {
  try {
    parse_system_string("n 2\nL\n0 0\n0 0\nQ 1\n1 0\n0 1\nQ 2\n0 0\n0 0\n");
    FAIL("expected throw");
  } catch (const ParseError&) {
    FAIL("validation error must not become a ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotEnergyPreserving);
  }
}

TEST_CASE("truncated files never crash the parser") {
  const std::string text = kCounterexample;
  for (std::size_t cut = 0; cut < text.size(); ++cut) {
    try {
      parse_system_string(text.substr(0, cut));
    } catch (const Error&) {
    }
  }
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pos(0, text.size() - 1);
  std::uniform_int_distribution<int> ch(32, 126);
  for (int k = 0; k < 2000; ++k) {
    std::string mutated = text;
    mutated[pos(rng)] = static_cast<char>(ch(rng));
    try {
      parse_system_string(mutated);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("write then parse round-trips exactly") {
  for (int s = 0; s < 30; ++s) {
    const auto sys = random_system(2 + s % 4, 400 + s, 3.0);
    std::ostringstream out;
    write_system(out, sys);
    const auto back = parse_system_string(out.str());
    CHECK(back.c() == sys.c());
    CHECK(back.L() == sys.L());
    for (int i = 0; i < sys.n(); ++i)
      CHECK((back.Q(i) - sys.Q(i)).cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, sys.Q(i).cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("certificate round trip and errors") {
  const auto cert = builtin_counterexample().second;
  std::ostringstream out;
  write_certificate(out, cert);
  const auto back = parse_certificate_string(out.str());
  CHECK(back.alpha == cert.alpha);
  CHECK(back.Mv == cert.Mv);
  CHECK(back.Md == cert.Md);
  CHECK_THROWS_AS(parse_certificate_string("alpha 0.1\nMv\n1 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_certificate_string("alpha 0.1\n"), ParseError);
  CHECK_THROWS_AS(read_system_file("/nonexistent/file.sys"), ParseError);
}
