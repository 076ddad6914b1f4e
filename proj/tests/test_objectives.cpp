#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "doctest.h"
#include "wrs/objectives.hpp"

using namespace wrs;

namespace {

SearchSpace griewank_space() {
  std::vector<Dimension> dims;
  for (int i = 1; i <= 6; ++i) dims.push_back(Dimension::real("x" + std::to_string(i), -600, 600));
  return SearchSpace(std::move(dims));
}

Candidate point(std::vector<double> xs) {
  Candidate c;
  for (double x : xs) c.values.emplace_back(x);
  return c;
}

CommandSpec stub(const std::string& mode, bool persistent = false, double timeout = 10.0) {
  CommandSpec s;
  s.argv = {WRS_STUB_OBJECTIVE, mode};
  if (persistent) s.argv.push_back("--persistent");
  s.persistent = persistent;
  s.timeout = std::chrono::duration<double>(timeout);
  s.arity = 6;
  return s;
}

}  // namespace

TEST_CASE("Griewank values") {
  const std::vector<double> zeros(6, 0.0);
  CHECK(griewank(zeros) == 0.0);
  CHECK(griewank_modified_6(zeros) == 0.0);
  const std::vector<double> pi{std::numbers::pi};
  CHECK(griewank(pi) == doctest::Approx(2.0024674011002723).epsilon(1e-15));
  CHECK(griewank_modified_6(std::vector<double>{0, 0, 0, 0, 0, 600}) ==
        doctest::Approx(450.004533109596).epsilon(1e-14));
  CHECK(griewank_modified_6(std::vector<double>{600, 0, 0, 0, 0, 0}) ==
        doctest::Approx(1.9990234788329058).epsilon(1e-14));
  CHECK_THROWS_AS(griewank_modified_6(std::vector<double>{0, 0}), std::invalid_argument);
}

TEST_CASE("built-ins are negated for maximization") {
  const auto space = griewank_space();
  const auto f = make_builtin("griewank_modified_6", 0);
  CHECK(f->arity() == 6);
  const auto x = point({1, 2, 3, 4, 5, 6});
  const std::vector<double> raw{1, 2, 3, 4, 5, 6};
  CHECK(*f->evaluate(space, x).value == -griewank_modified_6(raw));
  CHECK(*f->evaluate(space, point({0, 0, 0, 0, 0, 0})).value == 0.0);
  CHECK(make_builtin("griewank", 3)->arity() == 3);
  CHECK_THROWS_AS(make_builtin("griewank", 0), std::invalid_argument);
  CHECK_THROWS_AS(make_builtin("griewank_modified_6", 5), std::invalid_argument);
  CHECK_THROWS_AS(make_builtin("rastrigin", 2), std::invalid_argument);
  CHECK(builtin_names() == std::vector<std::string>{"griewank", "griewank_modified_6"});
}

TEST_CASE("-G*6 never exceeds its maximum 0") {
  const auto space = griewank_space();
  const auto f = make_builtin("griewank_modified_6", 6);
  RandomStream rng(1);
  for (int i = 0; i < 200000; ++i) CHECK_UNARY(*f->evaluate(space, sample_candidate(space, rng)).value <= 0.0);
}

TEST_CASE("string coordinates fail real-vector objectives") {
  SearchSpace space({Dimension::categorical("c", {Value{std::string("a")}})});
  const auto f = make_builtin("griewank", 1);
  const auto e = f->evaluate(space, Candidate{{Value{std::string("a")}}});
  CHECK_FALSE(e.ok());
}

TEST_CASE("negated and function objectives") {
  SearchSpace space({Dimension::real("x", -1, 1)});
  auto inner = std::make_shared<FunctionObjective>("sq", 1, [](const Candidate& c) {
    const double x = std::get<double>(c[0]);
    if (x > 0.5) throw std::runtime_error("too big");
    return x * x;
  });
  NegatedObjective neg(inner);
  CHECK(neg.name() == "neg_sq");
  CHECK(*neg.evaluate(space, Candidate{{Value{0.5}}}).value == -0.25);
  const auto e = neg.evaluate(space, Candidate{{Value{0.9}}});
  CHECK_FALSE(e.ok());
  CHECK(e.error == "too big");
}

TEST_CASE("request and reply encoding") {
  SearchSpace space({Dimension::real("lr", 0, 1), Dimension::integer("layers", 1, 9),
                     Dimension::categorical("act", {Value{std::string("relu")}})});
  CHECK(encode_request(space, Candidate{{Value{0.5}, Value{std::int64_t{3}}, Value{std::string("relu")}}}) ==
        R"({"lr":0.5,"layers":3,"act":"relu"})");
  CHECK(*decode_reply(R"({"value": -1.5})").value == -1.5);
  CHECK(*decode_reply(R"({"value": 2, "extra": true})").value == 2.0);
  CHECK_FALSE(decode_reply("nope").ok());
  CHECK_FALSE(decode_reply(R"({"value": "1"})").ok());
  CHECK_FALSE(decode_reply(R"({"loss": 1})").ok());
  CHECK_FALSE(decode_reply(R"([1])").ok());
}

TEST_CASE("subprocess evaluation agrees with the built-in") {
  const auto space = griewank_space();
  const auto builtin = make_builtin("griewank_modified_6", 6);
  ExternalObjective once(stub("g6"));
  ExternalObjective kept(stub("g6", true));
  RandomStream rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto x = sample_candidate(space, rng);
    const double want = *builtin->evaluate(space, x).value;
    const auto a = once.evaluate(space, x);
    const auto b = kept.evaluate(space, x);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(std::abs(*a.value - want) <= 1e-9);
    CHECK(std::abs(*b.value - want) <= 1e-9);
  }
}

TEST_CASE("subprocess failure paths are failed evaluations") {
  const auto space = griewank_space();
  const auto x = point({0, 0, 0, 0, 0, 0});
  SUBCASE("nonzero exit") {
    const auto e = ExternalObjective(stub("fail")).evaluate(space, x);
    CHECK_FALSE(e.ok());
  }
  SUBCASE("reply followed by nonzero exit") {
    CHECK_FALSE(ExternalObjective(stub("exit1")).evaluate(space, x).ok());
  }
  SUBCASE("malformed reply") {
    const auto e = ExternalObjective(stub("malformed")).evaluate(space, x);
    CHECK_FALSE(e.ok());
    CHECK(e.error.find("malformed") != std::string::npos);
  }
  SUBCASE("non-numeric value") {
    CHECK_FALSE(ExternalObjective(stub("nan")).evaluate(space, x).ok());
  }
  SUBCASE("timeout") {
    const auto start = std::chrono::steady_clock::now();
    const auto e = ExternalObjective(stub("hang", false, 0.3)).evaluate(space, x);
    const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK_FALSE(e.ok());
    CHECK(e.error == "timeout");
    CHECK(took < 5.0);
  }
  SUBCASE("persistent timeout recovers with a fresh child") {
    ExternalObjective hang(stub("hang", true, 0.3));
    CHECK_FALSE(hang.evaluate(space, x).ok());
    CHECK_FALSE(hang.evaluate(space, x).ok());
  }
  SUBCASE("missing executable") {
    CommandSpec s = stub("g6");
    s.argv = {"/nonexistent/evaluator"};
    CHECK_FALSE(ExternalObjective(s).evaluate(space, x).ok());
  }
  SUBCASE("persistent child that dies is restarted") {
    ExternalObjective dying(stub("exit1", true));
    const auto first = dying.evaluate(space, x);
    CHECK(first.ok());
    // The exited child fails the next request and is replaced after it.
    CHECK_FALSE(dying.evaluate(space, x).ok());
    CHECK(dying.evaluate(space, x).ok());
  }
}

TEST_CASE("external objective construction and concurrency hint") {
  CommandSpec s;
  CHECK_THROWS_AS(ExternalObjective{s}, std::invalid_argument);
  s.argv = {"true"};
  s.timeout = std::chrono::duration<double>(0.0);
  CHECK_THROWS_AS(ExternalObjective{s}, std::invalid_argument);
  ExternalObjective p(stub("g6", true));
  CHECK(p.max_parallelism() == 1);
  CommandSpec wide = stub("g6");
  wide.max_parallel = 4;
  CHECK(ExternalObjective(wide).max_parallelism() == 4);
}

TEST_CASE("persistent evaluator is safe under concurrent callers") {
  const auto space = griewank_space();
  ExternalObjective kept(stub("g6", true));
  const auto builtin = make_builtin("griewank_modified_6", 6);
  std::vector<std::thread> threads;
  std::atomic<int> bad{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      RandomStream rng(50 + t);
      for (int i = 0; i < 10; ++i) {
        const auto x = sample_candidate(space, rng);
        const auto e = kept.evaluate(space, x);
        if (!e.ok() || std::abs(*e.value - *builtin->evaluate(space, x).value) > 1e-9) ++bad;
      }
    });
  for (auto& th : threads) th.join();
  CHECK(bad == 0);
}
