#include <doctest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/error.hpp"

using namespace ttr;

TEST_CASE("loading skips bad rows and keeps the first duplicate") {
  const auto dir = testing::scratch_dir("emb");
  const auto path = dir / "vectors.txt";
  {
    std::ofstream out(path);
    out << "cup 1 0 0\n"
        << "Cup 9 9 9\n"        // duplicate after lowercasing
        << "mug 0.5 0.5\n"      // wrong width
        << "lamp 0 1 zero\n"    // not a number
        << "lamp 0 1 0\n";
  }
  const EmbeddingTable t = load_embeddings(path, 3);
  CHECK(t.size() == 2);
  CHECK(t.skipped_lines() == 2);
  const auto cup = t.lookup("CUP");
  REQUIRE(cup);
  CHECK((*cup)[0] == 1.0f);
  CHECK_FALSE(t.contains("mug"));
  CHECK_THROWS_AS(load_embeddings(dir / "missing.txt", 3), InputError);
}

TEST_CASE("cosine edge cases") {
  const std::vector<float> a = {1, 0}, b = {0, 1}, z = {0, 0}, c = {2, 0};
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, c) == doctest::Approx(1.0));
  CHECK(cosine(a, z) == 0.0);
  const std::vector<float> d = {-3, 0};
  CHECK(cosine(a, d) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(EmbeddingTable(2).insert("x", std::vector<float>{1, 2, 3}), UsageError);
}

TEST_CASE("synthetic vectors encode the intended neighbourhoods") {
  const auto& t = testing::world().table;
  auto cos = [&](const char* x, const char* y) { return cosine(*t.lookup(x), *t.lookup(y)); };
  CHECK(t.size() == synthetic_vocabulary().size());
  CHECK(cos("cup", "mug") > 0.7);
  CHECK(cos("red", "blue") > 0.4);
  CHECK(cos("red", "blue") > cos("red", "cup"));
  CHECK(cos("cup", "lamp") < cos("cup", "mug"));
}
