#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "data_model.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace secoda;

namespace {

Schema mixed_schema() {
  return Schema{{{"x", AttrKind::Numerical}, {"color", AttrKind::Categorical}}};
}

}  // namespace

TEST_CASE("schema validation wants unique non-empty names") {
  CHECK_NOTHROW(mixed_schema().validate());
  Schema dup{{{"x", AttrKind::Numerical}, {"x", AttrKind::Categorical}}};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  Schema blank{{{"", AttrKind::Numerical}}};
  CHECK_THROWS_AS(blank.validate(), std::invalid_argument);
  Schema empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("schema json round-trips") {
  Schema s = mixed_schema();
  Schema back = Schema::from_json(s.to_json());
  REQUIRE(back.size() == 2);
  CHECK(back.attributes[0].name == "x");
  CHECK(back.attributes[0].kind == AttrKind::Numerical);
  CHECK(back.attributes[1].name == "color");
  CHECK(back.attributes[1].kind == AttrKind::Categorical);
}

TEST_CASE("numerical column is inferred when every non-missing cell parses") {
  MissingTokens missing;
  Schema s = infer_schema({"x", "y", "color"}, {{"1.0", "2", "red"}}, missing);
  CHECK(s.attributes[0].kind == AttrKind::Numerical);
  CHECK(s.attributes[1].kind == AttrKind::Numerical);
  CHECK(s.attributes[2].kind == AttrKind::Categorical);
}

TEST_CASE("missing tokens are excluded from inference") {
  MissingTokens missing;
  Schema s = infer_schema({"v"}, {{"1"}, {"2"}, {"NA"}}, missing);
  CHECK(s.attributes[0].kind == AttrKind::Numerical);
}

TEST_CASE("one unparseable cell makes a column categorical") {
  MissingTokens missing;
  Schema s = infer_schema({"v"}, {{"1"}, {"2"}, {"two"}}, missing);
  CHECK(s.attributes[0].kind == AttrKind::Categorical);
}

TEST_CASE("all-missing column is vacuously numerical") {
  MissingTokens missing;
  Schema s = infer_schema({"v"}, {{""}, {"NA"}}, missing);
  CHECK(s.attributes[0].kind == AttrKind::Numerical);
}

TEST_CASE("duplicate header names fail inference") {
  MissingTokens missing;
  CHECK_THROWS_AS(infer_schema({"a", "a"}, {}, missing), std::invalid_argument);
}

TEST_CASE("load assigns case ids by row order") {
  Dataset d = load_csv_text("x,color\n1,red\n2,blue\n3,red\n", nullptr,
                            MissingTokens{});
  REQUIRE(d.rows() == 3);
  CHECK(d.numeric_value(0, 0) == 1.0);
  CHECK(d.numeric_value(0, 2) == 3.0);
  CHECK(d.category(1, 0) == "red");
  CHECK(d.category(1, 2) == "red");
  CHECK(d.categorical_column(1).codes[0] == d.categorical_column(1).codes[2]);
}

TEST_CASE("default missing tokens empty and NA become Missing") {
  Dataset d =
      load_csv_text("x,color\n,NA\n1,red\n", nullptr, MissingTokens{});
  CHECK(d.is_missing(0, 0));
  CHECK(d.is_missing(1, 0));
  CHECK(!d.is_missing(0, 1));
  CHECK(!d.is_missing(1, 1));
}

TEST_CASE("unparseable numeric cell names line and column") {
  Schema s{{{"x", AttrKind::Numerical}}};
  try {
    load_csv_text("x\n1\nabc\n", &s, MissingTokens{});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("x") != std::string::npos);
    CHECK(what.find("abc") != std::string::npos);
  }
}

TEST_CASE("wrong arity names the line") {
  try {
    load_csv_text("x,y\n1,2\n3\n", nullptr, MissingTokens{});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("header must match a provided schema") {
  Schema s = mixed_schema();
  CHECK_THROWS_AS(
      load_csv_text("x,colour\n1,red\n", &s, MissingTokens{}), ParseError);
  CHECK_THROWS_AS(load_csv_text("x\n1\n", &s, MissingTokens{}), ParseError);
}

TEST_CASE("explicitly non-finite numerics become Missing, text stays fatal") {
  // the dataset invariant bans NaN/infinity, not the spellings themselves,
  // so under a pinned numeric schema they degrade to Missing
  Schema s{{{"x", AttrKind::Numerical}}};
  Dataset d = load_csv_text("x\nnan\ninf\n1\n", &s, MissingTokens{});
  CHECK(d.is_missing(0, 0));
  CHECK(d.is_missing(0, 1));
  CHECK(d.numeric_value(0, 2) == 1.0);

  // without a schema the same column infers as categorical: inference
  // promotes a column to numerical only when every value is finite
  Dataset inferred = load_csv_text("x\nnan\ninf\n1\n", nullptr, MissingTokens{});
  CHECK(inferred.schema().attributes[0].kind == AttrKind::Categorical);
  CHECK(inferred.category(0, 0) == "nan");
}

TEST_CASE("builder degrades non-finite numerics to Missing") {
  DatasetBuilder b(Schema{{{"x", AttrKind::Numerical}}});
  b.add_row({CellValue(std::numeric_limits<double>::quiet_NaN())});
  b.add_row({CellValue(1.5)});
  Dataset d = std::move(b).build();
  CHECK(d.is_missing(0, 0));
  CHECK(d.numeric_value(0, 1) == 1.5);
}

TEST_CASE("builder rejects cells of the wrong kind") {
  DatasetBuilder b(mixed_schema());
  CHECK_THROWS_AS(b.add_row({CellValue(std::string("oops")), CellValue(1.0)}),
                  std::invalid_argument);
}

TEST_CASE("random mixed dataset round-trips through csv text") {
  Rng rng(11);
  Schema schema{{{"a", AttrKind::Numerical},
                 {"b", AttrKind::Categorical},
                 {"c", AttrKind::Numerical}}};
  DatasetBuilder b(schema);
  const std::vector<std::string> cats = {"red", "gr,een", "bl\"ue", "x\ny"};
  for (int i = 0; i < 300; ++i) {
    std::vector<CellValue> row(3);
    row[0] = rng.below(10) == 0 ? CellValue(MissingCell{})
                                : CellValue(rng.uniform(-5.0, 5.0));
    row[1] = rng.below(10) == 0 ? CellValue(MissingCell{})
                                : CellValue(cats[rng.below(cats.size())]);
    row[2] = CellValue(rng.normal(0.0, 1e6));
    b.add_row(row);
  }
  Dataset d = std::move(b).build();
  Dataset back = load_csv_text(write_csv_text(d), &d.schema(), MissingTokens{});
  REQUIRE(back.rows() == d.rows());
  for (size_t c = 0; c < d.cols(); ++c) {
    for (size_t r = 0; r < d.rows(); ++r) {
      CHECK(back.is_missing(c, r) == d.is_missing(c, r));
      if (d.is_missing(c, r)) continue;
      if (d.schema().attributes[c].kind == AttrKind::Numerical) {
        CHECK(back.numeric_value(c, r) == d.numeric_value(c, r));
      } else {
        CHECK(back.category(c, r) == d.category(c, r));
      }
    }
  }
}

TEST_CASE("head keeps a prefix and shared dictionaries") {
  Dataset d = load_csv_text("x,c\n1,red\n2,blue\n3,red\n", nullptr,
                            MissingTokens{});
  Dataset h = d.head(2);
  REQUIRE(h.rows() == 2);
  CHECK(h.category(1, 1) == "blue");
  CHECK(h.categorical_column(1).dictionary ==
        d.categorical_column(1).dictionary);
  CHECK_THROWS_AS(d.head(4), std::invalid_argument);
}

TEST_CASE("competition ranks share the minimum rank across ties") {
  CHECK(competition_ranks(std::vector<double>{99.0, 1.0}) ==
        std::vector<uint64_t>{2, 1});
  CHECK(competition_ranks(std::vector<double>{1.0, 1.0, 5.0}) ==
        std::vector<uint64_t>{1, 1, 3});
  CHECK(competition_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0}) ==
        std::vector<uint64_t>{3, 1, 3, 2});
}

TEST_CASE("score files order by case id with min-ranks") {
  std::string text = write_scores_text(std::vector<double>{99.0, 1.0});
  CHECK(text == "case_id,aas,rank\n0,99,2\n1,1,1\n");
  CHECK(write_scores_text(std::vector<double>{}) == "case_id,aas,rank\n");
}
