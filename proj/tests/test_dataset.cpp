#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_support.hpp"
#include "varsieve/run_table.hpp"
#include "varsieve/synthbench.hpp"

using namespace varsieve;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() { std::filesystem::remove(path); }
  void write(const std::string& content) {
    std::ofstream out(path);
    out << content;
  }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("load_csv basic structure") {
  TempFile f("vs_basic.csv");
  f.write("v1,v2,O1\n1,2,3\n4,5,6\n7,8,9\n");
  RunTable table = load_csv(f.str(), {"O1"});
  CHECK(table.n_runs() == 3);
  CHECK(table.variable_count() == 2);
  CHECK(table.objective_count() == 1);
  CHECK(table.column("O1").kind == ColumnKind::NumericObjective);
}

TEST_CASE("load_csv categorical objective from tokens") {
  TempFile f("vs_cat.csv");
  f.write("v1,O1\n1,a\n2,b\n3,a\n");
  RunTable table = load_csv(f.str(), {"O1"});
  const Column& o1 = table.column("O1");
  CHECK(o1.is_categorical());
  CHECK(o1.alphabet == std::vector<std::string>{"a", "b"});
  CHECK(o1.classes == std::vector<int>{0, 1, 0});
}

TEST_CASE("load_csv wide-table shape") {
  TempFile f("vs_wide.csv");
  std::string header;
  for (int v = 1; v <= 42; ++v) header += "v" + std::to_string(v) + ",";
  header += "O1,O2\n";
  std::string body;
  for (int r = 0; r < 5; ++r) {
    for (int v = 0; v < 42; ++v) body += std::to_string(r + v) + ",";
    body += r % 2 ? "a,c\n" : "b,d\n";
  }
  f.write(header + body);
  RunTable table = load_csv(f.str(), {"O1", "O2"});
  CHECK(table.variable_count() == 42);
  CHECK(table.objective_count() == 2);
  CHECK(table.n_runs() == 5);
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {}), Error);

  TempFile dup("vs_dup.csv");
  dup.write("v1,v1,O1\n1,2,a\n3,4,b\n");
  CHECK_THROWS_WITH_AS(load_csv(dup.str(), {"O1"}),
                       doctest::Contains("duplicate column"), Error);

  TempFile ragged("vs_ragged.csv");
  ragged.write("v1,O1\n1,a\n2\n");
  CHECK_THROWS_WITH_AS(load_csv(ragged.str(), {"O1"}),
                       doctest::Contains("fields"), Error);

  TempFile tok("vs_tok.csv");
  tok.write("v1,O1\nx,a\n2,b\n");
  CHECK_THROWS_WITH_AS(load_csv(tok.str(), {"O1"}),
                       doctest::Contains("non-numeric"), Error);

  TempFile missing("vs_missing.csv");
  missing.write("v1,O1\n1,a\n,b\n");
  CHECK_THROWS_AS(load_csv(missing.str(), {"O1"}), Error);

  TempFile noobj("vs_noobj.csv");
  noobj.write("v1,O1\n1,a\n2,b\n");
  CHECK_THROWS_AS(load_csv(noobj.str(), {"O9"}), Error);
}

TEST_CASE("load_arff minimal file") {
  TempFile f("vs_min.arff");
  f.write("% comment\n@relation runs\n@attribute v1 numeric\n"
          "@attribute cls {a,b}\n@data\n1.5,a\n2.5,b\n");
  RunTable table = load_arff(f.str());
  CHECK(table.variable_count() == 1);
  CHECK(table.objective_count() == 1);
  CHECK(table.n_runs() == 2);
  CHECK(table.column("cls").alphabet == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_arff keywords are case-insensitive") {
  TempFile f("vs_case.arff");
  f.write("@RELATION runs\n@ATTRIBUTE v1 NUMERIC\n@Attribute cls {a,b}\n"
          "@DATA\n1,a\n2,b\n");
  CHECK_NOTHROW(load_arff(f.str()));
}

TEST_CASE("load_arff error paths") {
  TempFile undeclared("vs_und.arff");
  undeclared.write("@relation r\n@attribute v1 numeric\n@attribute cls {a,b,c,d}\n"
                   "@data\n1,a\n2,e\n");
  CHECK_THROWS_WITH_AS(load_arff(undeclared.str()),
                       doctest::Contains("undeclared nominal"), Error);

  TempFile malformed("vs_mal.arff");
  malformed.write("@attribute v1 numeric\n@data\n1\n2\n");
  CHECK_THROWS_AS(load_arff(malformed.str()), Error);

  TempFile arity("vs_arity.arff");
  arity.write("@relation r\n@attribute v1 numeric\n@attribute cls {a,b}\n"
              "@data\n1,a\n2\n");
  CHECK_THROWS_AS(load_arff(arity.str()), Error);
}

TEST_CASE("ARFF round trip is the identity") {
  Xorshift64Star rng(11);
  for (int i = 0; i < 10; ++i) {
    RunTable table = vtest::random_table(rng, 4 + rng.below(8), 1 + rng.below(5),
                                         2 + rng.below(3));
    TempFile a("vs_rt_a.arff"), b("vs_rt_b.arff");
    save_arff(table, a.str());
    RunTable once = load_arff(a.str());
    save_arff(once, b.str());
    RunTable twice = load_arff(b.str());
    CHECK(vtest::tables_equal(once, twice));
    CHECK(vtest::tables_equal(table, once));
  }
}

TEST_CASE("CSV round trip is the identity") {
  Xorshift64Star rng(12);
  for (int i = 0; i < 10; ++i) {
    RunTable table = vtest::random_table(rng, 4 + rng.below(8), 1 + rng.below(5),
                                         2 + rng.below(3));
    TempFile a("vs_rt_a.csv"), b("vs_rt_b.csv");
    save_csv(table, a.str());
    RunTable once = load_csv(a.str(), {"O1"});
    save_csv(once, b.str());
    RunTable twice = load_csv(b.str(), {"O1"});
    // CSV carries no alphabet declaration, so unused labels cannot survive the
    // first emit; identity is over load -> emit -> load.
    CHECK(vtest::tables_equal(once, twice));
  }
}

TEST_CASE("discretize equal-width symmetric case") {
  RunTable table({vtest::num_col("v1", {1, 2, 3, 4}),
                  vtest::num_col("O1", {0.1, 0.2, 0.9, 1.0}, true)});
  DiscretizationSpec spec;
  spec.method = DiscretizationSpec::Method::EqualWidth;
  spec.k = 2;
  RunTable out = discretize_objective(table, "O1", spec);
  CHECK(out.column("O1").classes == std::vector<int>{0, 0, 1, 1});
  CHECK(out.column("O1").alphabet == std::vector<std::string>{"a", "b"});
  CHECK(out.discretization_cuts().at("O1").size() == 1);
}

TEST_CASE("discretize equal-frequency forced bijection") {
  RunTable table({vtest::num_col("v1", {1, 2, 3, 4}),
                  vtest::num_col("O1", {1, 2, 3, 4}, true)});
  DiscretizationSpec spec;
  spec.method = DiscretizationSpec::Method::EqualFrequency;
  spec.k = 4;
  RunTable out = discretize_objective(table, "O1", spec);
  CHECK(out.column("O1").classes == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("discretize explicit thresholds") {
  RunTable table({vtest::num_col("v1", {1, 2, 3, 4, 5}),
                  vtest::num_col("O1", {0.0, 0.3, 0.5, 0.8, 1.2}, true)});
  DiscretizationSpec spec;
  spec.method = DiscretizationSpec::Method::Thresholds;
  spec.thresholds = {0.25, 0.6, 1.0};
  RunTable out = discretize_objective(table, "O1", spec);
  CHECK(out.column("O1").classes == std::vector<int>{0, 1, 1, 2, 3});
  CHECK(out.column("O1").alphabet ==
        std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("discretize error and warning paths") {
  RunTable table({vtest::num_col("v1", {1, 2, 3}),
                  vtest::num_col("O1", {5, 5, 5}, true)});
  DiscretizationSpec width;
  width.method = DiscretizationSpec::Method::EqualWidth;
  width.k = 2;
  CHECK_THROWS_WITH_AS(discretize_objective(table, "O1", width),
                       doctest::Contains("zero width"), Error);

  RunTable varied({vtest::num_col("v1", {1, 2, 3}),
                   vtest::num_col("O1", {1, 2, 3}, true)});
  RunTable cat = discretize_objective(varied, "O1", width);
  CHECK_THROWS_WITH_AS(discretize_objective(cat, "O1", width),
                       doctest::Contains("already categorical"), Error);

  DiscretizationSpec outside;
  outside.method = DiscretizationSpec::Method::Thresholds;
  outside.thresholds = {10.0};  // above every value: class b empty
  RunTable warned = discretize_objective(varied, "O1", outside);
  CHECK(warned.warnings().size() == 1);

  DiscretizationSpec freq;
  freq.method = DiscretizationSpec::Method::EqualFrequency;
  freq.k = 5;
  CHECK_THROWS_AS(discretize_objective(varied, "O1", freq), Error);
}

TEST_CASE("discretization preserves value order") {
  Xorshift64Star rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 5 + rng.below(15);
    std::vector<double> values(n);
    for (double& v : values) v = rng.uniform() * 10.0;
    std::vector<double> vars(n);
    for (double& v : vars) v = rng.uniform();
    RunTable table(
        {vtest::num_col("v1", vars), vtest::num_col("O1", values, true)});

    for (auto method : {DiscretizationSpec::Method::EqualWidth,
                        DiscretizationSpec::Method::EqualFrequency,
                        DiscretizationSpec::Method::Thresholds}) {
      DiscretizationSpec spec;
      spec.method = method;
      spec.k = 2 + static_cast<int>(rng.below(3));
      if (method == DiscretizationSpec::Method::Thresholds)
        spec.thresholds = {2.5, 7.5};
      RunTable out = discretize_objective(table, "O1", spec);
      const std::vector<int>& classes = out.column("O1").classes;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (values[i] < values[j]) CHECK(classes[i] <= classes[j]);
    }
  }
}

TEST_CASE("default class labels extend past z") {
  auto labels = default_class_labels(28);
  CHECK(labels[0] == "a");
  CHECK(labels[25] == "z");
  CHECK(labels[26] == "aa");
  CHECK(labels[27] == "ab");
}

TEST_CASE("run table invariants") {
  CHECK_THROWS_AS(RunTable({vtest::num_col("v1", {1})}), Error);  // n_runs < 2
  CHECK_THROWS_AS(RunTable({vtest::num_col("v1", {1, 2}),
                            vtest::num_col("v1", {3, 4})}),
                  Error);  // duplicate names
  CHECK_THROWS_AS(RunTable({vtest::num_col("v1", {1, 2}),
                            vtest::num_col("v2", {1, 2, 3})}),
                  Error);  // ragged
}
