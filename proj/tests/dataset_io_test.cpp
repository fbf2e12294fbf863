#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mile/dataset_io.hpp"
#include "mile/types.hpp"

using namespace mile;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("indexed datasets round-trip through CSV") {
  GroupedDataset data(3, 2, {1.0, 0.0, 0.25, 1.0, 0.5, 0.125});
  TempFile tmp("mile_dataset_indexed.csv");
  write_dataset_csv(data, tmp.path());

  const auto back = read_dataset_csv(tmp.path());
  REQUIRE(back.n_individuals() == 3);
  REQUIRE(back.obs_per_individual() == 2);
  CHECK_FALSE(back.has_timestamps());
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(back.value(i, j) == data.value(i, j));
  }
}

TEST_CASE("timestamped datasets round-trip through CSV") {
  GroupedDataset data(2, {0.25, 0.5, 0.75}, 1.0, {3.0, 0.0, 7.0, 1.0, 2.0, 5.0});
  TempFile tmp("mile_dataset_timed.csv");
  write_dataset_csv(data, tmp.path());

  const auto back = read_dataset_csv(tmp.path(), 1.0);
  REQUIRE(back.n_individuals() == 2);
  REQUIRE(back.obs_per_individual() == 3);
  REQUIRE(back.has_timestamps());
  CHECK(back.horizon() == 1.0);
  for (std::size_t j = 0; j < 3; ++j) CHECK(back.timestamps()[j] == data.timestamps()[j]);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.value(i, j) == data.value(i, j));
  }
}

TEST_CASE("row order in the file does not matter") {
  TempFile tmp("mile_dataset_shuffled.csv");
  write_text(tmp.path(),
             "individual_id,obs_index,value\n"
             "1,1,4.5\n"
             "0,0,1.5\n"
             "1,0,3.5\n"
             "0,1,2.5\n");
  const auto data = read_dataset_csv(tmp.path());
  REQUIRE(data.n_individuals() == 2);
  REQUIRE(data.obs_per_individual() == 2);
  CHECK(data.value(0, 0) == 1.5);
  CHECK(data.value(0, 1) == 2.5);
  CHECK(data.value(1, 0) == 3.5);
  CHECK(data.value(1, 1) == 4.5);
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
  TempFile tmp("mile_dataset_crlf.csv");
  write_text(tmp.path(),
             "individual_id,obs_index,value\r\n"
             "0,0,1.5\r\n"
             "\r\n"
             "0,1,2.5\r\n");
  const auto data = read_dataset_csv(tmp.path());
  REQUIRE(data.n_individuals() == 1);
  CHECK(data.value(0, 1) == 2.5);
}

TEST_CASE("dataset CSV parse errors carry 1-based line numbers") {
  TempFile tmp("mile_dataset_bad.csv");

  SUBCASE("unexpected header") {
    write_text(tmp.path(), "id,idx,value\n0,0,1\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("unexpected header") != std::string::npos);
  }
  SUBCASE("wrong column count") {
    write_text(tmp.path(), "individual_id,obs_index,value\n0,0,1.0\n0,1\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("3 columns") != std::string::npos);
  }
  SUBCASE("unparseable id") {
    write_text(tmp.path(), "individual_id,obs_index,value\nalpha,0,1.0\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("individual_id") != std::string::npos);
  }
  SUBCASE("unparseable value") {
    write_text(tmp.path(), "individual_id,obs_index,value\n0,0,one\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("bad value") != std::string::npos);
  }
  SUBCASE("duplicate key pair") {
    write_text(tmp.path(), "individual_id,obs_index,value\n0,0,1.0\n0,0,2.0\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
  }
  SUBCASE("ragged individuals") {
    write_text(tmp.path(),
               "individual_id,obs_index,value\n0,0,1.0\n0,1,2.0\n1,0,3.0\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("individual 1") != std::string::npos);
    CHECK(msg.find("expected 2") != std::string::npos);
  }
  SUBCASE("mismatched index sets") {
    write_text(tmp.path(),
               "individual_id,obs_index,value\n0,0,1.0\n0,1,2.0\n1,0,3.0\n1,2,4.0\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
    CHECK(msg.find("different index set") != std::string::npos);
  }
  SUBCASE("mismatched time grids") {
    write_text(tmp.path(),
               "individual_id,t,value\n0,0.25,1\n0,0.5,2\n1,0.25,3\n1,0.75,4\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path(), 1.0); });
    CHECK(msg.find("different time grid") != std::string::npos);
  }
  SUBCASE("fractional count in timestamped data") {
    write_text(tmp.path(), "individual_id,t,value\n0,0.25,1.5\n");
    const auto msg = thrown_message([&] { read_dataset_csv(tmp.path(), 1.0); });
    CHECK(msg.find("line 2") != std::string::npos);
  }
  SUBCASE("empty file") {
    write_text(tmp.path(), "");
    CHECK_THROWS_AS(read_dataset_csv(tmp.path()), std::runtime_error);
  }
  SUBCASE("header only") {
    write_text(tmp.path(), "individual_id,obs_index,value\n");
    CHECK_THROWS_AS(read_dataset_csv(tmp.path()), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_dataset_csv("/nonexistent/data.csv"), std::runtime_error);
  }
}

TEST_CASE("timestamped data demands a horizon that covers the grid") {
  TempFile tmp("mile_dataset_horizon.csv");
  write_text(tmp.path(), "individual_id,t,value\n0,0.25,1\n0,0.5,2\n");

  const auto msg = thrown_message([&] { read_dataset_csv(tmp.path()); });
  CHECK(msg.find("needs a horizon") != std::string::npos);

  CHECK_NOTHROW(read_dataset_csv(tmp.path(), 1.0));
  // Grid times must lie strictly inside (0, horizon).
  CHECK_THROWS_AS(read_dataset_csv(tmp.path(), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(read_dataset_csv(tmp.path(), 0.4), std::invalid_argument);
}
