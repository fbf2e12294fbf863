#include "mile/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace mile {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

long long parse_int(const std::string& cell, std::size_t line_no, const char* col) {
  if (cell.empty()) fail(line_no, std::string("empty ") + col);
  char* end = nullptr;
  const long long v = std::strtoll(cell.c_str(), &end, 10);
  if (end != cell.c_str() + cell.size()) {
    fail(line_no, std::string("bad ") + col + " '" + cell + "'");
  }
  return v;
}

double parse_real(const std::string& cell, std::size_t line_no, const char* col) {
  if (cell.empty()) fail(line_no, std::string("empty ") + col);
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || std::isnan(v)) {
    fail(line_no, std::string("bad ") + col + " '" + cell + "'");
  }
  return v;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GroupedDataset read_dataset_csv(const std::string& path, std::optional<double> horizon) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_dataset_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool timed = false;
  if (line == "individual_id,obs_index,value") {
    timed = false;
  } else if (line == "individual_id,t,value") {
    timed = true;
  } else {
    fail(1, "unexpected header '" + line + "'");
  }
  if (timed && !horizon.has_value()) {
    throw std::runtime_error("read_dataset_csv: timestamped data needs a horizon");
  }

  // individual -> sort key (obs_index or t) -> value; maps give a canonical
  // order regardless of row order in the file.
  std::map<long long, std::map<double, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 3) fail(line_no, "expected 3 columns, got " + std::to_string(cells.size()));
    const long long id = parse_int(cells[0], line_no, "individual_id");
    double key;
    if (timed) {
      key = parse_real(cells[1], line_no, "t");
    } else {
      key = static_cast<double>(parse_int(cells[1], line_no, "obs_index"));
    }
    const double value = timed ? static_cast<double>(parse_int(cells[2], line_no, "value"))
                               : parse_real(cells[2], line_no, "value");
    auto [it, inserted] = rows[id].try_emplace(key, value);
    (void)it;
    if (!inserted) {
      fail(line_no, "duplicate (individual_id, " + std::string(timed ? "t" : "obs_index") +
                        ") pair in row '" + line + "'");
    }
  }
  if (rows.empty()) throw std::runtime_error("read_dataset_csv: no data rows in " + path);

  const auto& first = rows.begin()->second;
  const std::size_t m = first.size();
  std::vector<double> keys;
  keys.reserve(m);
  for (const auto& [k, v] : first) keys.push_back(k);

  std::vector<double> values;
  values.reserve(rows.size() * m);
  for (const auto& [id, obs] : rows) {
    if (obs.size() != m) {
      throw std::runtime_error("read_dataset_csv: individual " + std::to_string(id) + " has " +
                               std::to_string(obs.size()) + " observations, expected " +
                               std::to_string(m));
    }
    std::size_t j = 0;
    for (const auto& [k, v] : obs) {
      if (k != keys[j]) {
        throw std::runtime_error("read_dataset_csv: individual " + std::to_string(id) +
                                 " uses a different " + (timed ? "time grid" : "index set") +
                                 " than the first individual");
      }
      values.push_back(v);
      ++j;
    }
  }

  if (timed) {
    return GroupedDataset(rows.size(), std::move(keys), *horizon, std::move(values));
  }
  return GroupedDataset(rows.size(), m, std::move(values));
}

void write_dataset_csv(const GroupedDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  const bool timed = data.has_timestamps();
  out << (timed ? "individual_id,t,value" : "individual_id,obs_index,value") << '\n';
  for (std::size_t i = 0; i < data.n_individuals(); ++i) {
    for (std::size_t j = 0; j < data.obs_per_individual(); ++j) {
      out << i << ',';
      if (timed) {
        out << format_real(data.timestamps()[j]) << ','
            << static_cast<long long>(data.value(i, j));
      } else {
        out << j << ',' << format_real(data.value(i, j));
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed for " + path);
}

}  // namespace mile
