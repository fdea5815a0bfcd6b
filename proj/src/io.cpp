#include "probcast/io.hpp"

#include "probcast/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace probcast::io {

void write_point_csv(const PointForecasts& forecasts, std::ostream& out) {
  out << "date";
  for (int h = 0; h < kHours; ++h) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "h%02d", h);
    out << ',' << buf;
  }
  out << '\n';
  for (std::size_t d = 0; d < forecasts.days.size(); ++d) {
    out << forecasts.days[d].to_string();
    for (int h = 0; h < kHours; ++h) {
      out << ',' << csv::format_number(forecasts.values(static_cast<Eigen::Index>(d), h));
    }
    out << '\n';
  }
}

PointForecasts read_point_csv(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::Table::read(in, source_name);
  if (t.header().size() != 1 + kHours || t.header()[0] != "date") {
    throw DataError(source_name + ": not a point forecast file (date, h00..h23)");
  }
  PointForecasts f;
  f.values.resize(static_cast<Eigen::Index>(t.rows().size()), kHours);
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& c = t.rows()[r];
    const std::string where = source_name + ":" + std::to_string(t.line_of(r));
    f.days.push_back(Date::parse(c[0]));
    if (r > 0 && !(f.days[r - 1] < f.days[r])) throw DataError(where + ": dates not increasing");
    for (int h = 0; h < kHours; ++h) {
      f.values(static_cast<Eigen::Index>(r), h) = csv::require_number(c[1 + h], where);
    }
  }
  return f;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + path);
  out.precision(17);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace probcast::io
