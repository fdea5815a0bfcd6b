#pragma once

#include "probcast/common.hpp"
#include "probcast/date.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace probcast::io {

/// Point forecasts, one row per day.
struct PointForecasts {
  std::vector<Date> days;
  Matrix values;  // days x 24
};

/// CSV (date, h00..h23).
void write_point_csv(const PointForecasts& forecasts, std::ostream& out);
PointForecasts read_point_csv(std::istream& in, const std::string& source_name = "<stream>");

/// Opens a file for writing, creating parent directories; throws DataError.
std::ofstream open_output(const std::string& path);
std::ifstream open_input(const std::string& path);

}  // namespace probcast::io
