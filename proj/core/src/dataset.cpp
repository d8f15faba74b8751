#include "soebm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "soebm/checkpoint.hpp"
#include "soebm/error.hpp"

namespace soebm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Counts a run of columns named prefix_0, prefix_1, ... starting at `start`.
std::size_t count_prefixed(const std::vector<std::string>& header, std::size_t start,
                           const std::string& prefix) {
  std::size_t n = 0;
  while (start + n < header.size() && header[start + n] == prefix + "_" + std::to_string(n)) ++n;
  return n;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  table.header = split_csv_line(strip_cr(line));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.header.size()) + " fields, found " +
                    std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(parse_double(f));
      } catch (const IoError&) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_header(std::ostream& out, const std::string& prefix, std::size_t n, bool leading_comma) {
  for (std::size_t i = 0; i < n; ++i) {
    out << ((i > 0 || leading_comma) ? "," : "") << prefix << '_' << i;
  }
}

void write_values(std::ostream& out, const Vector& v, bool leading_comma) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << ((i > 0 || leading_comma) ? "," : "") << format_double(v(i));
  }
}

Vector slice(const std::vector<double>& row, std::size_t start, std::size_t n) {
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = row[start + i];
  return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

bool is_holiday(std::size_t day_of_year) {
  constexpr std::size_t kHolidays[] = {0, 45, 150, 185, 246, 327, 358, 359};
  return std::find(std::begin(kHolidays), std::end(kHolidays), day_of_year) != std::end(kHolidays);
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  for (auto i : indices) {
    out.x.push_back(x.at(i));
    out.y.push_back(y.at(i));
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  if (data.x.size() != data.y.size()) {
    throw DomainError("write_dataset_csv: mismatched columns");
  }
  auto out = open_for_write(path);
  write_header(out, "x", data.feature_dim(), false);
  write_header(out, "y", data.label_dim(), data.feature_dim() > 0);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_values(out, data.x[i], false);
    write_values(out, data.y[i], true);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const std::size_t m = count_prefixed(table.header, 0, "x");
  const std::size_t p = count_prefixed(table.header, m, "y");
  if (m == 0 || p == 0 || m + p != table.header.size()) {
    throw IoError(path.string() + ": header must be x_0..x_{m-1},y_0..y_{p-1}");
  }
  Dataset data;
  for (const auto& row : table.rows) {
    data.x.push_back(slice(row, 0, m));
    data.y.push_back(slice(row, m, p));
  }
  return data;
}

void write_decision_csv(const std::filesystem::path& path, const DecisionDataset& data) {
  auto out = open_for_write(path);
  const std::size_t m = data.x.empty() ? 0 : static_cast<std::size_t>(data.x[0].size());
  const std::size_t d = data.a.empty() ? 0 : static_cast<std::size_t>(data.a[0].size());
  write_header(out, "x", m, false);
  write_header(out, "a", d, true);
  out << ",cost\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_values(out, data.x[i], false);
    write_values(out, data.a[i], true);
    out << ',' << format_double(data.cost[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DecisionDataset read_decision_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const std::size_t m = count_prefixed(table.header, 0, "x");
  const std::size_t d = count_prefixed(table.header, m, "a");
  if (m == 0 || d == 0 || m + d + 1 != table.header.size() || table.header.back() != "cost") {
    throw IoError(path.string() + ": header must be x_0..x_{m-1},a_0..a_{d-1},cost");
  }
  DecisionDataset data;
  for (const auto& row : table.rows) {
    data.x.push_back(slice(row, 0, m));
    data.a.push_back(slice(row, m, d));
    data.cost.push_back(row.back());
  }
  return data;
}

Dataset gen_synthetic2d_dataset(std::size_t n, double noise, RngStream& stream) {
  if (n < 1) throw ConfigError("gen_synthetic2d_dataset: n must be at least 1");
  if (!(noise >= 0.0)) throw ConfigError("gen_synthetic2d_dataset: noise must be non-negative");
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(2);
    Vector y(2);
    for (int j = 0; j < 2; ++j) x(j) = -2.0 + 4.0 * stream.uniform();
    for (int j = 0; j < 2; ++j) y(j) = x(j) * x(j) + noise * stream.normal();
    data.x.push_back(std::move(x));
    data.y.push_back(std::move(y));
  }
  return data;
}

PowerSeries simulate_power_series(std::size_t days, RngStream& stream) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t start_day = stream.below(365);
  const std::size_t start_weekday = stream.below(7);

  PowerSeries series;
  series.start_day_of_year = start_day;
  series.start_weekday = start_weekday;
  series.load.reserve(24 * days);
  series.temperature.reserve(24 * days);
  double weather = 0.0;
  double noise = 0.0;
  for (std::size_t d = 0; d < days; ++d) {
    const std::size_t doy = (start_day + d) % 365;
    const bool off_day = (start_weekday + d) % 7 >= 5 || is_holiday(doy);
    weather = 0.8 * weather + 2.0 * stream.normal();
    for (std::size_t h = 0; h < 24; ++h) {
      const double hour = static_cast<double>(h);
      const double temp = 12.0 + 10.0 * std::sin(kTwoPi * (static_cast<double>(doy) - 105.0) / 365.0) +
                          4.0 * std::sin(kTwoPi * (hour - 9.0) / 24.0) + weather +
                          0.5 * stream.normal();
      const double profile = 0.9 * std::sin(kTwoPi * (hour - 9.0) / 24.0) +
                             0.3 * std::sin(2.0 * kTwoPi * (hour - 6.0) / 24.0);
      noise = 0.9 * noise + 0.05 * (1.0 + 0.08 * std::abs(temp - 16.0)) * stream.normal();
      const double z = 2.0 + profile - 0.3 * (off_day ? 1.0 : 0.0) +
                       0.05 * std::max(temp - 20.0, 0.0) + 0.04 * std::max(12.0 - temp, 0.0) +
                       noise;
      series.load.push_back(softplus(z));
      series.temperature.push_back(temp);
    }
  }
  return series;
}

Dataset gen_power_dataset(std::size_t n, std::size_t horizon, std::size_t feature_dim,
                          RngStream& stream) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (n < 1) throw ConfigError("gen_power_dataset: n must be at least 1");
  if (horizon < 1 || horizon > 24) throw ConfigError("gen_power_dataset: horizon must be in [1, 24]");
  const std::size_t core = 6 * horizon + 6;
  if (feature_dim < core) {
    throw ConfigError("gen_power_dataset: feature_dim must be at least " + std::to_string(core));
  }

  constexpr std::size_t kBurnIn = 14;
  const std::size_t days = n + kBurnIn + 2;
  const PowerSeries series = simulate_power_series(days, stream);
  const std::size_t start_day = series.start_day_of_year;
  const std::size_t start_weekday = series.start_weekday;

  Dataset data;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t day = kBurnIn + 2 + k;
    const std::size_t doy = (start_day + day) % 365;
    const std::size_t weekday = (start_weekday + day) % 7;
    Vector x(static_cast<Eigen::Index>(feature_dim));
    Vector y(static_cast<Eigen::Index>(horizon));
    Eigen::Index col = 0;
    const std::size_t today = 24 * day;
    const std::size_t yesterday = today - 24;
    const std::size_t two_days_ago = today - 48;
    std::vector<double> forecast(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      forecast[h] = series.temperature[today + h] + stream.normal();
      y(static_cast<Eigen::Index>(h)) = series.load[today + h];
    }
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = series.load[yesterday + h];
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = series.temperature[yesterday + h] / 10.0;
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = forecast[h] / 10.0;
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = (forecast[h] / 10.0) * (forecast[h] / 10.0);
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = std::max(forecast[h] - 20.0, 0.0) / 5.0;
    for (std::size_t h = 0; h < horizon; ++h) x(col++) = std::max(12.0 - forecast[h], 0.0) / 5.0;
    x(col++) = weekday >= 5 ? 1.0 : 0.0;
    x(col++) = is_holiday(doy) ? 1.0 : 0.0;
    x(col++) = std::sin(kTwoPi * static_cast<double>(doy) / 365.0);
    x(col++) = std::cos(kTwoPi * static_cast<double>(doy) / 365.0);
    x(col++) = std::sin(kTwoPi * static_cast<double>(weekday) / 7.0);
    x(col++) = std::cos(kTwoPi * static_cast<double>(weekday) / 7.0);
    for (std::size_t h = 0; col < x.size(); ++h) x(col++) = series.load[two_days_ago + h % 24];
    data.x.push_back(std::move(x));
    data.y.push_back(std::move(y));
  }
  return data;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t n,
                                                    const std::vector<double>& fractions,
                                                    RngStream& stream) {
  if (fractions.empty()) throw ConfigError("split_indices: no fractions");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("split_indices: fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split_indices: fractions must sum to 1");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[stream.below(i)]);

  std::vector<std::vector<std::size_t>> parts;
  std::size_t begin = 0;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    cumulative += fractions[k];
    const std::size_t end = k + 1 == fractions.size()
                                ? n
                                : std::min(n, static_cast<std::size_t>(
                                                  std::llround(cumulative * static_cast<double>(n))));
    parts.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end));
    begin = end;
  }
  return parts;
}

}  // namespace soebm
