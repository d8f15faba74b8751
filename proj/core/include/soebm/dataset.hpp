#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "soebm/mlp.hpp"
#include "soebm/rng.hpp"

namespace soebm {

/// Feature/label pairs {(x_i, y_i)}.
struct Dataset {
  std::vector<Vector> x;
  std::vector<Vector> y;

  std::size_t size() const { return x.size(); }
  std::size_t feature_dim() const { return x.empty() ? 0 : static_cast<std::size_t>(x[0].size()); }
  std::size_t label_dim() const { return y.empty() ? 0 : static_cast<std::size_t>(y[0].size()); }
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Feature/optimal-decision pairs {(x_i, a*_i)} with the optimal true cost.
struct DecisionDataset {
  std::vector<Vector> x;
  std::vector<Vector> a;
  std::vector<double> cost;

  std::size_t size() const { return x.size(); }
};

// CSV: header x_0..x_{m-1},y_0..y_{p-1}; ragged rows are rejected.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

// CSV: header x_0..x_{m-1},a_0..a_{d-1},cost.
void write_decision_csv(const std::filesystem::path& path, const DecisionDataset& data);
DecisionDataset read_decision_csv(const std::filesystem::path& path);

/// x ~ U[-2, 2]^2, y_i = x_i^2 + noise * N(0, 1).
Dataset gen_synthetic2d_dataset(std::size_t n, double noise, RngStream& stream);

struct PowerSeries {
  std::vector<double> load;         // hourly, strictly positive
  std::vector<double> temperature;  // hourly, degrees C
  std::size_t start_day_of_year = 0;
  std::size_t start_weekday = 0;    // weekdays 5 and 6 are the weekend
};

/// Hourly load: softplus of a daily two-harmonic profile, a weekend/holiday
/// dip, temperature-driven heating and cooling terms and AR(1) noise whose
/// scale grows with temperature extremes. Temperatures follow a yearly cycle,
/// a daily cycle and a persistent daily weather anomaly.
PowerSeries simulate_power_series(std::size_t days, RngStream& stream);

/// Day-ahead examples from a simulated series. Features per example:
/// previous day's load and temperature, next day's noisy temperature forecast,
/// its square, cooling and heating degrees (6 x horizon values), then
/// weekend, holiday, yearly sin/cos and weekly sin/cos indicators. Any
/// remaining columns hold loads from two days earlier.
Dataset gen_power_dataset(std::size_t n, std::size_t horizon, std::size_t feature_dim,
                          RngStream& stream);

/// Deterministic shuffle split into consecutive parts with the given fractions
/// (the last part takes the remainder).
std::vector<std::vector<std::size_t>> split_indices(std::size_t n,
                                                    const std::vector<double>& fractions,
                                                    RngStream& stream);

}  // namespace soebm
