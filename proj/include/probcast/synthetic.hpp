#pragma once

#include "probcast/common.hpp"
#include "probcast/data.hpp"

#include <cstdint>

namespace probcast::synthetic {

/// Generator law. Prices are a deterministic mean (level, hourly and weekly
/// profile, linear load and renewable effects) plus a deviation that follows
///   x[d,h] = ar1 x[d-1,h] + ar2 x[d-2,h] + ar7 x[d-7,h] + e[d,h],
/// where e[d,h] = sqrt(v_d) * hour_scale_h * z and v_d is a daily GARCH(1,1)
/// variance. After `regime_day` the noise is multiplied by `regime_scale`.
struct SyntheticSpec {
  Date start = Date::from_ymd(2021, 1, 1);
  int days = 900;

  double level = 80.0;
  double hourly_amplitude = 20.0;  // morning and evening peaks
  double weekend_drop = 10.0;
  double load_effect = 0.0008;       // EUR/MWh per MW above the load mean
  double renewable_effect = -0.0015; // EUR/MWh per MW above the renewable mean

  double ar1 = 0.6;
  double ar2 = 0.0;
  double ar7 = 0.2;

  double garch_omega = 6.0;   // daily variance law, EUR^2
  double garch_alpha = 0.1;
  double garch_beta = 0.8;
  double hour_heteroscedasticity = 0.5;  // evening hours up to 1 + this times noisier

  int regime_day = 365;        // day index where the volatility regime shifts (-1: never)
  double regime_scale = 1.8;

  double spike_probability = 0.01;  // per evening hour
  double spike_mean = 60.0;         // exponential spike size, EUR/MWh

  double load_noise = 1500.0;       // MW
  double renewable_noise = 4000.0;  // MW

  bool exogenous = true;   // false: flat load and renewables
  DstRule dst_rule = DstRule::kEuropeBerlin;  // kNone writes no clock artifacts

  /// Throws ConfigError for an unstable or inconsistent law.
  void validate() const;
};

/// Local-time hourly series with the DST artifacts of the chosen rule: the
/// spring-forward hour is absent and the fall-back hour appears twice with
/// values symmetric about the underlying price.
data::MarketSeries make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Noise-free underlying prices (days x 24), for oracle tests.
Matrix synthetic_prices(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace probcast::synthetic
