#include "probcast/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace probcast::synthetic {
namespace {

struct Generated {
  Matrix price, load, renewable;
};

Generated generate(const SyntheticSpec& s, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> spike(1.0 / std::max(s.spike_mean, 1e-12));
  const double pi = std::numbers::pi;

  const int n = s.days, burn = 30;
  Generated g{Matrix(n, kHours), Matrix(n, kHours), Matrix(n, kHours)};

  std::array<double, kHours> hour_shape{}, solar{}, hour_scale{};
  for (int h = 0; h < kHours; ++h) {
    hour_shape[h] = 0.6 * std::exp(-0.5 * std::pow((h - 8.0) / 2.0, 2)) +
                    1.0 * std::exp(-0.5 * std::pow((h - 19.0) / 2.5, 2)) - 0.35;
    solar[h] = std::max(0.0, std::sin(pi * (h - 6.0) / 14.0));
    hour_scale[h] = 1.0 + s.hour_heteroscedasticity * std::exp(-0.5 * std::pow((h - 19.0) / 3.0, 2));
  }

  const double load_mean = 55000.0, renewable_mean = 20000.0;
  double wind = 0.0;
  std::array<double, kHours> load_dev{};
  Matrix x = Matrix::Zero(n + burn, kHours);
  const double uncond = s.garch_omega / (1.0 - s.garch_alpha - s.garch_beta);
  double v = uncond, last_shock2 = uncond;

  for (int t = 0; t < n + burn; ++t) {
    const int d = t - burn;
    const Date date = s.start + d;
    const int wd = date.weekday();
    const double season = std::cos(2.0 * pi * (date.days() % 365) / 365.0);
    v = s.garch_omega + s.garch_alpha * last_shock2 + s.garch_beta * v;
    const double regime = (s.regime_day >= 0 && d >= s.regime_day) ? s.regime_scale : 1.0;
    double shock2 = 0.0;
    wind = 0.8 * wind + 0.6 * normal(rng);
    for (int h = 0; h < kHours; ++h) {
      double load = load_mean, ren = renewable_mean;
      if (s.exogenous) {
        load_dev[h] = 0.7 * load_dev[h] + s.load_noise * normal(rng);
        load = load_mean + 9000.0 * hour_shape[h] + 5000.0 * season -
               (wd >= 5 ? 7000.0 : 0.0) + load_dev[h];
        ren = renewable_mean + 12000.0 * solar[h] * (1.0 - 0.5 * season) +
              s.renewable_noise * (wind + 0.3 * normal(rng));
        ren = std::max(ren, 500.0);
      }
      const double z = normal(rng);
      shock2 += z * z;
      const double e = std::sqrt(v) * hour_scale[h] * regime * z;
      double dev = e + s.ar1 * (t >= 1 ? x(t - 1, h) : 0.0) + s.ar2 * (t >= 2 ? x(t - 2, h) : 0.0) +
                   s.ar7 * (t >= 7 ? x(t - 7, h) : 0.0);
      x(t, h) = dev;
      if (d < 0) continue;
      double price = s.level + s.hourly_amplitude * hour_shape[h] - (wd >= 5 ? s.weekend_drop : 0.0) +
                     s.load_effect * (load - load_mean) + s.renewable_effect * (ren - renewable_mean) + dev;
      if (s.spike_probability > 0.0 && h >= 17 && h <= 20 && unit(rng) < s.spike_probability) {
        price += spike(rng);
      }
      g.price(d, h) = price;
      g.load(d, h) = load;
      g.renewable(d, h) = ren;
    }
    last_shock2 = v * shock2 / kHours;
  }
  return g;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (days < 8) throw ConfigError("synthetic series needs at least 8 days");
  if (std::abs(ar1) + std::abs(ar2) + std::abs(ar7) >= 1.0) {
    throw ConfigError("synthetic AR coefficients must satisfy |ar1| + |ar2| + |ar7| < 1");
  }
  if (garch_omega < 0.0 || garch_alpha < 0.0 || garch_beta < 0.0 || garch_alpha + garch_beta >= 1.0) {
    throw ConfigError("synthetic GARCH law needs omega, alpha, beta >= 0 and alpha + beta < 1");
  }
  if (!(regime_scale >= 0.0) || hour_heteroscedasticity < 0.0) {
    throw ConfigError("synthetic noise scales must be non-negative");
  }
  if (spike_probability < 0.0 || spike_probability > 1.0 || spike_mean < 0.0) {
    throw ConfigError("synthetic spike probability must lie in [0, 1] and its mean be >= 0");
  }
  if (load_noise < 0.0 || renewable_noise < 0.0) throw ConfigError("synthetic noise must be >= 0");
}

Matrix synthetic_prices(const SyntheticSpec& spec, std::uint64_t seed) {
  return generate(spec, seed).price;
}

data::MarketSeries make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const Generated g = generate(spec, seed);
  data::MarketSeries series;
  series.dst_rule = spec.dst_rule;
  series.records.reserve(static_cast<std::size_t>(spec.days) * (kHours + 1));
  for (int d = 0; d < spec.days; ++d) {
    const Date date = spec.start + d;
    const bool spring = is_spring_forward_day(date, spec.dst_rule);
    const bool fall = is_fall_back_day(date, spec.dst_rule);
    for (int h = 0; h < kHours; ++h) {
      const LocalHour t{date, h};
      const double p = g.price(d, h), l = g.load(d, h), r = g.renewable(d, h);
      if (spring && h == kDstTransitionHour) continue;
      if (fall && h == kDstTransitionHour) {
        const double dp = 0.05 * std::abs(p) + 1.0;
        series.records.push_back({t, p - dp, l - 100.0, r - 50.0});
        series.records.push_back({t, p + dp, l + 100.0, r + 50.0});
        continue;
      }
      series.records.push_back({t, p, l, r});
    }
  }
  return series;
}

}  // namespace probcast::synthetic
