#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ssir/errors.hpp"

namespace ssir {

/// Phi(s) = offset + amplitude * cos(s), period 2*pi.
struct CosineForcing {
  double offset = 1.0;
  double amplitude = 0.5;
};

/// One period of Phi sampled on a uniform grid s_j = j * period / n.
/// Evaluated through the trigonometric interpolant, which is smooth and
/// periodic and passes through every sample.
struct TableForcing {
  double period = 2.0 * std::numbers::pi;
  std::vector<double> samples;
};

/// Seasonal profile Phi. Immutable once constructed; construction rejects
/// profiles that are not strictly positive or lack two nondegenerate
/// critical points per period.
class Forcing {
 public:
  Forcing() : Forcing(cosine(1.0, 0.5)) {}

  static Forcing cosine(double offset, double amplitude) {
    Forcing f(Tag{});
    f.kind_ = CosineForcing{offset, amplitude};
    f.period_ = 2.0 * std::numbers::pi;
    if (!std::isfinite(offset) || !std::isfinite(amplitude))
      throw InvalidParams("forcing: non-finite cosine coefficients");
    if (offset - std::abs(amplitude) <= 0.0)
      throw InvalidParams("forcing: cosine profile must be strictly positive (offset > |amplitude|)");
    if (amplitude == 0.0)
      throw InvalidParams("forcing: constant profile has no nondegenerate critical points");
    f.min_ = offset - std::abs(amplitude);
    f.max_ = offset + std::abs(amplitude);
    return f;
  }

  static Forcing table(double period, std::vector<double> samples) {
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidParams("forcing: table period must be > 0");
    if (samples.size() < 4) throw InvalidParams("forcing: table needs at least 4 samples");
    for (double s : samples)
      if (!std::isfinite(s)) throw InvalidParams("forcing: non-finite table sample");
    Forcing f(Tag{});
    f.period_ = period;
    f.build_fourier(samples);
    f.kind_ = TableForcing{period, std::move(samples)};
    f.scan_table();
    return f;
  }

  /// Phi(s).
  double operator()(double s) const {
    if (const auto* c = std::get_if<CosineForcing>(&kind_)) return c->offset + c->amplitude * std::cos(s);
    const double x = 2.0 * std::numbers::pi * s / period_;
    double acc = a0_;
    for (std::size_t k = 0; k < ak_.size(); ++k) {
      const double kx = static_cast<double>(k + 1) * x;
      acc += ak_[k] * std::cos(kx) + bk_[k] * std::sin(kx);
    }
    return acc;
  }

  /// dPhi/ds.
  double derivative(double s) const {
    if (const auto* c = std::get_if<CosineForcing>(&kind_)) return -c->amplitude * std::sin(s);
    const double w = 2.0 * std::numbers::pi / period_;
    const double x = w * s;
    double acc = 0.0;
    for (std::size_t k = 0; k < ak_.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      acc += kk * (bk_[k] * std::cos(kk * x) - ak_[k] * std::sin(kk * x));
    }
    return w * acc;
  }

  double period() const { return period_; }
  double min_value() const { return min_; }
  double max_value() const { return max_; }
  const std::variant<CosineForcing, TableForcing>& kind() const { return kind_; }
  bool is_cosine() const { return std::holds_alternative<CosineForcing>(kind_); }

 private:
  struct Tag {};
  explicit Forcing(Tag) {}

  void build_fourier(const std::vector<double>& f) {
    const std::size_t n = f.size();
    const double two_pi = 2.0 * std::numbers::pi;
    a0_ = 0.0;
    for (double v : f) a0_ += v;
    a0_ /= static_cast<double>(n);
    const std::size_t kmax = n / 2;
    ak_.assign(kmax, 0.0);
    bk_.assign(kmax, 0.0);
    for (std::size_t k = 1; k <= kmax; ++k) {
      double a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double ang = two_pi * static_cast<double>(k * j) / static_cast<double>(n);
        a += f[j] * std::cos(ang);
        b += f[j] * std::sin(ang);
      }
      const bool nyquist = (n % 2 == 0) && (k == kmax);
      const double w = nyquist ? 1.0 / static_cast<double>(n) : 2.0 / static_cast<double>(n);
      ak_[k - 1] = w * a;
      bk_[k - 1] = nyquist ? 0.0 : w * b;
    }
  }

  // Dense scan of the interpolant for extrema and critical points.
  void scan_table() {
    const std::size_t m = 256 * (ak_.size() + 1);
    const double h = period_ / static_cast<double>(m);
    std::vector<double> vals(m);
    min_ = 1e300;
    max_ = -1e300;
    for (std::size_t i = 0; i < m; ++i) {
      vals[i] = (*this)(static_cast<double>(i) * h);
      min_ = std::min(min_, vals[i]);
      max_ = std::max(max_, vals[i]);
    }
    if (min_ <= 0.0) throw InvalidParams("forcing: table profile must be strictly positive");
    if (max_ - min_ <= 1e-12 * max_) throw InvalidParams("forcing: constant profile has no nondegenerate critical points");
    // Critical points: sign changes of the forward difference; nondegenerate
    // when the second difference is clearly nonzero there.
    std::size_t crit = 0;
    const double scale = std::max(1e-300, max_ - min_);
    for (std::size_t i = 0; i < m; ++i) {
      const double d0 = vals[(i + 1) % m] - vals[i];
      const double d1 = vals[(i + 2) % m] - vals[(i + 1) % m];
      if ((d0 > 0.0) != (d1 > 0.0) && std::abs(d1 - d0) > 1e-12 * scale) ++crit;
    }
    if (crit < 2) throw InvalidParams("forcing: profile needs at least two nondegenerate critical points per period");
  }

  std::variant<CosineForcing, TableForcing> kind_{};
  double period_ = 2.0 * std::numbers::pi;
  double min_ = 0.0;
  double max_ = 0.0;
  double a0_ = 0.0;
  std::vector<double> ak_, bk_;
};

/// Phi(s) for a validated forcing.
inline double forcing_value(const Forcing& forcing, double s) { return forcing(s); }

}  // namespace ssir
