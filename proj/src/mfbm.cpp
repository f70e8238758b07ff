#include "mfbmvol/mfbm.hpp"

#include "mfbmvol/errors.hpp"
#include "mfbmvol/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace mfbmvol {

void MixWeights::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta), "mix weights must be finite");
  require(alpha != 0.0 || beta != 0.0, "mix weights (alpha, beta) must not both be zero");
}

void GridSpec::validate() const {
  require(n >= 1, "grid needs at least one interval");
  require(std::isfinite(t_start) && std::isfinite(t_end) && t_start < t_end,
          "grid requires t_start < t_end");
  require(t_start >= 0.0, "grid must start at a nonnegative time");
}

double GridSpec::time(std::size_t j) const noexcept {
  if (j == n) return t_end;
  return t_start + (t_end - t_start) * static_cast<double>(j) / static_cast<double>(n);
}

void ModelParams::validate() const {
  require(std::isfinite(s0) && s0 > 0.0, "s0 must be positive");
  require(std::isfinite(mu), "mu must be finite");
  require(std::isfinite(sigma2) && sigma2 > 0.0, "sigma2 must be positive");
  weights.validate();
}

double mfbm_covariance(double s, double t, const MixWeights& w, HurstParameter h) {
  require(s >= 0.0 && t >= 0.0, "covariance times must be nonnegative");
  const double two_h = 2.0 * h.value();
  return w.alpha * w.alpha * std::min(s, t) +
         0.5 * w.beta * w.beta *
             (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

std::pair<double, double> self_similarity_check(double s, double t, double lambda,
                                                const MixWeights& w, HurstParameter h) {
  require(lambda > 0.0, "scale factor must be positive");
  const MixWeights scaled{w.alpha * std::sqrt(lambda), w.beta * std::pow(lambda, h.value())};
  return {mfbm_covariance(lambda * s, lambda * t, w, h), mfbm_covariance(s, t, scaled, h)};
}

double increment_covariance(std::size_t j, std::size_t k, const GridSpec& grid,
                            const MixWeights& w, HurstParameter h) {
  require(j < grid.n && k < grid.n, "increment index out of range");
  const double dt = grid.spacing();
  const std::size_t lag = j > k ? j - k : k - j;
  const double brownian = lag == 0 ? w.alpha * w.alpha * dt : 0.0;
  return brownian + w.beta * w.beta * std::pow(dt, 2.0 * h.value()) * fgn_autocov(lag, h);
}

void sample_mfbm_increments(const GridSpec& grid, const MixWeights& w,
                            const CirculantFgnSampler& fgn, const RngSeed& seed,
                            std::uint32_t brownian_tag, std::uint32_t fgn_tag,
                            std::span<double> out) {
  require(fgn.size() == grid.n, "fGn sampler size does not match the grid");
  require(out.size() == grid.n, "increment buffer has the wrong length");
  const double dt = grid.spacing();
  const double b_scale = w.alpha * std::sqrt(dt);
  const double h_scale = w.beta * std::pow(dt, fgn.hurst().value());

  fgn.sample(seed.with_substream(fgn_tag), out);
  NormalStream z(seed.with_substream(brownian_tag));
  for (double& v : out) v = h_scale * v + b_scale * z.next();
}

std::vector<double> sample_mfbm_increments(const GridSpec& grid, const MixWeights& w,
                                           HurstParameter h, const RngSeed& seed) {
  grid.validate();
  w.validate();
  const CirculantFgnSampler fgn(h, grid.n);
  std::vector<double> out(grid.n);
  sample_mfbm_increments(grid, w, fgn, seed, kBrownianSubstream, kFgnSubstream, out);
  return out;
}

namespace {

std::vector<double> returns_from_levels(std::span<const double> levels) {
  std::vector<double> r(levels.size() - 1);
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) r[j] = std::log(levels[j + 1] / levels[j]);
  return r;
}

}  // namespace

SamplePath price_path(const ModelParams& params, std::span<const double> m_increments,
                      const GridSpec& grid) {
  params.validate();
  grid.validate();
  require(m_increments.size() == grid.n, "need exactly one increment per grid interval");

  const double sigma = std::sqrt(params.sigma2);
  const double two_h = 2.0 * params.h.value();
  const double t0 = grid.t_start;
  const double t0_pow = std::pow(t0, two_h);

  SamplePath path;
  path.grid = grid;
  path.times.resize(grid.n + 1);
  path.s_levels.resize(grid.n + 1);
  path.m_increments.assign(m_increments.begin(), m_increments.end());

  double m = 0.0;
  for (std::size_t j = 0; j <= grid.n; ++j) {
    if (j > 0) m += m_increments[j - 1];
    const double t = grid.time(j);
    const double elapsed = t - t0;
    const double compensator = 0.5 * params.sigma2 * (elapsed + std::pow(t, two_h) - t0_pow);
    path.times[j] = t;
    path.s_levels[j] = params.s0 * std::exp(params.mu * elapsed + sigma * m - compensator);
    if (!(path.s_levels[j] > 0.0) || !std::isfinite(path.s_levels[j])) {
      fail(ErrorCode::nonpositive_price, "price level under- or overflowed");
    }
  }
  path.log_returns = returns_from_levels(path.s_levels);
  return path;
}

SamplePath path_from_levels(std::span<const double> times, std::span<const double> levels) {
  require(times.size() == levels.size(), "times and levels must have equal length");
  require(levels.size() >= 2, "a path needs at least two observations");
  for (double s : levels) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      std::ostringstream os;
      os << "price levels must be positive and finite, got " << s;
      fail(ErrorCode::nonpositive_price, os.str());
    }
  }

  const std::size_t n = levels.size() - 1;
  const double mean_step = (times.back() - times.front()) / static_cast<double>(n);
  require(mean_step > 0.0, "times must be increasing");
  for (std::size_t j = 0; j < n; ++j) {
    const double step = times[j + 1] - times[j];
    if (!(std::abs(step - mean_step) <= 1e-9 * mean_step)) {
      std::ostringstream os;
      os << "observation times are not equispaced at row " << j + 1;
      fail(ErrorCode::invalid_argument, os.str());
    }
  }

  SamplePath path;
  path.grid = GridSpec{n, times.front(), times.back()};
  path.grid.validate();
  path.times.assign(times.begin(), times.end());
  path.s_levels.assign(levels.begin(), levels.end());
  path.log_returns = returns_from_levels(path.s_levels);
  return path;
}

void write_path_csv(std::ostream& os, const SamplePath& path) {
  os << "j,t_j,S,log_return\n";
  for (std::size_t j = 0; j < path.s_levels.size(); ++j) {
    os << j << ',' << format_double(path.times[j]) << ',' << format_double(path.s_levels[j])
       << ',';
    if (j > 0) os << format_double(path.log_returns[j - 1]);
    os << '\n';
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    std::ostringstream os;
    os << "line " << line_no << ": cannot parse number '" << field << "'";
    fail(ErrorCode::io, os.str());
  }
  return v;
}

}  // namespace

SamplePath read_path_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  std::ptrdiff_t t_col = -1, s_col = -1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "t" || header[i] == "t_j") t_col = static_cast<std::ptrdiff_t>(i);
      if (header[i] == "S") s_col = static_cast<std::ptrdiff_t>(i);
    }
    break;
  }
  if (t_col < 0 || s_col < 0) fail(ErrorCode::io, "CSV header must name a time column (t or t_j) and a price column (S)");

  std::vector<double> times, levels;
  const auto needed = static_cast<std::size_t>(std::max(t_col, s_col));
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() <= needed) {
      std::ostringstream os;
      os << "line " << line_no << ": too few columns";
      fail(ErrorCode::io, os.str());
    }
    times.push_back(parse_number(fields[static_cast<std::size_t>(t_col)], line_no));
    levels.push_back(parse_number(fields[static_cast<std::size_t>(s_col)], line_no));
  }
  return path_from_levels(times, levels);
}

}  // namespace mfbmvol
