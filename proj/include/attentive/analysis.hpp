// Copyright 2026 The Attentive Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/** @file analysis.hpp Between-condition statistics.
 *
 * Rank-based omnibus test (Kruskal-Wallis) with epsilon-squared, pairwise
 * Dunn tests with Benjamini-Hochberg adjustment, and a contrast-coded OLS
 * trend test with Cohen's f-squared:
 *
 *     H       = [12 / (n(n+1)) * sum R_i^2 / n_i - 3(n+1)] / C
 *     C       = 1 - sum(t^3 - t) / (n^3 - n)          (tie correction)
 *     eps^2   = H (n+1) / (n^2 - 1)
 *     z_ij    = (Rbar_i - Rbar_j) / sqrt(S (1/n_i + 1/n_j)),
 *     S       = n(n+1)/12 - sum(t^3 - t) / (12 (n-1))
 *     f^2     = R^2 / (1 - R^2)
 *
 * The last section reads a long-format measures CSV and builds a per-measure
 * report with medians per condition.
 **/

#ifndef ATTENTIVE_ANALYSIS_HPP
#define ATTENTIVE_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "attentive/disclosure.hpp"
#include "attentive/error.hpp"
#include "attentive/transcript.hpp"

namespace attentive {

/// Labeled groups of per-participant values, in condition order.
struct GroupedSamples {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> groups;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

inline GroupedSamples make_groups(std::vector<std::vector<double>> groups) {
  GroupedSamples g;
  for (std::size_t i = 0; i < groups.size(); ++i) g.labels.push_back("g" + std::to_string(i + 1));
  g.groups = std::move(groups);
  return g;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

inline double epsilon_squared(double h, std::size_t n) {
  const auto nn = static_cast<double>(n);
  return h * (nn + 1.0) / (nn * nn - 1.0);
}

inline double chi_square_upper(double x, double df) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

inline double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

namespace detail {

struct Ranked {
  std::vector<std::vector<double>> ranks;  // mid-ranks, same shape as the groups
  double tie_sum = 0.0;                    // sum over tie blocks of t^3 - t
  std::size_t n = 0;
};

inline Ranked rank_groups(const GroupedSamples& g) {
  struct Obs {
    double value;
    std::size_t group, index;
  };
  std::vector<Obs> all;
  for (std::size_t gi = 0; gi < g.groups.size(); ++gi)
    for (std::size_t i = 0; i < g.groups[gi].size(); ++i) {
      if (!std::isfinite(g.groups[gi][i])) throw Error(ErrorCode::InvalidArgument, "non-finite value");
      all.push_back({g.groups[gi][i], gi, i});
    }
  std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  Ranked r;
  r.n = all.size();
  for (const auto& grp : g.groups) r.ranks.emplace_back(grp.size(), 0.0);
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) r.ranks[all[k].group][all[k].index] = mid;
    const auto t = static_cast<double>(j - i);
    r.tie_sum += t * t * t - t;
    i = j;
  }
  return r;
}

inline void require_omnibus(const GroupedSamples& g) {
  std::size_t nonempty = 0;
  for (const auto& grp : g.groups) nonempty += !grp.empty();
  if (nonempty < 2) throw Error(ErrorCode::InsufficientData, "need at least two non-empty groups");
  if (g.total() < 3) throw Error(ErrorCode::InsufficientData, "need at least three observations");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kruskal-Wallis
// ---------------------------------------------------------------------------

struct KwResult {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
  double epsilon_sq = 0.0;
  std::size_t n = 0;
  bool all_identical = false;
};

inline KwResult kruskal_wallis(const GroupedSamples& g) {
  detail::require_omnibus(g);
  const auto r = detail::rank_groups(g);
  const auto n = static_cast<double>(r.n);
  KwResult out;
  out.n = r.n;
  int k = 0;
  double sum = 0.0;
  for (const auto& ranks : r.ranks) {
    if (ranks.empty()) continue;
    ++k;
    const double rs = std::accumulate(ranks.begin(), ranks.end(), 0.0);
    sum += rs * rs / static_cast<double>(ranks.size());
  }
  out.df = k - 1;
  const double c = 1.0 - r.tie_sum / (n * n * n - n);
  if (c <= 0.0) {
    out.all_identical = true;
    return out;
  }
  // One division over a common denominator keeps integer-rank cases exact.
  const double denom = n * (n + 1.0);
  out.h = std::max(0.0, (12.0 * sum - 3.0 * (n + 1.0) * denom) / denom / c);
  out.p = chi_square_upper(out.h, out.df);
  out.epsilon_sq = epsilon_squared(out.h, r.n);
  return out;
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg
// ---------------------------------------------------------------------------

/// Step-up adjusted p-values, returned in input order.
inline std::vector<double> benjamini_hochberg(const std::vector<double>& p) {
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfRange, "p-value " + std::to_string(v));
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const std::size_t i = order[r];
    running = std::min(running, static_cast<double>(m) * p[i] / static_cast<double>(r + 1));
    out[i] = std::min(1.0, std::max(p[i], running));  // guard rounding of m*p/m
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dunn
// ---------------------------------------------------------------------------

struct DunnPair {
  std::size_t a = 0, b = 0;
  double z = 0.0;
  double p_raw = 1.0;
  double p_adj = 1.0;
};

/// All pairs (a < b) of non-empty groups, BH-adjusted together.
inline std::vector<DunnPair> dunn_posthoc(const GroupedSamples& g) {
  detail::require_omnibus(g);
  const auto r = detail::rank_groups(g);
  const auto n = static_cast<double>(r.n);
  const double s = n * (n + 1.0) / 12.0 - r.tie_sum / (12.0 * (n - 1.0));
  std::vector<double> mean_rank(r.ranks.size(), 0.0);
  for (std::size_t i = 0; i < r.ranks.size(); ++i)
    if (!r.ranks[i].empty())
      mean_rank[i] = std::accumulate(r.ranks[i].begin(), r.ranks[i].end(), 0.0) / static_cast<double>(r.ranks[i].size());

  std::vector<DunnPair> out;
  for (std::size_t a = 0; a < g.groups.size(); ++a) {
    for (std::size_t b = a + 1; b < g.groups.size(); ++b) {
      if (g.groups[a].empty() || g.groups[b].empty()) continue;
      DunnPair d{a, b};
      const double se = std::sqrt(s * (1.0 / static_cast<double>(g.groups[a].size()) +
                                       1.0 / static_cast<double>(g.groups[b].size())));
      if (se > 0.0) {
        d.z = (mean_rank[a] - mean_rank[b]) / se;
        d.p_raw = normal_two_sided(d.z);
      }
      out.push_back(d);
    }
  }
  std::vector<double> raw;
  for (const auto& d : out) raw.push_back(d.p_raw);
  const auto adj = benjamini_hochberg(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].p_adj = adj[i];
  return out;
}

// ---------------------------------------------------------------------------
// Contrast-coded trend
// ---------------------------------------------------------------------------

struct TrendResult {
  double slope = 0.0;
  double intercept = 0.0;
  double t = 0.0;
  /// t^2, the F statistic of the single contrast.
  double f = 0.0;
  int df = 0;
  double p = 1.0;
  double r_sq = 0.0;
  double f_sq = 0.0;
  std::vector<double> codes;
  /// Residual variance is zero; t and f_sq are infinite (or 0 for a flat fit).
  bool degenerate = false;
};

/// OLS of value on the group's contrast code, two-sided t test on the slope.
inline TrendResult contrast_trend(const GroupedSamples& g, std::vector<double> codes = {-1.0, 0.0, 1.0}) {
  if (codes.size() != g.groups.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(codes.size()) + " codes for " +
                                               std::to_string(g.groups.size()) + " groups");
  std::vector<double> x, y;
  std::set<double> levels;
  for (std::size_t i = 0; i < g.groups.size(); ++i)
    for (double v : g.groups[i]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
      x.push_back(codes[i]);
      y.push_back(v);
      levels.insert(codes[i]);
    }
  if (x.size() < 4) throw Error(ErrorCode::InsufficientData, "need at least four observations");
  if (levels.size() < 2) throw Error(ErrorCode::InsufficientData, "need two distinct contrast levels");

  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  TrendResult out;
  out.codes = std::move(codes);
  out.df = static_cast<int>(x.size()) - 2;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    sse += e * e;
  }
  if (sse <= 1e-24 * std::max(1.0, syy)) {
    out.degenerate = true;
    if (syy <= 0.0 || out.slope == 0.0) {
      out.r_sq = 0.0;
      return out;  // flat data: no trend, p = 1
    }
    out.r_sq = 1.0;
    out.t = std::copysign(std::numeric_limits<double>::infinity(), out.slope);
    out.f = std::numeric_limits<double>::infinity();
    out.p = 0.0;
    out.f_sq = std::numeric_limits<double>::infinity();
    return out;
  }
  const double se = std::sqrt(sse / out.df / sxx);
  out.t = out.slope / se;
  out.f = out.t * out.t;
  boost::math::students_t dist(out.df);
  out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t))));
  out.r_sq = syy > 0 ? 1.0 - sse / syy : 0.0;
  out.f_sq = out.r_sq / (1.0 - out.r_sq);
  return out;
}

// ---------------------------------------------------------------------------
// Measures report
// ---------------------------------------------------------------------------

struct Measurement {
  std::string session_id;
  Condition condition = Condition::Control;
  std::string measure;
  double value = 0.0;
};

/// Reads "session_id,condition,measure_name,value" rows (header required).
inline std::vector<Measurement> read_measures_csv(std::istream& in) {
  using Tok = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<Measurement> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    try {
      Tok tok(line);
      cells.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
    for (auto& c : cells) {
      const auto b = c.find_first_not_of(" \t");
      const auto e = c.find_last_not_of(" \t");
      c = b == std::string::npos ? "" : c.substr(b, e - b + 1);
    }
    if (cells.size() != 4) throw Error(ErrorCode::ParseError, "expected 4 columns, got " + std::to_string(cells.size()), line_no);
    if (header) {
      header = false;
      if (cells != std::vector<std::string>{"session_id", "condition", "measure_name", "value"})
        throw Error(ErrorCode::ParseError, "expected header session_id,condition,measure_name,value", line_no);
      continue;
    }
    Measurement m;
    m.session_id = cells[0];
    const auto cond = try_parse_condition(cells[1]);
    if (!cond) throw Error(ErrorCode::ParseError, "unknown condition \"" + cells[1] + "\"", line_no);
    m.condition = *cond;
    m.measure = cells[2];
    try {
      std::size_t used = 0;
      m.value = std::stod(cells[3], &used);
      if (used != cells[3].size() || !std::isfinite(m.value)) throw std::invalid_argument("value");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad value \"" + cells[3] + "\"", line_no);
    }
    out.push_back(std::move(m));
  }
  if (header) throw Error(ErrorCode::ParseError, "empty input");
  return out;
}

struct MeasureReport {
  std::string measure;
  std::array<std::size_t, 3> n{};
  std::array<double, 3> medians{};
  KwResult kw;
  std::vector<DunnPair> dunn;
  TrendResult trend;
};

inline GroupedSamples condition_groups(const std::vector<Measurement>& rows, const std::string& measure) {
  GroupedSamples g;
  g.labels = {"control", "bc", "bc_al"};
  g.groups.resize(3);
  for (const auto& r : rows)
    if (r.measure == measure) g.groups[static_cast<std::size_t>(r.condition)].push_back(r.value);
  return g;
}

/// One report per measure, in first-seen order. Omnibus errors propagate.
inline std::vector<MeasureReport> analyze_measures(const std::vector<Measurement>& rows) {
  std::vector<std::string> measures;
  for (const auto& r : rows)
    if (std::find(measures.begin(), measures.end(), r.measure) == measures.end()) measures.push_back(r.measure);
  if (measures.empty()) throw Error(ErrorCode::InsufficientData, "no measurements");
  std::vector<MeasureReport> out;
  for (const auto& m : measures) {
    const auto g = condition_groups(rows, m);
    MeasureReport rep;
    rep.measure = m;
    for (std::size_t i = 0; i < 3; ++i) {
      rep.n[i] = g.groups[i].size();
      rep.medians[i] = median(g.groups[i]);
    }
    try {
      rep.kw = kruskal_wallis(g);
      rep.dunn = dunn_posthoc(g);
      rep.trend = contrast_trend(g);
    } catch (const Error& e) {
      throw Error(e.code(), "measure \"" + m + "\": " + e.what());
    }
    out.push_back(std::move(rep));
  }
  return out;
}

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nullptr;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const MeasureReport& r) {
  static const std::array<const char*, 3> names{"control", "bc", "bc_al"};
  nlohmann::ordered_json j;
  j["measure"] = r.measure;
  for (std::size_t i = 0; i < 3; ++i) {
    j["n"][names[i]] = r.n[i];
    j["median"][names[i]] = detail::finite_or_null(r.medians[i]);
  }
  j["kruskal_wallis"] = {{"chi2", r.kw.h}, {"df", r.kw.df}, {"p", r.kw.p}, {"epsilon_sq", r.kw.epsilon_sq}};
  j["dunn"] = nlohmann::ordered_json::array();
  for (const auto& d : r.dunn)
    j["dunn"].push_back({{"a", names[d.a]}, {"b", names[d.b]}, {"z", d.z}, {"p_raw", d.p_raw}, {"p_adj", d.p_adj}});
  j["trend"] = {{"codes", r.trend.codes},
                {"slope", r.trend.slope},
                {"t", detail::finite_or_null(r.trend.t)},
                {"F", detail::finite_or_null(r.trend.f)},
                {"df", r.trend.df},
                {"p", r.trend.p},
                {"f_sq", detail::finite_or_null(r.trend.f_sq)},
                {"degenerate", r.trend.degenerate}};
  return j;
}

inline void write_report_csv(std::ostream& out, const std::vector<MeasureReport>& reports) {
  out << "measure,n_control,n_bc,n_bc_al,median_control,median_bc,median_bc_al,chi2,df,p,epsilon_sq,"
         "p_adj_control_bc,p_adj_control_bc_al,p_adj_bc_bc_al,trend_slope,trend_t,trend_F,trend_p,f_sq\n";
  for (const auto& r : reports) {
    auto pair_p = [&](std::size_t a, std::size_t b) {
      for (const auto& d : r.dunn)
        if (d.a == a && d.b == b) return detail::fmt(d.p_adj);
      return std::string();
    };
    out << csv_field(r.measure) << ',' << r.n[0] << ',' << r.n[1] << ',' << r.n[2] << ','
        << detail::fmt(r.medians[0]) << ',' << detail::fmt(r.medians[1]) << ',' << detail::fmt(r.medians[2]) << ','
        << detail::fmt(r.kw.h) << ',' << r.kw.df << ',' << detail::fmt(r.kw.p) << ','
        << detail::fmt(r.kw.epsilon_sq) << ',' << pair_p(0, 1) << ',' << pair_p(0, 2) << ',' << pair_p(1, 2)
        << ',' << detail::fmt(r.trend.slope) << ',' << detail::fmt(r.trend.t) << ','
        << detail::fmt(r.trend.f) << ',' << detail::fmt(r.trend.p) << ',' << detail::fmt(r.trend.f_sq) << '\n';
  }
}

}  // namespace attentive

#endif  // ATTENTIVE_ANALYSIS_HPP
