// Copyright 2026 The qrlfolio Authors
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

#include "qrlfolio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qrlfolio/error.hpp"

namespace qrlfolio::eval {

namespace {

struct Candidate {
  std::vector<double> w;
  double score = -std::numeric_limits<double>::infinity();
  double distance = 0.0;
};

double l1_from_equal(std::span<const double> w) {
  const double e = 1.0 / static_cast<double>(w.size());
  double d = 0.0;
  for (double v : w) d += std::abs(v - e);
  return d;
}

bool better(const Candidate& a, const Candidate& b) {
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(a.score), std::abs(b.score)));
  if (a.score > b.score + tol) return true;
  if (b.score > a.score + tol) return false;
  if (a.distance < b.distance - 1e-12) return true;
  if (b.distance < a.distance - 1e-12) return false;
  return std::lexicographical_compare(a.w.begin(), a.w.end(), b.w.begin(), b.w.end());
}

class MvoScorer {
 public:
  MvoScorer(std::span<const double> returns, std::size_t assets, const MvoOptions& o)
      : returns_(returns), assets_(assets), rows_(returns.size() / assets), opt_(o) {}

  [[nodiscard]] bool admissible(std::span<const double> w) const {
    double shorts = 0.0;
    double sum = 0.0;
    for (double v : w) {
      if (v < opt_.lower - 1e-12 || v > opt_.upper + 1e-12) return false;
      shorts += std::max(0.0, -v);
      sum += v;
    }
    return shorts <= 1.0 + 1e-12 && std::abs(sum - 1.0) <= 1e-9;
  }

  [[nodiscard]] Candidate score(std::vector<double> w) const {
    std::vector<double> port(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t i = 0; i < assets_; ++i) port[r] += w[i] * returns_[r * assets_ + i];
    }
    Candidate c;
    c.score = sharpe(port, opt_.risk_free);
    c.distance = l1_from_equal(w);
    c.w = std::move(w);
    return c;
  }

 private:
  std::span<const double> returns_;
  std::size_t assets_;
  std::size_t rows_;
  MvoOptions opt_;
};

Candidate exhaustive(const MvoScorer& scorer, std::size_t n, const MvoOptions& o) {
  const auto lo = static_cast<long>(std::ceil(o.lower / o.grid_step - 1e-9));
  const auto hi = static_cast<long>(std::floor(o.upper / o.grid_step + 1e-9));
  std::vector<long> k(n - 1, lo);
  Candidate best;
  bool have = false;
  for (;;) {
    std::vector<double> w(n);
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      w[i] = static_cast<double>(k[i]) * o.grid_step;
      partial += w[i];
    }
    w[n - 1] = 1.0 - partial;
    if (scorer.admissible(w)) {
      auto c = scorer.score(std::move(w));
      if (!have || better(c, best)) {
        best = std::move(c);
        have = true;
      }
    }
    std::size_t pos = 0;
    while (pos < k.size() && ++k[pos] > hi) k[pos++] = lo;
    if (pos == k.size()) break;
  }
  if (!have) throw ArgumentError("mvo: admissible grid is empty");
  return best;
}

Candidate coordinate_search(const MvoScorer& scorer, std::size_t n, const MvoOptions& o) {
  Candidate best = scorer.score(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  if (!scorer.admissible(best.w)) throw ArgumentError("mvo: equal weights outside the bounds");
  for (double step = o.grid_step; step >= o.grid_step / 4.0; step /= 2.0) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          auto w = best.w;
          w[i] += step;
          w[j] -= step;
          if (!scorer.admissible(w)) continue;
          auto c = scorer.score(std::move(w));
          if (better(c, best)) {
            best = std::move(c);
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace

std::vector<FoldSplit> expanding_folds(std::size_t rows, std::size_t n_folds, double val_fraction,
                                       std::size_t min_block) {
  if (n_folds < 1) throw ArgumentError("need at least one fold");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ArgumentError("validation fraction must lie in [0, 1)");
  }
  const std::size_t block = rows / (n_folds + 1);
  if (block == 0 || block < min_block) {
    throw ArgumentError(std::to_string(rows) + " rows is too short for " + std::to_string(n_folds) +
                        " folds with blocks of at least " + std::to_string(std::max<std::size_t>(min_block, 1)) +
                        " rows");
  }
  std::vector<FoldSplit> folds;
  for (std::size_t k = 1; k <= n_folds; ++k) {
    const std::size_t span = k * block;
    const auto val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(span)));
    FoldSplit f;
    f.index = k;
    f.train = {0, span - val};
    f.validation = {span - val, span};
    f.test = {span, span + block};
    folds.push_back(f);
  }
  return folds;
}

double sharpe(std::span<const double> returns, double risk_free, double eps) {
  if (returns.size() < 2) throw ArgumentError("sharpe needs at least two returns");
  const auto n = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= n;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return (mean - risk_free) / (sd + eps);
}

Policy BaselinePolicy::policy() const {
  return [w = weights](const market::MarketState&) { return w; };
}

BaselinePolicy equal_weight_policy(std::size_t assets) {
  if (assets == 0) throw ArgumentError("equal weights need at least one asset");
  return {BaselineKind::EqualWeights, std::vector<double>(assets, 1.0 / static_cast<double>(assets))};
}

BaselinePolicy mvo_bruteforce(std::span<const double> returns, std::size_t assets,
                              const MvoOptions& options) {
  if (!(options.grid_step > 0.0)) throw ArgumentError("mvo grid step must be positive");
  if (assets == 0 || returns.size() % assets != 0) {
    throw ArgumentError("mvo returns are not a rows x assets matrix");
  }
  if (returns.size() / assets < 2) throw ArgumentError("mvo needs at least two return rows");
  const MvoScorer scorer(returns, assets, options);
  if (assets == 1) {
    const std::vector<double> w{1.0};
    if (!scorer.admissible(w)) throw ArgumentError("mvo: admissible grid is empty");
    return {BaselineKind::Mvo, w};
  }
  const Candidate best = assets <= options.exhaustive_max_assets
                             ? exhaustive(scorer, assets, options)
                             : coordinate_search(scorer, assets, options);
  return {BaselineKind::Mvo, best.w};
}

std::vector<double> period_return_matrix(const market::MarketDataset& data, Range range) {
  market::Environment env(data, range.begin, range.end);
  std::vector<double> out;
  for (std::size_t t = env.first_index(); env.can_step(t); t += data.config().rebalance_period) {
    const auto r = data.period_returns(t);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

BacktestResult run_backtest(const Policy& policy, const market::MarketDataset& data, Range range) {
  market::Environment env(data, range.begin, range.end);
  BacktestResult out;
  auto state = env.reset();
  out.equity.push_back(1.0);
  while (!env.done()) {
    const auto w = policy(state);
    out.indices.push_back(state.index);
    auto step = env.step(w);
    out.returns.push_back(step.net_return);
    out.turnover += step.turnover;
    out.equity.push_back(out.equity.back() * (1.0 + step.net_return));
    out.weights.push_back(std::move(step.applied_weights));
    state = std::move(step.next_state);
  }
  if (out.returns.size() >= 2) {
    out.sharpe = sharpe(out.returns, data.config().risk_free_per_period());
    const auto [lo, hi] = std::minmax_element(out.returns.begin(), out.returns.end());
    out.degenerate = *hi - *lo <= 1e-15;
  } else {
    out.sharpe = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

FoldSummary aggregate_folds(std::span<const double> fold_sharpes) {
  if (fold_sharpes.empty()) throw ArgumentError("no folds to aggregate");
  FoldSummary s;
  s.values.assign(fold_sharpes.begin(), fold_sharpes.end());
  const auto n = static_cast<double>(s.values.size());
  for (double v : s.values) s.mean += v;
  s.mean /= n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

FoldSummary aggregate_folds(const std::vector<BacktestResult>& results) {
  std::vector<double> v;
  for (const auto& r : results) v.push_back(r.sharpe);
  return aggregate_folds(v);
}

}  // namespace qrlfolio::eval
