/* Copyright 2026 The PhyLSTM Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "phylstm/optim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "phylstm/core/error.hpp"

namespace phylstm::optim {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Trial {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative at a
  std::vector<double> x, g;
};

struct SearchOutcome {
  bool ok = false;
  Trial point;  // accepted point, or the lowest trial on failure
};

class LineSearch {
 public:
  LineSearch(const LossGradFn& fn, const LbfgsOptions& opt, std::span<const double> x0, double f0,
             std::span<const double> dir, std::size_t& evaluations)
      : fn_(fn), opt_(opt), x0_(x0), f0_(f0), dir_(dir), evaluations_(evaluations) {
    best_.f = std::numeric_limits<double>::infinity();
  }

  SearchOutcome run(double d0, double a_init) {
    d0_ = d0;
    Trial prev{0.0, f0_, d0, {}, {}};
    double a = a_init;
    for (std::size_t i = 0; trials_ < opt_.max_line_search; ++i) {
      Trial cur = eval(a);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * a * d0_ || (i > 0 && cur.f >= prev.f))
        return zoom(std::move(prev), std::move(cur));
      if (std::abs(cur.d) <= -opt_.c2 * d0_) return {true, std::move(cur)};
      if (cur.d >= 0.0) return zoom(std::move(cur), std::move(prev));
      prev = std::move(cur);
      a *= 2.0;
    }
    return fail();
  }

 private:
  Trial eval(double a) {
    Trial t;
    t.a = a;
    t.x.resize(x0_.size());
    for (std::size_t i = 0; i < x0_.size(); ++i) t.x[i] = x0_[i] + a * dir_[i];
    t.g.assign(x0_.size(), 0.0);
    ++trials_;
    ++evaluations_;
    t.f = fn_(t.x, t.g);
    if (std::isfinite(t.f)) {
      t.d = dot(t.g, dir_);
      if (!std::isfinite(t.d)) t.f = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(t.f) && t.f < best_.f) best_ = t;
    return t;
  }

  SearchOutcome zoom(Trial lo, Trial hi) {
    while (trials_ < opt_.max_line_search) {
      const double a = interpolate(lo, hi);
      Trial cur = eval(a);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * a * d0_ || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.d) <= -opt_.c2 * d0_) return {true, std::move(cur)};
        if (cur.d * (hi.a - lo.a) >= 0.0) hi = std::move(lo);
        lo = std::move(cur);
      }
      if (std::abs(hi.a - lo.a) <= 1e-16 * std::max(1.0, std::abs(lo.a))) break;
    }
    return fail();
  }

  // Minimiser of the cubic through both ends, kept inside the middle 80% of
  // the bracket; bisection when the cubic is unusable.
  static double interpolate(const Trial& lo, const Trial& hi) {
    const double left = std::min(lo.a, hi.a), right = std::max(lo.a, hi.a);
    const double width = right - left;
    const double mid = 0.5 * (lo.a + hi.a);
    if (!std::isfinite(hi.f) || !std::isfinite(lo.f)) return mid;
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    const double disc = d1 * d1 - lo.d * hi.d;
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
    const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
    if (!std::isfinite(a) || a < left + 0.1 * width || a > right - 0.1 * width) return mid;
    return a;
  }

  SearchOutcome fail() { return {false, best_}; }

  const LossGradFn& fn_;
  const LbfgsOptions& opt_;
  std::span<const double> x0_;
  double f0_;
  std::span<const double> dir_;
  std::size_t& evaluations_;
  double d0_ = 0.0;
  std::size_t trials_ = 0;
  Trial best_;
};

}  // namespace

Adam::Adam(std::size_t n, AdamOptions options) : opt_(options), m_(n, 0.0), v_(n, 0.0) {
  require(opt_.lr > 0.0 && opt_.decay >= 0.0, "adam: lr must be positive and decay non-negative");
  require(opt_.beta1 >= 0.0 && opt_.beta1 < 1.0 && opt_.beta2 >= 0.0 && opt_.beta2 < 1.0,
          "adam: betas must lie in [0, 1)");
  require(opt_.epsilon > 0.0, "adam: epsilon must be positive");
}

double Adam::current_lr() const noexcept {
  return opt_.lr / (1.0 + opt_.decay * static_cast<double>(t_));
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  require(params.size() == m_.size() && grad.size() == m_.size(), "adam: size mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw_error(ErrorKind::NumericFailure, "adam: non-finite gradient");
  const double lr = current_lr();
  ++t_;
  const double t = static_cast<double>(t_);
  const double c1 = 1.0 - std::pow(opt_.beta1, t);
  const double c2 = 1.0 - std::pow(opt_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * grad[i];
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + opt_.epsilon);
  }
}

const char* to_string(LbfgsStatus status) noexcept {
  switch (status) {
    case LbfgsStatus::Converged: return "converged";
    case LbfgsStatus::LossStalled: return "loss-stalled";
    case LbfgsStatus::MaxIterations: return "max-iterations";
    case LbfgsStatus::LineSearchFailed: return "line-search-failed";
    case LbfgsStatus::Stopped: return "stopped";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const LossGradFn& fn, std::vector<double> x0,
                           const LbfgsOptions& opt, const LbfgsCallback& callback) {
  require(opt.memory >= 1, "lbfgs: memory must be at least 1");
  require(opt.c1 > 0.0 && opt.c1 < opt.c2 && opt.c2 < 1.0, "lbfgs: need 0 < c1 < c2 < 1");
  require(opt.max_line_search >= 1, "lbfgs: need at least one line-search trial");
  const std::size_t n = x0.size();

  LbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n, 0.0);
  res.evaluations = 1;
  res.loss = fn(res.x, g);
  if (!std::isfinite(res.loss)) throw_error(ErrorKind::NumericFailure, "lbfgs: initial loss is not finite");

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;
  std::vector<double> dir(n), alpha(opt.memory);
  bool retried = false;

  while (true) {
    if (inf_norm(g) < opt.grad_tol) {
      res.status = LbfgsStatus::Converged;
      return res;
    }
    if (res.iterations >= opt.max_iter) {
      res.status = LbfgsStatus::MaxIterations;
      return res;
    }

    // Two-loop recursion: dir = -H g.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * dot(memory[k].s, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * memory[k].y[i];
    }
    if (!memory.empty()) {
      const Pair& last = memory.back();
      const double h0 = 1.0 / (last.rho * dot(last.y, last.y));
      for (double& v : dir) v *= h0;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * memory[k].s[i];
    }
    double d0 = dot(g, dir);
    if (!(d0 < 0.0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      d0 = dot(g, dir);
    }
    const double a_init = memory.empty() ? std::min(1.0, 1.0 / std::sqrt(-d0)) : 1.0;

    LineSearch search(fn, opt, res.x, res.loss, dir, res.evaluations);
    SearchOutcome out = search.run(d0, a_init);
    if (!out.ok) {
      if (!memory.empty() && !retried) {
        memory.clear();
        retried = true;
        continue;
      }
      if (out.point.f < res.loss) {
        res.x = std::move(out.point.x);
        res.loss = out.point.f;
      }
      res.status = LbfgsStatus::LineSearchFailed;
      return res;
    }
    retried = false;

    Trial& p = out.point;
    Pair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = p.x[i] - res.x[i];
      pair.y[i] = p.g[i] - g[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 0.0) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > opt.memory) memory.pop_front();
    }

    const double f_prev = res.loss;
    res.x = std::move(p.x);
    g = std::move(p.g);
    res.loss = p.f;
    ++res.iterations;

    LbfgsIterate it;
    it.iteration = res.iterations;
    it.loss = res.loss;
    it.grad_inf = inf_norm(g);
    it.step = p.a;
    it.armijo = res.loss <= f_prev + opt.c1 * p.a * d0;
    it.curvature = std::abs(p.d) <= -opt.c2 * d0;
    it.x = res.x;
    if (callback && !callback(it)) {
      res.status = LbfgsStatus::Stopped;
      return res;
    }
    if (it.grad_inf >= opt.grad_tol &&
        std::abs(f_prev - res.loss) <= opt.rel_tol * std::max(std::abs(f_prev), std::abs(res.loss))) {
      res.status = LbfgsStatus::LossStalled;
      return res;
    }
  }
}

}  // namespace phylstm::optim
