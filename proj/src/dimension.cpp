#include "lsa/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "lsa/approximability.hpp"
#include "lsa/parallel.hpp"

namespace lsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cell keys are hashed; a collision only merges two cells' candidate lists.
std::uint64_t cell_key(const std::int64_t* cell, int n) {
  std::uint64_t h = 1469598103934665603ull;
  for (int k = 0; k < n; ++k) {
    h ^= std::uint64_t(cell[k]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return h;
}

// Farthest-point greedy. A new center at distance D from the previous
// centers can only lower d[j] for points within D of it, so updates scan a
// ball of radius D through a grid hash of cell size s once that is cheaper
// than a full pass.
std::vector<std::size_t> greedy_centers(const PointCloud& cloud, double s) {
  if (!(s > 0.0)) throw InvalidInput("covering radius must be positive");
  if (cloud.is_empty()) throw InvalidInput("covering of an empty set");
  const std::size_t N = cloud.size();
  const int n = cloud.dim();
  const double* X = cloud.data();

  std::vector<double> lo(n, kInf);
  for (std::size_t i = 0; i < N; ++i) {
    for (int k = 0; k < n; ++k) lo[k] = std::min(lo[k], X[i * n + k]);
  }
  std::vector<std::int64_t> cells(N * n);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < N; ++i) {
    for (int k = 0; k < n; ++k) {
      cells[i * n + k] = std::int64_t(std::floor((X[i * n + k] - lo[k]) / s));
    }
    grid[cell_key(&cells[i * n], n)].push_back(i);
  }

  std::vector<double> d(N, kInf);
  using Entry = std::pair<double, std::int64_t>;  // (distance, -index)
  std::priority_queue<Entry> heap;
  auto relax = [&](std::size_t j, const double* c) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = X[j * n + k] - c[k];
      acc += t * t;
    }
    const double dist = std::sqrt(acc);
    if (dist < d[j]) {
      d[j] = dist;
      heap.emplace(dist, -std::int64_t(j));
    }
  };

  std::vector<std::size_t> centers;
  std::size_t current = 0;
  double D = kInf;
  std::vector<std::int64_t> off(n), probe(n);
  for (;;) {
    centers.push_back(current);
    const double* c = X + current * n;
    const double span = std::ceil(D / s);
    const double cell_count = std::pow(2.0 * span + 1.0, n);
    if (!std::isfinite(cell_count) || cell_count > double(N)) {
      for (std::size_t j = 0; j < N; ++j) relax(j, c);
    } else {
      const std::int64_t w = std::int64_t(span);
      std::fill(off.begin(), off.end(), -w);
      for (;;) {
        for (int k = 0; k < n; ++k) probe[k] = cells[current * n + k] + off[k];
        const auto it = grid.find(cell_key(probe.data(), n));
        if (it != grid.end()) {
          for (auto j : it->second) relax(j, c);
        }
        int k = 0;
        while (k < n && ++off[k] > w) off[k] = -w, ++k;
        if (k == n) break;
      }
    }
    while (!heap.empty() && heap.top().first != d[std::size_t(-heap.top().second)]) heap.pop();
    if (heap.empty() || heap.top().first <= s) break;
    current = std::size_t(-heap.top().second);
    D = heap.top().first;
  }
  return centers;
}

double log_uniform(std::mt19937_64& rng, double a, double b) {
  std::uniform_real_distribution<double> u(std::log(a), std::log(b));
  return std::exp(u(rng));
}

std::string join_point(const Point& p) {
  std::string out;
  for (int k = 0; k < p.size(); ++k) out += fmt::format("{}{}", k ? "," : "", p[k]);
  return out;
}

}  // namespace

nlohmann::json CoveringReport::to_json() const {
  nlohmann::json j = {{"s", s}, {"count_greedy", count_greedy}};
  j["count_exact"] = count_exact ? nlohmann::json(*count_exact) : nlohmann::json(nullptr);
  auto& cs = j["centers"] = nlohmann::json::array();
  for (const auto& c : centers) cs.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  return j;
}

CoveringReport covering_number_greedy(const PointCloud& cloud, double s,
                                      const std::optional<Ball>& ball) {
  const PointCloud src = ball ? restrict(cloud, *ball) : cloud;
  CoveringReport rep;
  rep.s = s;
  const auto idx = greedy_centers(src, s);
  rep.count_greedy = idx.size();
  for (auto i : idx) rep.centers.emplace_back(src.point(i));
  if (src.size() <= 20) rep.count_exact = covering_number_exact(src, s);
  return rep;
}

std::size_t greedy_count(const PointCloud& cloud, double s) {
  return greedy_centers(cloud, s).size();
}

std::size_t covering_number_exact(const PointCloud& cloud, double s) {
  if (!(s > 0.0)) throw InvalidInput("covering radius must be positive");
  if (cloud.is_empty()) throw InvalidInput("covering of an empty set");
  const std::size_t N = cloud.size();
  if (N > 20) throw InvalidInput("exact covering limited to 20 points");
  std::vector<std::uint32_t> reach(N, 0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if ((cloud.point(i) - cloud.point(j)).norm() <= s) reach[i] |= 1u << j;
    }
  }
  const std::uint32_t full = N == 32 ? ~0u : (1u << N) - 1;
  std::vector<std::uint32_t> cover(std::size_t(1) << N, 0);
  int best = int(N);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int low = __builtin_ctz(mask);
    cover[mask] = cover[mask & (mask - 1)] | reach[low];
    if (cover[mask] == full) best = std::min(best, __builtin_popcount(mask));
  }
  return std::size_t(best);
}

nlohmann::json DimensionEstimate::to_json() const {
  return {{"slope", slope},   {"intercept", intercept}, {"r_max", r_max},
          {"r_min", r_min},   {"lambda", lambda},       {"residual", residual},
          {"scales", scales}, {"counts", counts}};
}

DimensionEstimate minkowski_estimate(const PointCloud& cloud, double r_max, double r_min,
                                     double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in (0, 1)");
  if (!(r_min > 0.0 && r_max >= r_min)) throw InvalidInput("bad scale range");
  if (cloud.is_empty()) throw InvalidInput("dimension of an empty set");
  if (cloud.h() > 0.0 && r_min < 2.0 * cloud.h()) {
    throw NumericFailure(fmt::format("scale {} below twice the resolution {}", r_min, cloud.h()));
  }
  DimensionEstimate e;
  e.r_max = r_max;
  e.r_min = r_min;
  e.lambda = lambda;
  for (double s = r_max; s >= r_min * (1.0 - 1e-9); s *= lambda) e.scales.push_back(s);
  if (e.scales.size() < 4) throw InvalidInput("need at least 4 scales in the range");
  e.counts.resize(e.scales.size());
  parallel_for(e.scales.size(), [&](std::size_t k) { e.counts[k] = greedy_count(cloud, e.scales[k]); });

  const std::size_t m = e.scales.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t k = 0; k < m; ++k) {
    xs[k] = std::log(1.0 / e.scales[k]);
    ys[k] = std::log(double(e.counts[k]));
    sx += xs[k], sy += ys[k], sxx += xs[k] * xs[k], sxy += xs[k] * ys[k];
  }
  const double var = sxx - sx * sx / m;
  e.slope = (sxy - sx * sy / m) / var;
  e.intercept = (sy - e.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = ys[k] - (e.intercept + e.slope * xs[k]);
    ss += r * r;
  }
  e.residual = std::sqrt(ss / m);
  return e;
}

DimensionEstimate minkowski_estimate(const SetSampler& set, const Ball& window, double r_max,
                                     double r_min, double lambda) {
  check_dim(set.dim(), window.dim(), "dimension window");
  if (!(r_min > 0.0)) throw InvalidInput("bad scale range");
  const double h = std::max(r_min / 4.0, set.resolution_floor());
  if (h > r_min / 2.0) {
    throw NumericFailure(fmt::format("scale {} is below the sampler floor {}", r_min,
                                     set.resolution_floor()));
  }
  return minkowski_estimate(set.window(window, h), r_max, r_min, lambda);
}

ProfileGrid default_profile_grid(int alpha) {
  ProfileGrid g;
  const int deepest = std::max(1, 7 - std::max(alpha, 0));
  for (int k = 4; k <= 4 * deepest; ++k) g.s.push_back(std::exp2(-k / 4.0));
  g.r = {1.0, 2.0};
  return g;
}

std::size_t member_covering_count(const ModelMember& m, double r, double s) {
  const double h = s * r / 2.0;
  const PointCloud net = sample_member(m, Ball(Point::Zero(m.cls.dim()), r), h);
  return greedy_count(net, s * r - h);
}

CoveringProfile fit_covering_profile(const ModelClassId& c, const std::vector<ModelMember>& members,
                                     const ProfileGrid& grid, std::uint64_t seed) {
  if (members.empty()) throw InvalidInput("covering profile needs members");
  if (grid.s.empty() || grid.r.empty()) throw InvalidInput("empty covering grid");
  for (double s : grid.s) {
    if (!(s > 0.0 && s <= 1.0)) throw InvalidInput("grid scales must lie in (0, 1]");
  }
  CoveringProfile p;
  p.alpha = analytic_alpha(c);
  p.s0 = *std::max_element(grid.s.begin(), grid.s.end());
  const double s_min = *std::min_element(grid.s.begin(), grid.s.end());

  const std::size_t ns = grid.s.size(), nr = grid.r.size();
  std::vector<double> prod(members.size() * nr * ns);
  parallel_for(prod.size(), [&](std::size_t i) {
    const double s = grid.s[i % ns];
    const double r = grid.r[(i / ns) % nr];
    const auto& m = members[i / (ns * nr)];
    prod[i] = double(member_covering_count(m, r, s)) * std::pow(s, p.alpha);
  });
  const double worst = *std::max_element(prod.begin(), prod.end());
  p.C = p.alpha == 0.0 ? worst : 1.25 * worst;

  struct Trial {
    std::size_t member;
    double r, s;
  };
  std::mt19937_64 rng(seed ^ 0x5deece66dull);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  std::vector<Trial> trials(50);
  for (auto& t : trials) {
    t.member = pick(rng);
    t.r = log_uniform(rng, 0.5, 2.0);
    t.s = s_min < p.s0 ? log_uniform(rng, s_min, p.s0) : p.s0;
  }
  std::vector<double> audit(trials.size());
  parallel_for(trials.size(), [&](std::size_t i) {
    const auto& t = trials[i];
    audit[i] = double(member_covering_count(members[t.member], t.r, t.s)) * std::pow(t.s, p.alpha);
  });
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (audit[i] > p.C) {
      throw AuditFailure(fmt::format("covering profile of {} violated: count*s^alpha = {} > C = {} "
                                     "at r = {}, s = {}",
                                     c.to_string(), audit[i], p.C, trials[i].r, trials[i].s));
    }
  }
  return p;
}

bool LemmaReport::passed() const { return count("fail") == 0 && count("greedy-marginal") == 0; }

std::size_t LemmaReport::count(const std::string& status) const {
  return std::size_t(std::count_if(rows.begin(), rows.end(),
                                   [&](const LemmaRow& r) { return r.status == status; }));
}

std::string LemmaReport::to_csv() const {
  std::ostringstream os;
  const int n = rows.empty() ? 0 : int(rows.front().x.size());
  for (int k = 0; k < n; ++k) os << 'x' << k + 1 << ',';
  os << "r,beta,beta_upper,count,bound,status\n";
  for (const auto& row : rows) {
    os << join_point(row.x) << ',' << fmt::format("{},{},{},{},{},{}\n", row.r, row.beta,
                                                  row.beta_upper, row.count, row.bound,
                                                  row.status);
  }
  return os.str();
}

nlohmann::json LemmaReport::summary() const {
  return {{"delta", delta},
          {"lambda", lambda},
          {"bound", bound},
          {"rows", rows.size()},
          {"pass", count("pass")},
          {"fail", count("fail")},
          {"greedy_marginal", count("greedy-marginal")},
          {"precondition_unmet", count("precondition-unmet")},
          {"passed", passed()}};
}

double lemma_lambda(const CoveringProfile& p, double delta) {
  if (!(p.alpha > 0.0)) throw InvalidInput("covering lemma needs alpha > 0");
  return delta * (2.0 + 2.0 * std::pow(p.C, 1.0 / p.alpha) * (1.0 + delta));
}

LemmaReport verify_covering_lemma(const SetSampler& set, const ModelClassId& c,
                                  const CoveringProfile& p, double delta,
                                  const std::vector<std::pair<Point, double>>& samples,
                                  double tolerance) {
  ApproxOptions opt;
  opt.tolerance = tolerance;
  return verify_covering_lemma(set, c, p, delta, samples, opt);
}

LemmaReport verify_covering_lemma(const SetSampler& set, const ModelClassId& c,
                                  const CoveringProfile& p, double delta,
                                  const std::vector<std::pair<Point, double>>& samples,
                                  const ApproxOptions& opt) {
  if (!(delta > 0.0)) throw InvalidInput("delta must be positive");
  const double lam = lemma_lambda(p, delta);
  if (std::pow(p.C, 1.0 / p.alpha) * delta > p.s0) {
    throw InvalidInput(fmt::format("C^(1/alpha) delta = {} exceeds s0 = {}",
                                   std::pow(p.C, 1.0 / p.alpha) * delta, p.s0));
  }
  LemmaReport rep;
  rep.delta = delta;
  rep.lambda = lam;
  rep.bound = std::size_t(std::ceil(std::pow(delta, -p.alpha) - 1e-9));
  rep.rows.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& [x, r] = samples[i];
    LemmaRow& row = rep.rows[i];
    row.x = x;
    row.r = r;
    row.bound = rep.bound;
    const ApproxResult b = beta(set, c, x, r, opt);
    row.beta = b.value;
    row.beta_upper = b.value + b.optimizer_gap + b.sampling_slack;
    if (row.beta_upper >= delta) {
      row.status = "precondition-unmet";
      return;
    }
    const double h = std::max(lam * r / 2.0, set.resolution_floor());
    const PointCloud w = set.window(Ball(x, r), h);
    const double hw = w.h();
    if (!(lam * r - hw > 0.0)) throw NumericFailure("covering scale below the sampler floor");
    row.count = greedy_count(w, lam * r - hw);
    if (row.count <= rep.bound) {
      row.status = "pass";
    } else {
      row.status = greedy_count(w, 2.0 * lam * r - hw) <= rep.bound ? "greedy-marginal" : "fail";
    }
  });
  return rep;
}

namespace {

// Index of the first violated smallness condition at eps, or -1.
int violated_condition(const CoveringProfile& p, double eps) {
  const double K = std::pow(p.C, 1.0 / p.alpha);
  const double mu = 2.0 + 2.0 * K * (1.0 + 2.0 * eps);
  if (2.0 * eps * mu > 0.5) return 0;
  if (K * 2.0 * eps > p.s0) return 1;
  if (!(2.0 * eps < 1.0) || std::log(mu) / std::log(1.0 / (2.0 * eps)) > 0.5) return 2;
  return -1;
}

const char* kConditionNames[] = {
    "2 eps mu0 <= 1/2",
    "C^(1/alpha) 2 eps <= s0",
    "log mu0 / log(1/(2 eps)) <= 1/2",
};

}  // namespace

Epsilon0 solve_epsilon0(const CoveringProfile& p) {
  if (!(p.alpha > 0.0) || !(p.C > 0.0) || !(p.s0 > 0.0)) {
    throw InvalidInput("eps0 needs alpha > 0, C > 0, s0 > 0");
  }
  double lo = 0.0, hi = 0.25;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (violated_condition(p, mid) < 0 ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw NumericFailure("no admissible eps0");
  Epsilon0 e;
  e.eps0 = lo;
  e.mu0 = 2.0 + 2.0 * std::pow(p.C, 1.0 / p.alpha) * (1.0 + 2.0 * lo);
  e.C_prime = 2.0 * p.alpha * std::log(e.mu0);
  return e;
}

std::string DimBoundReport::to_csv() const {
  return fmt::format(
      "eps,eps0,C_prime,measured_eps,bound,slope,residual,admissible,violation,passed\n"
      "{},{},{},{},{},{},{},{},\"{}\",{}\n",
      eps, constants.eps0, constants.C_prime, measured_eps, bound, estimate.slope,
      estimate.residual, admissible, violation, passed);
}

nlohmann::json DimBoundReport::to_json() const {
  return {{"eps", eps},
          {"eps0", constants.eps0},
          {"mu0", constants.mu0},
          {"C_prime", constants.C_prime},
          {"measured_eps", measured_eps},
          {"bound", bound},
          {"estimate", estimate.to_json()},
          {"admissible", admissible},
          {"violation", violation},
          {"passed", passed}};
}

DimBoundReport dimension_bound_audit(const SetSampler& set, const ModelClassId& c,
                                     const CoveringProfile& p, const DimBoundQuery& q) {
  if (!(q.eps > 0.0 && q.eps < 0.5)) throw InvalidInput("eps must lie in (0, 1/2)");
  if (q.points.empty()) throw InvalidInput("dimension bound audit needs base points");
  DimBoundReport rep;
  rep.eps = q.eps;
  rep.constants = solve_epsilon0(p);
  rep.bound = p.alpha + rep.constants.C_prime / std::log(1.0 / q.eps);

  ApproxOptions opt;
  opt.tolerance = q.tolerance;
  Ladder ladder;
  ladder.r0 = q.r0;
  ladder.lambda = 0.5;
  ladder.depth = q.depth;
  rep.measured_eps = profile(set, c, q.points, ladder, Variant::kBeta, opt).max_upper();

  const int bad = violated_condition(p, q.eps);
  if (bad >= 0) {
    rep.violation = fmt::format("eps = {} violates {} (eps0 = {})", q.eps, kConditionNames[bad],
                                rep.constants.eps0);
  } else if (rep.measured_eps > q.eps) {
    rep.violation = fmt::format("measured beta bound {} exceeds eps = {}", rep.measured_eps, q.eps);
  }
  rep.admissible = rep.violation.empty();
  rep.estimate = minkowski_estimate(set, q.window, q.est_r_max, q.est_r_min, q.est_lambda);
  rep.passed = rep.admissible && rep.estimate.slope <= rep.bound + rep.estimate.residual;
  return rep;
}

}  // namespace lsa
