#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/SparseLU>

#include "varbif/bifurcation.hpp"
#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"

namespace varbif {

std::string to_string(DefiniteSign s) {
  switch (s) {
    case DefiniteSign::pos: return "pos";
    case DefiniteSign::neg: return "neg";
    default: return "indefinite";
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::confirmed_sufficient: return "confirmed_sufficient";
    case Verdict::candidate_only: return "candidate_only";
    default: return "rejected";
  }
}

std::string to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    default: return "both";
  }
}

std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided_single: return "two_sided_single";
    case Alternative::one_sided_pair: return "one_sided_pair";
    case Alternative::isolation_undetermined: return "isolation_undetermined";
    default: return "none_found";
  }
}

namespace {

DefiniteSign semidefinite_sign(const SparseMatrix& form, const SparseMatrix& gram, double tol) {
  const Vector e = form_spectrum(form, gram, false).values;
  const double thr = tol * std::max(e.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (e.minCoeff() >= -thr) return DefiniteSign::pos;
  if (e.maxCoeff() <= thr) return DefiniteSign::neg;
  return DefiniteSign::indefinite;
}

void check_base_state(const PencilFamily& family) {
  const Discretization& disc = family.discretization();
  const FieldVector u0 = family.base_state();
  const double gF = disc.dual_norm(assemble_load(disc, family.problem(), u0, Which::F));
  const double gK = disc.dual_norm(assemble_load(disc, family.problem(), u0, Which::K));
  if (gF > 1e-9 || gK > 1e-9)
    throw PreconditionError("base state is not a common critical point of F and K (|grad F| = " +
                            format_double(gF) + ", |grad K| = " + format_double(gK) + ")");
}

CandidateReport annotate(const PencilFamily& family, const DiscreteOperatorSet& ops, double lambda,
                         const Matrix* block, const CandidateOptions& options) {
  CandidateReport rep;
  rep.lambda_star = lambda;
  const SpectralOptions& so = options.spectral;
  const MorseData at = morse_data(ops, lambda, so);
  rep.nu = at.nu;
  rep.criteria.necessity_passed = at.nu > 0;
  if (at.nu == 0) {
    rep.verdict = Verdict::rejected;
    rep.notes.push_back("trivial kernel: not an eigenvalue of the pencil");
    return rep;
  }
  rep.criteria.G2_semidefinite_sign = semidefinite_sign(ops.B2, ops.gram, so.kernel_tol);
  const Vector b1 = form_spectrum(ops.B1, ops.gram, false).values;
  rep.criteria.B1_positive = b1.minCoeff() > so.kernel_tol * b1.cwiseAbs().maxCoeff();

  Matrix basis;
  if (block) {
    basis = *block;
  } else {
    basis = kernel_frame(family, lambda, so.kernel_tol, so.dense_limit).Z;
  }
  const double defect = invariance_defect(basis, ops);
  Matrix R = basis.transpose() * Matrix(ops.B1) * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
  const double rscale = std::max(b1.cwiseAbs().maxCoeff(), 1e-300);
  const bool definite_restriction = es.eigenvalues().minCoeff() > so.kernel_tol * rscale ||
                                    es.eigenvalues().maxCoeff() < -so.kernel_tol * rscale;
  rep.criteria.invariant_blocks_ok = defect <= options.invariance_tol && definite_restriction;

  double sep = 0.0;
  try {
    sep = eigenvalue_separation(family, lambda, so.kernel_tol);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("no separation estimate: ") + e.what());
  }
  if (sep > 0.0) {
    rep.delta = 0.4 * sep;
    rep.mu_left = morse_data(ops, lambda - 0.5 * rep.delta, so).mu;
    rep.mu_right = morse_data(ops, lambda + 0.5 * rep.delta, so).mu;
    try {
      const SparseMatrix B1 = ops.B1;
      const SparseMatrix B2 = ops.B2;
      const ZeroGroupReport zg = zero_group(
          [&](double l) { return SparseMatrix(B1 - l * B2); }, ops.gram, lambda, 0.5 * rep.delta,
          ZeroGroupOptions{so.kernel_tol, 8, 6, so.dense_limit});
      rep.r_plus = zg.r_plus;
      rep.r_minus = zg.r_minus;
      rep.criteria.r_jump = zg.jump();
    } catch (const Error& e) {
      rep.notes.push_back(std::string("zero-group route unavailable: ") + e.what());
    }
  }
  const bool sufficient = rep.criteria.G2_semidefinite_sign != DefiniteSign::indefinite ||
                          rep.criteria.B1_positive || rep.criteria.invariant_blocks_ok ||
                          rep.criteria.r_jump;
  rep.verdict = sufficient ? Verdict::confirmed_sufficient : Verdict::candidate_only;
  return rep;
}

}  // namespace

std::vector<CandidateReport> candidates(const PencilFamily& family, Interval window,
                                        const CandidateOptions& options) {
  check_base_state(family);
  const DiscreteOperatorSet ops = family.operators();
  const PencilEigenSystem eig = solve_pencil(ops, window, options.spectral);
  std::vector<CandidateReport> out;
  for (const auto& block : eig.blocks) out.push_back(annotate(family, ops, block.lambda, &block.basis, options));
  return out;
}

CandidateReport assess_candidate(const PencilFamily& family, double lambda, const CandidateOptions& options) {
  check_base_state(family);
  return annotate(family, family.operators(), lambda, nullptr, options);
}

NegativeControlResult negative_control(const ParameterFamily& family, double lambda,
                                       const NegativeControlOptions& options) {
  const Discretization& disc = family.discretization();
  const FieldVector u0 = family.base_state();
  const MorseData md = morse_data(family.hessian(lambda, u0), disc.gram(), lambda,
                                  SpectralOptions{options.kernel_tol, 1e-6, std::nullopt, 4096});
  if (md.nu != 0)
    throw PreconditionError("negative control needs a trivial kernel, but nu = " + std::to_string(md.nu) +
                            " at " + family.parameter_name() + " = " + format_double(lambda));
  NegativeControlResult out;
  out.lambda = lambda;
  out.trials = options.trials;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector& D = disc.nodal_weights();
  const int n = disc.size();
  for (int trial = 0; trial < options.trials; ++trial) {
    Vector r(n);
    for (int i = 0; i < n; ++i) r[i] = normal(rng);
    const double amp = 0.5 * options.ball_radius * (1.0 - unit(rng));
    Vector w = disc.gram_solve(Vector(D.cwiseProduct(r)));
    w = disc.gram_solve(Vector(D.cwiseProduct(w)));
    w *= amp / disc.norm(w);
    FieldVector u = u0 + w;
    Vector G = family.load(lambda, u);
    double res = disc.dual_norm(G);
    bool converged = false;
    for (int it = 0; it < options.max_newton && std::isfinite(res); ++it) {
      if (res <= options.lift_tol) {
        converged = true;
        break;
      }
      Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(family.hessian(lambda, u));
      if (lu.info() != Eigen::Success) break;
      const Vector step = lu.solve(-G);
      if (!step.allFinite()) break;
      double alpha = 1.0;
      bool accepted = false;
      for (int k = 0; k < 30; ++k) {
        const FieldVector trial_u = u + alpha * step;
        const Vector Gt = family.load(lambda, trial_u);
        const double rt = disc.dual_norm(Gt);
        if (std::isfinite(rt) && rt * rt <= (1.0 - 1e-4 * alpha) * res * res) {
          u = trial_u;
          G = Gt;
          res = rt;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    if (!converged && res <= options.lift_tol) converged = true;
    if (!converged) {
      ++out.diverged;
      continue;
    }
    const double dist = disc.norm(u - u0);
    if (dist <= 10.0 * options.lift_tol)
      ++out.trivial;
    else if (dist <= options.ball_radius)
      ++out.nontrivial;
    else
      ++out.escaped;
  }
  out.passed = out.nontrivial == 0;
  return out;
}

namespace {

std::vector<Vector> seed_directions(int d, int requested) {
  std::vector<Vector> dirs;
  if (d == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
    return dirs;
  }
  const int n = requested > 0 ? requested : (d == 2 ? 16 : 64);
  const int half = std::max(1, n / 2);
  if (d == 2) {
    for (int k = 0; k < half; ++k) {
      const double th = std::numbers::pi * (k + 0.5) / half;
      Vector v(2);
      v << std::cos(th), std::sin(th);
      dirs.push_back(v);
    }
  } else if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < half; ++k) {
      const double y = 1.0 - (k + 0.5) / half;
      const double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
      Vector v(3);
      v << rad * std::cos(golden * k), y, rad * std::sin(golden * k);
      dirs.push_back(v);
    }
  } else {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> normal;
    for (int k = 0; k < half; ++k) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = normal(rng);
      dirs.push_back(v.normalized());
    }
  }
  const std::size_t m = dirs.size();
  for (std::size_t k = 0; k < m; ++k) dirs.push_back(-dirs[k]);
  return dirs;
}

struct LocalResult {
  std::vector<BranchSample> samples;
  std::vector<std::string> log;
};

// Damped Newton on the reduced gradient. Returns nullopt for trivial or
// failed runs.
std::optional<Vector> reduced_newton(ReducedModel& model, double lambda, Vector z, int max_it,
                                     std::vector<std::string>& log) {
  const double tol = model.options().reduced_tol;
  const double trivial = 1e-4 * model.options().ball_radius;
  try {
    Vector g = model.reduced_gradient(lambda, z);
    for (int it = 0; it < max_it; ++it) {
      const Matrix H = model.reduced_hessian(lambda, z);
      const Vector step = H.colPivHouseholderQr().solve(-g);
      if (!step.allFinite()) return std::nullopt;
      if (g.norm() <= tol && step.norm() <= 1e-3 * z.norm()) {
        const Vector polished = z + step;
        if (polished.norm() <= model.ball_radius()) z = polished;
        return z.norm() > 10.0 * tol ? std::optional<Vector>(z) : std::nullopt;
      }
      double alpha = 1.0;
      const double radius = model.ball_radius();
      bool accepted = false;
      for (int k = 0; k < 20; ++k) {
        const Vector trial = z + alpha * step;
        if (trial.norm() <= radius) {
          const Vector gt = model.reduced_gradient(lambda, trial);
          if (gt.squaredNorm() <= (1.0 - 1e-4 * alpha) * g.squaredNorm() || (k == 19)) {
            z = trial;
            g = gt;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) return std::nullopt;
      if (z.norm() < trivial) return std::nullopt;
    }
  } catch (const Error& e) {
    log.push_back("seed at " + model.family().parameter_name() + " = " + format_double(lambda) +
                  " abandoned: " + e.what());
  }
  return std::nullopt;
}

LocalResult search_at(ReducedModel model, double lambda, const BranchSearchOptions& options) {
  LocalResult out;
  const int d = model.frame().dimension();
  const auto dirs = seed_directions(d, options.directions);
  const Discretization& disc = model.family().discretization();
  const double dedupe = 20.0 * model.options().reduced_tol;
  std::vector<Vector> zeros;
  for (double frac : options.radius_fractions) {
    for (const Vector& dir : dirs) {
      const Vector z0 = frac * model.ball_radius() * dir;
      if (z0.norm() > model.ball_radius()) continue;
      auto z = reduced_newton(model, lambda, z0, options.max_iterations, out.log);
      if (!z) continue;
      bool dup = false;
      for (const auto& w : zeros)
        if ((w - *z).norm() <= dedupe) dup = true;
      if (!dup) zeros.push_back(*z);
    }
  }
  std::sort(zeros.begin(), zeros.end(), [](const Vector& a, const Vector& b) {
    for (int i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });
  for (const Vector& z : zeros) {
    try {
      BranchSample s;
      s.lambda = lambda;
      s.z = z;
      s.u = model.lift(lambda, z);
      s.residual = model.family().residual(lambda, s.u);
      s.amplitude = disc.norm(s.u - model.base());
      bool dup = false;
      for (const auto& t : out.samples)
        if (disc.norm(t.u - s.u) <= dedupe) dup = true;
      if (!dup) out.samples.push_back(std::move(s));
    } catch (const Error& e) {
      out.log.push_back("lift discarded at " + model.family().parameter_name() + " = " + format_double(lambda) +
                        ": " + e.what());
    }
  }
  for (const auto& w : model.warnings()) out.log.push_back(w);
  return out;
}

using Chain = std::vector<BranchSample>;

std::vector<Chain> chain_side(const std::vector<std::vector<BranchSample>*>& levels) {
  std::vector<Chain> chains;
  for (auto* level : levels) {
    std::vector<bool> used(level->size(), false);
    std::vector<bool> extended(chains.size(), false);
    while (true) {
      double best = std::numeric_limits<double>::infinity();
      int bc = -1, bs = -1;
      for (std::size_t c = 0; c < chains.size(); ++c) {
        if (extended[c]) continue;
        for (std::size_t s = 0; s < level->size(); ++s) {
          if (used[s]) continue;
          const double dist = (chains[c].back().z - (*level)[s].z).norm();
          if (dist < best) {
            best = dist;
            bc = static_cast<int>(c);
            bs = static_cast<int>(s);
          }
        }
      }
      if (bc < 0) break;
      chains[bc].push_back((*level)[bs]);
      extended[bc] = true;
      used[bs] = true;
    }
    for (std::size_t s = 0; s < level->size(); ++s)
      if (!used[s]) chains.push_back({(*level)[s]});
  }
  return chains;
}

}  // namespace

BranchSearchResult find_branches(const ReducedModel& model, const std::vector<double>& lambda_grid,
                                 const BranchSearchOptions& options) {
  BranchSearchResult result;
  result.lambda_star = model.lambda_star();
  result.grid = lambda_grid;
  std::sort(result.grid.begin(), result.grid.end());
  result.grid.erase(std::unique(result.grid.begin(), result.grid.end()), result.grid.end());
  const std::size_t m = result.grid.size();
  std::vector<LocalResult> local(m);
  std::vector<std::string> errors(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < m; i = next++) {
      try {
        local[i] = search_at(model, result.grid[i], options);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(m)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < m; ++i) {
    if (!errors[i].empty()) throw PreconditionError(errors[i]);
    for (auto& line : local[i].log) result.log.push_back(std::move(line));
  }

  const double ls = model.lambda_star();
  const double at_tol = 1e-12 * std::max(1.0, std::abs(ls));
  std::vector<std::size_t> right, left;
  for (std::size_t i = 0; i < m; ++i) {
    const double off = result.grid[i] - ls;
    if (std::abs(off) <= at_tol) {
      for (auto& s : local[i].samples) result.at_star.push_back(s);
    } else {
      (off > 0 ? right : left).push_back(i);
    }
  }
  auto by_distance = [&](std::size_t a, std::size_t b) {
    return std::abs(result.grid[a] - ls) < std::abs(result.grid[b] - ls);
  };
  std::sort(right.begin(), right.end(), by_distance);
  std::sort(left.begin(), left.end(), by_distance);
  std::vector<std::vector<BranchSample>*> rl, ll;
  for (auto i : right) rl.push_back(&local[i].samples);
  for (auto i : left) ll.push_back(&local[i].samples);
  std::vector<Chain> rc = chain_side(rl);
  std::vector<Chain> lc = chain_side(ll);

  // A left and a right chain with matching tangent z / (lambda - lambda*) form one crossing branch.
  auto slope = [&](const Chain& c) { return Vector(c.front().z / (c.front().lambda - ls)); };
  std::vector<bool> rmerged(rc.size(), false), lmerged(lc.size(), false);
  std::vector<std::pair<Chain, Side>> chains;
  for (std::size_t a = 0; a < lc.size(); ++a) {
    const Vector sl = slope(lc[a]);
    for (std::size_t b = 0; b < rc.size(); ++b) {
      if (rmerged[b]) continue;
      const Vector sr = slope(rc[b]);
      if ((sl - sr).norm() <= 0.25 * std::max(sl.norm(), sr.norm())) {
        Chain joined(lc[a].rbegin(), lc[a].rend());
        joined.insert(joined.end(), rc[b].begin(), rc[b].end());
        chains.emplace_back(std::move(joined), Side::both);
        rmerged[b] = lmerged[a] = true;
        break;
      }
    }
  }
  for (std::size_t a = 0; a < lc.size(); ++a)
    if (!lmerged[a]) chains.emplace_back(Chain(lc[a].rbegin(), lc[a].rend()), Side::left);
  for (std::size_t b = 0; b < rc.size(); ++b)
    if (!rmerged[b]) chains.emplace_back(rc[b], Side::right);

  int id = 0;
  for (auto& [samples, side] : chains) {
    Branch br;
    br.id = id++;
    br.samples = std::move(samples);
    br.side = side;
    result.branches.push_back(std::move(br));
  }

  if (model.family().odd()) {
    const Discretization& disc = model.family().discretization();
    const FieldVector& u0 = model.base();
    for (auto& a : result.branches) {
      for (auto& b : result.branches) {
        if (a.id == b.id || a.symmetry_partner) continue;
        bool mirror = false;
        for (const auto& sa : a.samples)
          for (const auto& sb : b.samples)
            if (sa.lambda == sb.lambda &&
                disc.norm((sa.u - u0) + (sb.u - u0)) <= 1e-6 * std::max(1.0, sa.amplitude))
              mirror = true;
        if (mirror) {
          a.symmetry_partner = b.id;
          b.symmetry_partner = a.id;
        }
      }
    }
  }
  return result;
}

AlternativeVerdict classify(const BranchSearchResult& result) {
  AlternativeVerdict v;
  v.grid = result.grid;
  const double ls = result.lambda_star;
  const bool grid_left = std::any_of(result.grid.begin(), result.grid.end(), [&](double l) { return l < ls; });
  const bool grid_right = std::any_of(result.grid.begin(), result.grid.end(), [&](double l) { return l > ls; });
  if (!(grid_left && grid_right)) v.warnings.push_back("parameter grid is not two-sided");
  if (!result.at_star.empty()) {
    v.classification = Alternative::isolation_undetermined;
    return v;
  }
  int nl = 0, nr = 0;
  bool crossing = false;
  for (const auto& b : result.branches) {
    v.branch_ids.push_back(b.id);
    if (b.side == Side::both) crossing = true;
    if (b.side != Side::right) ++nl;
    if (b.side != Side::left) ++nr;
  }
  if (crossing || (nl >= 1 && nr >= 1)) {
    v.classification = Alternative::two_sided_single;
  } else if ((nr >= 2 && nl == 0) || (nl >= 2 && nr == 0)) {
    v.classification = Alternative::one_sided_pair;
  } else {
    v.classification = Alternative::none_found;
    if (nl + nr == 0)
      v.warnings.push_back("no nontrivial branches found; the ball radius or parameter grid may be too coarse");
    else
      v.warnings.push_back("a single one-sided branch does not match any alternative; search coverage is incomplete");
  }
  return v;
}

SymmetricCount symmetric_count(const ReducedModel& model, const BranchSearchResult& result) {
  if (!model.family().odd())
    throw PreconditionError("symmetric_count requires a family with odd symmetry");
  SymmetricCount out;
  out.dimension = model.frame().dimension();
  out.closure = true;
  std::vector<bool> counted(result.branches.size(), false);
  for (std::size_t i = 0; i < result.branches.size(); ++i) {
    const Branch& b = result.branches[i];
    if (!b.symmetry_partner) {
      out.closure = false;
      out.warnings.push_back("branch " + std::to_string(b.id) + " has no symmetry partner");
    }
    if (counted[i]) continue;
    counted[i] = true;
    if (b.symmetry_partner)
      for (std::size_t j = 0; j < result.branches.size(); ++j)
        if (result.branches[j].id == *b.symmetry_partner) counted[j] = true;
    if (b.side != Side::left) ++out.n_plus;
    if (b.side != Side::right) ++out.n_minus;
  }
  out.bound_satisfied = out.n_plus + out.n_minus >= out.dimension;
  if (!out.bound_satisfied)
    out.warnings.push_back("found " + std::to_string(out.n_plus + out.n_minus) + " pairs, fewer than dim H0 = " +
                           std::to_string(out.dimension) + "; search coverage is incomplete");
  return out;
}

bool monotone_amplitude(const Branch& branch, double lambda_star) {
  for (Side side : {Side::left, Side::right}) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : branch.samples) {
      const double off = s.lambda - lambda_star;
      if ((side == Side::right) == (off > 0.0)) pts.emplace_back(std::abs(off), s.amplitude);
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 1; k < pts.size(); ++k)
      if (!(pts[k].second > pts[k - 1].second)) return false;
  }
  return true;
}

}  // namespace varbif
