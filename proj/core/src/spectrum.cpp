#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"
#include "varbif/slicing.hpp"
#include "varbif/spectrum.hpp"

namespace varbif {

namespace {

Matrix gram_orthonormalize(const Matrix& V, const Matrix& M) {
  Matrix G = V.transpose() * M * V;
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) throw InvariantError("eigenspace basis is rank deficient");
  return llt.matrixL().solve(V.transpose()).transpose();
}

std::vector<EigenBlock> group_blocks(const Vector& values, const Matrix& vectors, Interval window,
                                     double width, const Matrix& M) {
  std::vector<int> order;
  for (int k = 0; k < values.size(); ++k)
    if (window.contains(values[k])) order.push_back(k);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  std::vector<EigenBlock> blocks;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] - values[order[j - 1]] < width) ++j;
    EigenBlock block;
    Matrix V(vectors.rows(), static_cast<Eigen::Index>(j - i));
    double sum = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      V.col(static_cast<Eigen::Index>(k - i)) = vectors.col(order[k]);
      sum += values[order[k]];
    }
    block.lambda = sum / static_cast<double>(j - i);
    block.basis = gram_orthonormalize(V, M);
    blocks.push_back(std::move(block));
    i = j;
  }
  return blocks;
}

bool sparse_is_spd(const SparseMatrix& A) {
  Eigen::SimplicialLLT<SparseMatrix> llt(A);
  return llt.info() == Eigen::Success;
}

// Definiteness of a form relative to the gram: +1, -1 or 0 (indefinite/singular).
int definiteness(const Vector& form_eigs, double tol) {
  const double scale = std::max(form_eigs.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (form_eigs.minCoeff() > tol * scale) return 1;
  if (form_eigs.maxCoeff() < -tol * scale) return -1;
  return 0;
}

PencilEigenSystem solve_pencil_sparse(const DiscreteOperatorSet& ops, Interval window,
                                      const SpectralOptions& options) {
  if (!sparse_is_spd(ops.B2))
    throw PreconditionError("pencils above the dense limit need a positive definite B2");
  PencilEigenSystem out;
  out.window = window;
  out.spectral_radius = estimate_spectral_radius(ops.B1, ops.B2);
  out.cluster_width = options.cluster_tol * out.spectral_radius;
  const EigenPairs pairs = slice_eigen(ops.B1, ops.B2, window, out.cluster_width, true);
  const Matrix M(ops.gram);
  out.blocks = group_blocks(pairs.values, pairs.vectors, window, out.cluster_width, M);
  out.kernel_of_B2 = Matrix(ops.B1.rows(), 0);
  out.complete = window.lo <= -out.spectral_radius && window.hi >= out.spectral_radius;
  return out;
}

}  // namespace

const EigenBlock* PencilEigenSystem::nearest(double lambda) const {
  const EigenBlock* best = nullptr;
  for (const auto& b : blocks)
    if (!best || std::abs(b.lambda - lambda) < std::abs(best->lambda - lambda)) best = &b;
  return best;
}

FormSpectrum form_spectrum(const SparseMatrix& form, const SparseMatrix& gram, bool vectors) {
  const EigenPairs pairs = dense_definite_eigen(Matrix(form), Matrix(gram), vectors);
  return {pairs.values, pairs.vectors};
}

PencilEigenSystem solve_pencil(const DiscreteOperatorSet& ops, Interval window,
                               const SpectralOptions& options) {
  const int n = static_cast<int>(ops.B1.rows());
  if (n > options.dense_limit) return solve_pencil_sparse(ops, window, options);

  const Matrix M(ops.gram);
  const Matrix B1(ops.B1);
  const Matrix B2(ops.B2);
  const Vector b1 = dense_definite_eigen(B1, M, false).values;
  if (b1.cwiseAbs().minCoeff() <= 1e-10 && !options.shift)
    throw PreconditionError(
        "base state degenerate for F alone: B1 is singular; pass a shift or use the zero-group "
        "(r+/r-) route");
  const Vector b2 = dense_definite_eigen(B2, M, false).values;

  PencilEigenSystem out;
  out.window = window;
  Vector values;
  Matrix vectors;
  Matrix infinite(n, 0);
  if (definiteness(b2, options.kernel_tol) == 1) {
    const EigenPairs pairs = dense_definite_eigen(B1, B2, true);
    values = pairs.values;
    vectors = pairs.vectors;
  } else {
    const double s = options.shift.value_or(0.0);
    Matrix A = B1 - s * B2;
    const int sign = definiteness(dense_definite_eigen(A, M, false).values, options.kernel_tol);
    if (sign == 0)
      throw PreconditionError(
          "pencil is not definite: neither B2 nor B1 - shift*B2 is definite in the gram geometry");
    A *= sign;
    // B2 v = sigma (sign * A) v  <=>  B1 v = (s + sign / sigma) B2 v
    const EigenPairs pairs = dense_definite_eigen(B2, A, true);
    const double smax = pairs.values.cwiseAbs().maxCoeff();
    std::vector<int> finite_idx;
    std::vector<int> inf_idx;
    for (int k = 0; k < pairs.values.size(); ++k) {
      if (std::abs(pairs.values[k]) <= options.kernel_tol * smax)
        inf_idx.push_back(k);
      else
        finite_idx.push_back(k);
    }
    values.resize(static_cast<Eigen::Index>(finite_idx.size()));
    vectors.resize(n, static_cast<Eigen::Index>(finite_idx.size()));
    for (std::size_t k = 0; k < finite_idx.size(); ++k) {
      values[static_cast<Eigen::Index>(k)] = s + sign / pairs.values[finite_idx[k]];
      vectors.col(static_cast<Eigen::Index>(k)) = pairs.vectors.col(finite_idx[k]);
    }
    if (!inf_idx.empty()) {
      Matrix H0(n, static_cast<Eigen::Index>(inf_idx.size()));
      for (std::size_t k = 0; k < inf_idx.size(); ++k)
        H0.col(static_cast<Eigen::Index>(k)) = pairs.vectors.col(inf_idx[k]);
      infinite = gram_orthonormalize(H0, M);
    }
  }
  out.spectral_radius = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  out.cluster_width = options.cluster_tol * out.spectral_radius;
  out.blocks = group_blocks(values, vectors, window, out.cluster_width, M);
  out.kernel_of_B2 = infinite;
  out.complete = values.size() == 0 ||
                 (window.contains(values.minCoeff()) && window.contains(values.maxCoeff()));
  return out;
}

MorseData morse_data(const SparseMatrix& form, const SparseMatrix& gram, double lambda,
                     const SpectralOptions& options) {
  MorseData out;
  out.lambda = lambda;
  const int n = static_cast<int>(form.rows());
  if (n <= options.dense_limit) {
    const Vector e = form_spectrum(form, gram, false).values;
    const double scale = e.cwiseAbs().maxCoeff();
    const double thr = options.kernel_tol * scale;
    for (int k = 0; k < e.size(); ++k) {
      if (std::abs(e[k]) <= thr) {
        ++out.nu;
      } else if (e[k] < 0.0) {
        ++out.mu;
        out.negative_eigenvalues.push_back(e[k]);
      }
    }
    return out;
  }
  const double scale = estimate_spectral_radius(form, gram);
  const double thr = options.kernel_tol * scale;
  out.mu = count_below(form, gram, -thr);
  out.nu = count_below(form, gram, thr) - out.mu;
  if (out.mu > 0 && out.mu <= 64) {
    const EigenPairs neg = slice_eigen(form, gram, {-1.5 * scale, -thr}, 1e-9 * scale, false);
    out.negative_eigenvalues.assign(neg.values.data(), neg.values.data() + neg.values.size());
  }
  return out;
}

MorseData morse_data(const DiscreteOperatorSet& ops, double lambda, const SpectralOptions& options) {
  const SparseMatrix form = ops.B1 - lambda * ops.B2;
  return morse_data(form, ops.gram, lambda, options);
}

double invariance_defect(const Matrix& basis, const DiscreteOperatorSet& ops) {
  if (basis.cols() == 0) return 0.0;
  const Matrix M(ops.gram);
  Eigen::LLT<Matrix> llt(M);
  const Matrix W = llt.solve(Matrix(ops.B1 * basis));
  const Matrix R = W - basis * (basis.transpose() * M * W);
  const double wn = std::sqrt(std::max((W.transpose() * M * W).trace(), 1e-300));
  const double rn = std::sqrt(std::max((R.transpose() * M * R).trace(), 0.0));
  return rn / wn;
}

IndexPrediction index_formula(const PencilEigenSystem& eig, const DiscreteOperatorSet& ops,
                              double lambda, IndexMode mode, const SpectralOptions& options) {
  const double width = std::max(eig.cluster_width, 1e-12 * std::max(1.0, std::abs(lambda)));
  IndexPrediction out;
  if (mode == IndexMode::positive_B1) {
    const Vector b1 = form_spectrum(ops.B1, ops.gram, false).values;
    if (definiteness(b1, options.kernel_tol) != 1)
      throw ClassificationError("positive_B1 route: B1 is not positive definite (smallest form eigenvalue " +
                                format_double(b1.minCoeff()) + ")");
    const double lo = std::min(0.0, lambda);
    const double hi = std::max(0.0, lambda);
    if (!(eig.window.lo <= lo && eig.window.hi >= hi) && !eig.complete)
      throw PreconditionError("pencil window does not cover [0, lambda]");
    for (const auto& b : eig.blocks) {
      if (std::abs(b.lambda - lambda) <= width) {
        out.nu += b.multiplicity();
      } else if (lambda > 0.0 && b.lambda > 0.0 && b.lambda < lambda) {
        out.mu += b.multiplicity();
      } else if (lambda < 0.0 && b.lambda < 0.0 && b.lambda > lambda) {
        out.mu += b.multiplicity();
      }
    }
    return out;
  }

  if (!eig.complete)
    throw PreconditionError("invariant_blocks route needs the complete pencil spectrum");
  const Vector b1 = form_spectrum(ops.B1, ops.gram, false).values;
  if (b1.cwiseAbs().minCoeff() <= 1e-10)
    throw ClassificationError("invariant_blocks route: B1 is singular");
  const double inv_tol = 1e-6;
  auto split = [&](const Matrix& V, double lam_k, bool infinite) {
    const double defect = invariance_defect(V, ops);
    if (defect > inv_tol) {
      std::ostringstream msg;
      msg << "invariant_blocks route: eigenspace at lambda_k = "
          << (infinite ? std::string("inf") : format_double(lam_k))
          << " is not invariant under B1 (defect " << format_double(defect) << ")";
      throw ClassificationError(msg.str());
    }
    Matrix R = V.transpose() * Matrix(ops.B1) * V;
    R = 0.5 * (R + R.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(R, Eigen::EigenvaluesOnly);
    int pos = 0, neg = 0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) (es.eigenvalues()[k] > 0.0 ? pos : neg)++;
    return std::pair<int, int>{pos, neg};
  };
  for (const auto& b : eig.blocks) {
    const auto [pos, neg] = split(b.basis, b.lambda, false);
    if (std::abs(b.lambda - lambda) <= width) {
      out.nu += b.multiplicity();
      continue;
    }
    // (B1 - lambda B2) restricted to H_k is (1 - lambda/lambda_k) B1|H_k.
    const double factor = 1.0 - lambda / b.lambda;
    out.mu += factor < 0.0 ? pos : neg;
  }
  if (eig.kernel_of_B2.cols() > 0) out.mu += split(eig.kernel_of_B2, 0.0, true).second;
  return out;
}

ZeroGroupReport zero_group(const OperatorFamily& family, const SparseMatrix& gram,
                           double lambda_star, double probe_radius,
                           const ZeroGroupOptions& options) {
  if (gram.rows() > options.dense_limit)
    throw PreconditionError("zero-group tracking is limited to dense-size problems");
  if (!(probe_radius > 0.0)) throw ConfigError("probe radius must be positive");
  auto spectrum_at = [&](double lam) {
    Vector e = form_spectrum(family(lam), gram, false).values;
    std::sort(e.data(), e.data() + e.size());
    return e;
  };
  const Vector e0 = spectrum_at(lambda_star);
  const double scale = std::max(e0.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double thr = options.kernel_tol * scale;
  std::vector<double> zero;
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < e0.size(); ++k) {
    if (std::abs(e0[k]) <= thr)
      zero.push_back(e0[k]);
    else
      gap = std::min(gap, std::abs(e0[k]));
  }
  if (zero.empty())
    throw PreconditionError("lambda* = " + format_double(lambda_star) +
                            " has trivial kernel; no 0-group to track");
  if (!std::isfinite(gap)) gap = scale;
  const int nu = static_cast<int>(zero.size());

  auto group_at = [&](double lam) {
    const Vector e = spectrum_at(lam);
    std::vector<double> g;
    for (int k = 0; k < e.size(); ++k) {
      if (std::abs(e[k]) <= thr)
        throw PreconditionError("kernel found at lambda = " + format_double(lam) +
                                " inside the punctured probe interval");
      if (std::abs(e[k]) < 0.5 * gap) g.push_back(e[k]);
    }
    return g;
  };

  // Greedy nearest matching with injectivity; returns false when it disagrees
  // with the order-preserving matching on distinguishable values.
  auto match = [&](const std::vector<double>& prev, const std::vector<double>& next,
                   std::vector<double>& assigned) {
    const int m = static_cast<int>(prev.size());
    assigned.assign(m, 0.0);
    std::vector<bool> used_p(m, false), used_c(m, false);
    for (int step = 0; step < m; ++step) {
      int bp = -1, bc = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int p = 0; p < m; ++p) {
        if (used_p[p]) continue;
        for (int c = 0; c < m; ++c) {
          if (used_c[c]) continue;
          const double d = std::abs(prev[p] - next[c]);
          if (d < best) {
            best = d;
            bp = p;
            bc = c;
          }
        }
      }
      used_p[bp] = used_c[bc] = true;
      assigned[bp] = next[bc];
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return prev[a] < prev[b]; });
    std::vector<double> sorted_next = next;
    std::sort(sorted_next.begin(), sorted_next.end());
    for (int k = 0; k < m; ++k) {
      const int p = order[k];
      if (std::abs(assigned[p] - sorted_next[k]) <= thr) continue;
      // Paths that start from indistinguishable values may be exchanged freely.
      bool exchangeable = false;
      for (int q = 0; q < m; ++q)
        if (q != p && std::abs(prev[q] - prev[p]) <= thr && std::abs(assigned[q] - sorted_next[k]) <= thr)
          exchangeable = true;
      if (!exchangeable) return false;
    }
    return true;
  };

  for (int attempt = 0; attempt <= options.max_refinements; ++attempt) {
    const double r = probe_radius * std::pow(0.5, attempt);
    ZeroGroupReport report;
    report.lambda_star = lambda_star;
    report.probe_radius = r;
    report.gap = gap;
    report.nu = nu;
    bool radius_ok = true;
    for (int side : {+1, -1}) {
      std::vector<EigenPath> paths(nu);
      for (int k = 0; k < nu; ++k) paths[k].samples.emplace_back(lambda_star, zero[k]);
      std::vector<double> current = zero;
      double lam_prev = lambda_star;
      for (int j = options.ladder_levels - 1; j >= 0 && radius_ok; --j) {
        const double lam_next = lambda_star + side * r * std::pow(0.5, j);
        // Work list of target samples; ambiguous or discontinuous steps are
        // split at the midpoint.
        std::vector<std::pair<double, int>> targets{{lam_next, 0}};
        while (!targets.empty()) {
          const auto [lam, depth] = targets.back();
          const std::vector<double> g = group_at(lam);
          if (static_cast<int>(g.size()) != nu) {
            radius_ok = false;
            break;
          }
          std::vector<double> assigned;
          const bool unambiguous = match(current, g, assigned);
          double jump = 0.0;
          for (int k = 0; k < nu; ++k) jump = std::max(jump, std::abs(assigned[k] - current[k]));
          if (!unambiguous || jump >= 0.25 * gap) {
            if (depth >= options.max_refinements)
              throw ConvergenceError("0-group path tracking stayed ambiguous after " +
                                     std::to_string(options.max_refinements) +
                                     " refinements near lambda = " + format_double(lam));
            targets.emplace_back(0.5 * (lam_prev + lam), depth + 1);
            continue;
          }
          for (int k = 0; k < nu; ++k) paths[k].samples.emplace_back(lam, assigned[k]);
          current = assigned;
          lam_prev = lam;
          targets.pop_back();
        }
      }
      if (!radius_ok) break;
      int negative = 0;
      for (auto& path : paths) {
        const double inner = path.samples.at(1).second;
        for (std::size_t s = 1; s < path.samples.size(); ++s)
          if ((path.samples[s].second < 0.0) != (inner < 0.0))
            throw PreconditionError("0-group eigenvalue changes sign inside the probe interval");
        if (inner < 0.0) ++negative;
      }
      if (side > 0) {
        report.r_plus = negative;
        report.right_paths = std::move(paths);
      } else {
        report.r_minus = negative;
        report.left_paths = std::move(paths);
      }
    }
    if (radius_ok) return report;
  }
  throw ConvergenceError("0-group could not be separated from the rest of the spectrum; "
                         "reduce the probe radius");
}

std::string to_record(const ZeroGroupReport& report) {
  std::ostringstream out;
  out << "zero_group\n";
  out << "lambda_star=" << format_double(report.lambda_star) << "\n";
  out << "probe_radius=" << format_double(report.probe_radius) << "\n";
  out << "gap=" << format_double(report.gap) << "\n";
  out << "nu=" << report.nu << "\n";
  out << "r_plus=" << report.r_plus << "\n";
  out << "r_minus=" << report.r_minus << "\n";
  out << "criterion_d=" << (report.jump() ? "holds" : "fails") << "\n";
  auto dump = [&](const char* side, const std::vector<EigenPath>& paths) {
    for (std::size_t k = 0; k < paths.size(); ++k) {
      out << "path side=" << side << " index=" << k << " samples=" << paths[k].samples.size() << "\n";
      for (const auto& [lam, e] : paths[k].samples)
        out << format_double(lam) << "," << format_double(e) << "\n";
    }
  };
  dump("right", report.right_paths);
  dump("left", report.left_paths);
  out << "end\n";
  return out.str();
}

}  // namespace varbif
