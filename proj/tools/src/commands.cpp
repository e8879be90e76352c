#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "output.hpp"
#include "svg.hpp"
#include "varbif/bifurcation.hpp"
#include "varbif/config.hpp"
#include "varbif/deformation.hpp"
#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"
#include "varbif/problems.hpp"
#include "varbif/reduction.hpp"
#include "varbif/spectrum.hpp"
#include "varbif_test/acceptance.hpp"

namespace varbif::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int schema_version = 1;

struct Setup {
  ProblemConfig config;
  ProblemSpec spec;
  std::array<int, 2> resolution{0, 0};
  std::shared_ptr<const Discretization> disc;
  SpectralOptions spectral;
  ReductionOptions reduction;
  std::set<std::string> formats;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

Interval parse_window(const std::string& text, Interval fallback) {
  if (text.empty()) return fallback;
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError("--window expects a,b but got '" + text + "'");
  const Interval w{parse_real(parts[0]), parse_real(parts[1])};
  if (!(w.lo < w.hi)) throw ConfigError("--window needs a < b");
  return w;
}

Setup prepare(const RunConfig& rc) {
  Setup s;
  if (!rc.config_path.empty()) s.config = load_config(rc.config_path);
  if (!rc.problem.empty()) s.config.problem = rc.problem;
  if (s.config.problem.empty()) throw ConfigError("no problem given (use --problem or --config)");
  for (const auto& p : rc.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value but got '" + p + "'");
    s.config.params[p.substr(0, eq)] = parse_real(p.substr(eq + 1));
  }
  s.spec = make_problem(s.config);
  const int dim = s.spec.domain.dimension();
  if (!rc.resolution.empty()) {
    const auto parts = split(rc.resolution, ',');
    if (parts.empty() || parts.size() > 2) throw ConfigError("--resolution expects n or nx,ny");
    int v[2] = {0, 0};
    for (std::size_t i = 0; i < parts.size(); ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stoi(parts[i], &used);
        if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      } catch (const std::logic_error&) {
        throw ConfigError("--resolution: '" + parts[i] + "' is not an integer");
      }
    }
    s.resolution = {v[0], parts.size() == 2 ? v[1] : v[0]};
  } else if (s.config.resolution) {
    s.resolution = *s.config.resolution;
  } else {
    s.resolution = dim == 1 ? std::array<int, 2>{256, 256} : std::array<int, 2>{32, 32};
  }
  s.disc = std::make_shared<const Discretization>(build_grid(s.spec.domain, s.resolution), s.spec.components);
  s.spectral.kernel_tol = s.config.kernel_tol.value_or(s.spectral.kernel_tol);
  s.reduction.kernel_tol = s.spectral.kernel_tol;
  s.reduction.ball_radius = s.config.ball_radius.value_or(s.reduction.ball_radius);
  s.reduction.corrector_tol = s.config.corrector_tol.value_or(s.reduction.corrector_tol);
  s.reduction.reduced_tol = s.config.reduced_tol.value_or(s.reduction.reduced_tol);
  s.reduction.lift_tol = s.config.lift_tol.value_or(s.reduction.lift_tol);
  s.formats = parse_formats(rc.format);
  return s;
}

std::string resolution_text(const Setup& s) {
  return s.spec.domain.dimension() == 1 ? std::to_string(s.resolution[0])
                                        : std::to_string(s.resolution[0]) + "x" + std::to_string(s.resolution[1]);
}

void provenance(Csv& csv, const std::string& command, const Setup& s, const RunConfig& rc) {
  csv.comment("varbif " + command);
  std::string line = "problem=" + s.config.problem + " resolution=" + resolution_text(s) +
                     " seed=" + std::to_string(rc.seed);
  for (const auto& [k, v] : s.config.params) line += " " + k + "=" + num(v);
  csv.comment(line);
}

json provenance(const std::string& command, const Setup& s, const RunConfig& rc) {
  json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  j["problem"] = s.config.problem;
  j["resolution"] = resolution_text(s);
  j["seed"] = rc.seed;
  json params = json::object();
  for (const auto& [k, v] : s.config.params) params[k] = v;
  j["params"] = params;
  return j;
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> default_range(double a, double b, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(a + (b - a) * k / (count - 1));
  return out;
}

std::shared_ptr<const PencilFamily> pencil_family(const Setup& s) {
  return std::make_shared<const PencilFamily>(s.disc, s.spec);
}

// Nearest pencil eigenvalue within 2% of the requested value.
double snap_lambda(const PencilFamily& family, double guess, const SpectralOptions& sp) {
  const double tol = 0.02 * std::max(std::abs(guess), 1e-3);
  const PencilEigenSystem eig = solve_pencil(family.operators(), {guess - tol, guess + tol}, sp);
  const EigenBlock* b = eig.nearest(guess);
  if (!b) throw PreconditionError("no pencil eigenvalue within 2% of " + num(guess));
  return b->lambda;
}

double require_lambda_star(const RunConfig& rc) {
  if (!rc.lambda_star) throw ConfigError("--lambda-star is required");
  return *rc.lambda_star;
}

void emit(std::ostream& out, const std::string& path) { out << "wrote " << path << "\n"; }

int cmd_list(const RunConfig& rc, std::ostream& out) {
  const auto formats = parse_formats(rc.format);
  if (formats.count("json")) {
    json j;
    j["schema_version"] = schema_version;
    j["problems"] = json::array();
    for (const auto& name : builtin_names()) {
      const BuiltinProblem b = builtin(name);
      json p;
      p["name"] = name;
      p["summary"] = b.summary;
      p["params"] = json::array();
      for (const auto& info : builtin_parameters(name))
        p["params"].push_back({{"name", info.name}, {"default", info.default_value}, {"meaning", info.meaning}});
      p["references"] = json::array();
      for (const auto& r : b.references)
        p["references"].push_back({{"quantity", r.quantity}, {"value", r.value}, {"provenance", r.provenance}});
      j["problems"].push_back(p);
    }
    out << j.dump(2) << "\n";
    return 0;
  }
  for (const auto& name : builtin_names()) {
    const BuiltinProblem b = builtin(name);
    out << name << "\n  " << b.summary << "\n";
    for (const auto& info : builtin_parameters(name))
      out << "  param " << info.name << " = " << num(info.default_value) << "  (" << info.meaning << ")\n";
    for (const auto& r : b.references)
      out << "  ref   " << r.quantity << ": " << r.value << "  [" << r.provenance << "]\n";
  }
  return 0;
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
  const Setup s = prepare(rc);
  const auto family = pencil_family(s);
  const DiscreteOperatorSet ops = family->operators();
  const Interval window = parse_window(rc.window, {0.0, 10.0});
  const std::vector<double> grid = rc.grid.empty() ? default_range(window.lo, window.hi, 101) : parse_grid(rc.grid);
  const PencilEigenSystem eig = solve_pencil(ops, window, s.spectral);
  std::vector<double> eigenvalues;
  for (const auto& b : eig.blocks)
    for (int k = 0; k < b.multiplicity(); ++k) eigenvalues.push_back(b.lambda);

  std::vector<MorseData> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), rc.workers,
               [&](int i) { rows[static_cast<std::size_t>(i)] = morse_data(ops, grid[static_cast<std::size_t>(i)], s.spectral); });

  if (s.formats.count("csv")) {
    Csv csv;
    provenance(csv, "sweep", s, rc);
    csv.comment("window=" + num(window.lo) + "," + num(window.hi));
    std::vector<std::string> head{"lambda", "mu", "nu"};
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) head.push_back("eig_" + std::to_string(k + 1));
    csv.header(head);
    for (const auto& r : rows) {
      std::vector<std::string> cells{num(r.lambda), num(r.mu), num(r.nu)};
      for (double e : eigenvalues) cells.push_back(num(e));
      csv.row(cells);
    }
    emit(out, write_file(rc.out, "sweep.csv", csv.text()));
  }
  if (s.formats.count("json")) {
    json j = provenance("sweep", s, rc);
    j["window"] = {window.lo, window.hi};
    j["eigenvalues"] = eigenvalues;
    j["rows"] = json::array();
    for (const auto& r : rows) j["rows"].push_back({{"lambda", r.lambda}, {"mu", r.mu}, {"nu", r.nu}});
    emit(out, write_file(rc.out, "sweep.json", j.dump(2) + "\n"));
  }
  if (s.formats.count("svg")) {
    Figure fig;
    fig.title = "Morse index of " + s.config.problem;
    fig.x_label = "lambda";
    fig.y_label = "index";
    fig.zero_axis = false;
    Series mu{"mu", "", {}, false, false}, nu{"nu", "", {}, true, true};
    for (const auto& r : rows) {
      mu.points.emplace_back(r.lambda, r.mu);
      nu.points.emplace_back(r.lambda, r.nu);
    }
    fig.series = {mu, nu};
    emit(out, write_file(rc.out, "sweep.svg", render_svg(fig)));
  }
  out << "pencil eigenvalues in window: " << eigenvalues.size() << "\n";
  return 0;
}

int cmd_detect(const RunConfig& rc, std::ostream& out) {
  const Setup s = prepare(rc);
  const auto family = pencil_family(s);
  const Interval window = parse_window(rc.window, {0.0, 10.0});
  CandidateOptions co;
  co.spectral = s.spectral;
  const std::vector<CandidateReport> reports = candidates(*family, window, co);

  const std::vector<std::string> head{"lambda_star", "nu",       "verdict", "necessity", "G2_sign", "B1_positive",
                                      "invariant",   "r_jump",   "mu_left", "mu_right",  "r_plus",  "r_minus",
                                      "delta"};
  std::vector<std::vector<std::string>> rows;
  auto yn = [](bool b) { return std::string(b ? "yes" : "no"); };
  for (const auto& r : reports)
    rows.push_back({num(r.lambda_star), num(r.nu), to_string(r.verdict), yn(r.criteria.necessity_passed),
                    to_string(r.criteria.G2_semidefinite_sign), yn(r.criteria.B1_positive),
                    yn(r.criteria.invariant_blocks_ok), yn(r.criteria.r_jump), num(r.mu_left), num(r.mu_right),
                    num(r.r_plus), num(r.r_minus), num(r.delta)});
  out << text_table(head, rows);
  for (const auto& r : reports)
    for (const auto& n : r.notes) out << "note lambda*=" << num(r.lambda_star) << ": " << n << "\n";

  if (s.formats.count("csv")) {
    Csv csv;
    provenance(csv, "detect", s, rc);
    csv.comment("window=" + num(window.lo) + "," + num(window.hi));
    csv.header(head);
    for (const auto& r : rows) csv.row(r);
    emit(out, write_file(rc.out, "candidates.csv", csv.text()));
  }
  if (s.formats.count("json")) {
    json j = provenance("detect", s, rc);
    j["window"] = {window.lo, window.hi};
    j["candidates"] = json::array();
    for (const auto& r : reports)
      j["candidates"].push_back({{"lambda_star", r.lambda_star},
                                 {"nu", r.nu},
                                 {"verdict", to_string(r.verdict)},
                                 {"necessity", r.criteria.necessity_passed},
                                 {"G2_sign", to_string(r.criteria.G2_semidefinite_sign)},
                                 {"B1_positive", r.criteria.B1_positive},
                                 {"invariant", r.criteria.invariant_blocks_ok},
                                 {"r_jump", r.criteria.r_jump},
                                 {"mu_left", r.mu_left},
                                 {"mu_right", r.mu_right},
                                 {"r_plus", r.r_plus},
                                 {"r_minus", r.r_minus},
                                 {"delta", r.delta},
                                 {"notes", r.notes}});
    emit(out, write_file(rc.out, "candidates.json", j.dump(2) + "\n"));
  }
  return 0;
}

struct Reduced {
  std::shared_ptr<const PencilFamily> family;
  std::unique_ptr<ReducedModel> model;
};

Reduced reduced_model(const Setup& s, const RunConfig& rc, std::ostream& out) {
  Reduced r;
  r.family = pencil_family(s);
  const double requested = require_lambda_star(rc);
  const double ls = snap_lambda(*r.family, requested, s.spectral);
  if (ls != requested) out << "lambda* " << num(requested) << " snapped to pencil eigenvalue " << num(ls) << "\n";
  r.model = std::make_unique<ReducedModel>(r.family, kernel_frame(*r.family, ls, s.reduction.kernel_tol), s.reduction);
  for (const auto& w : r.model->warnings()) out << "warning: " << w << "\n";
  return r;
}

std::vector<std::string> coordinate_names(int d, const std::string& prefix) {
  std::vector<std::string> out;
  for (int k = 0; k < d; ++k) out.push_back(prefix + std::to_string(k + 1));
  return out;
}

int cmd_reduce(const RunConfig& rc, std::ostream& out) {
  const Setup s = prepare(rc);
  Reduced r = reduced_model(s, rc, out);
  ReducedModel& model = *r.model;
  const KernelFrame& frame = model.frame();
  const int d = frame.dimension();
  const double ls = model.lambda_star(), delta = model.lambda_halfwidth(), eps = model.ball_radius();
  out << "lambda*=" << num(ls) << " d=" << d << " delta=" << num(delta) << " ball_radius=" << num(eps) << "\n";

  const std::vector<double> lambdas =
      rc.grid.empty() ? std::vector<double>{ls - 0.5 * delta, ls - 0.25 * delta, ls, ls + 0.25 * delta, ls + 0.5 * delta}
                      : parse_grid(rc.grid);
  std::vector<Vector> zs;
  const double reach = 0.5 * eps;
  if (d == 1) {
    for (double v : default_range(-reach, reach, 41)) zs.push_back(Vector::Constant(1, v));
  } else if (d == 2) {
    for (double a : default_range(-reach, reach, 17))
      for (double b : default_range(-reach, reach, 17))
        if (std::hypot(a, b) <= reach * (1 + 1e-12)) zs.push_back((Vector(2) << a, b).finished());
  }
  struct Row {
    double lambda;
    Vector z;
    double value, grad;
  };
  std::vector<Row> table;
  int failed = 0;
  for (double lam : lambdas)
    for (const Vector& z : zs) {
      try {
        const double v = model.reduced_value(lam, z);
        const double g = model.reduced_gradient(lam, z).norm();
        table.push_back({lam, z, v, g});
      } catch (const ConvergenceError&) {
        ++failed;
      }
    }
  if (d > 2) out << "reduced-functional table omitted for d > 2\n";
  if (failed) out << "corrector failed at " << failed << " table points (omitted)\n";

  const Grid& grid = s.disc->grid();
  if (s.formats.count("csv")) {
    Csv kernel;
    provenance(kernel, "reduce kernel", s, rc);
    kernel.comment("lambda_star=" + num(ls) + " d=" + std::to_string(d));
    std::vector<std::string> head = grid.dimension() == 1 ? std::vector<std::string>{"x"}
                                                          : std::vector<std::string>{"x", "y"};
    for (const auto& c : coordinate_names(d, "z")) head.push_back(c);
    kernel.header(head);
    for (int k = 0; k < frame.Z.rows(); ++k) {
      const Point p = grid.position(grid.node_of(k));
      std::vector<double> vals{p[0]};
      if (grid.dimension() == 2) vals.push_back(p[1]);
      for (int c = 0; c < d; ++c) vals.push_back(frame.Z(k, c));
      kernel.row(vals);
    }
    emit(out, write_file(rc.out, "kernel.csv", kernel.text()));

    Csv red;
    provenance(red, "reduce", s, rc);
    red.comment("lambda_star=" + num(ls) + " d=" + std::to_string(d) + " delta=" + num(delta) +
                " ball_radius=" + num(eps));
    std::vector<std::string> rh{"lambda"};
    for (const auto& c : coordinate_names(d, "z")) rh.push_back(c);
    rh.push_back("value");
    rh.push_back("grad_norm");
    red.header(rh);
    for (const auto& row : table) {
      std::vector<double> vals{row.lambda};
      for (int c = 0; c < d; ++c) vals.push_back(row.z[c]);
      vals.push_back(row.value);
      vals.push_back(row.grad);
      red.row(vals);
    }
    emit(out, write_file(rc.out, "reduced.csv", red.text()));
  }
  if (s.formats.count("json")) {
    json j = provenance("reduce", s, rc);
    j["lambda_star"] = ls;
    j["dimension"] = d;
    j["delta"] = delta;
    j["ball_radius"] = eps;
    j["table"] = json::array();
    for (const auto& row : table)
      j["table"].push_back({{"lambda", row.lambda},
                            {"z", std::vector<double>(row.z.data(), row.z.data() + row.z.size())},
                            {"value", row.value},
                            {"grad_norm", row.grad}});
    emit(out, write_file(rc.out, "reduced.json", j.dump(2) + "\n"));
  }
  if (s.formats.count("svg") && d == 1) {
    Figure fig;
    fig.title = "reduced functional near lambda* = " + num(ls);
    fig.x_label = "z";
    fig.y_label = "value";
    for (double lam : lambdas) {
      Series ser{"lambda=" + num(lam), "", {}, false, false};
      for (const auto& row : table)
        if (row.lambda == lam) ser.points.emplace_back(row.z[0], row.value);
      fig.series.push_back(ser);
    }
    emit(out, write_file(rc.out, "reduced.svg", render_svg(fig)));
  }
  return 0;
}

double signed_amplitude(const BranchSample& s) {
  double lead = 0.0;
  for (int k = 0; k < s.z.size(); ++k)
    if (std::abs(s.z[k]) > std::abs(lead)) lead = s.z[k];
  return lead < 0.0 ? -s.amplitude : s.amplitude;
}

int cmd_branch(const RunConfig& rc, std::ostream& out) {
  const Setup s = prepare(rc);
  Reduced r = reduced_model(s, rc, out);
  const ReducedModel& model = *r.model;
  const double ls = model.lambda_star(), delta = model.lambda_halfwidth();
  std::vector<double> grid;
  if (rc.grid.empty()) {
    for (double f : {-0.2, -0.1, -0.05, -0.025, 0.025, 0.05, 0.1, 0.2}) grid.push_back(ls + f * delta);
  } else {
    grid = parse_grid(rc.grid);
  }
  BranchSearchOptions bo;
  bo.workers = rc.workers;
  const BranchSearchResult res = find_branches(model, grid, bo);
  const AlternativeVerdict verdict = classify(res);
  out << "lambda*=" << num(ls) << " d=" << model.frame().dimension() << " branches=" << res.branches.size()
      << " classification=" << to_string(verdict.classification) << "\n";
  for (const auto& w : verdict.warnings) out << "warning: " << w << "\n";
  std::optional<SymmetricCount> sym;
  if (r.family->odd()) {
    sym = symmetric_count(model, res);
    out << "n+=" << sym->n_plus << " n-=" << sym->n_minus << " dim=" << sym->dimension
        << " bound=" << (sym->bound_satisfied ? "satisfied" : "violated")
        << " closure=" << (sym->closure ? "yes" : "no") << "\n";
  }
  for (const auto& b : res.branches)
    out << "branch " << b.id << " side=" << to_string(b.side) << " samples=" << b.samples.size()
        << (b.symmetry_partner ? " partner=" + std::to_string(*b.symmetry_partner) : std::string()) << "\n";

  const int d = model.frame().dimension();
  if (s.formats.count("csv")) {
    for (const auto& b : res.branches) {
      Csv csv;
      provenance(csv, "branch", s, rc);
      csv.comment("lambda_star=" + num(ls) + " branch=" + std::to_string(b.id) + " side=" + to_string(b.side) +
                  " classification=" + to_string(verdict.classification));
      std::vector<std::string> head{"lambda", "amplitude", "residual"};
      for (const auto& c : coordinate_names(d, "z")) head.push_back(c);
      csv.header(head);
      for (const auto& smp : b.samples) {
        std::vector<double> vals{smp.lambda, smp.amplitude, smp.residual};
        for (int c = 0; c < d; ++c) vals.push_back(smp.z[c]);
        csv.row(vals);
      }
      emit(out, write_file(rc.out, "branch_" + std::to_string(b.id) + ".csv", csv.text()));
    }
  }
  if (s.formats.count("json")) {
    json j = provenance("branch", s, rc);
    j["lambda_star"] = ls;
    j["grid"] = res.grid;
    j["classification"] = to_string(verdict.classification);
    j["warnings"] = verdict.warnings;
    if (sym)
      j["symmetry"] = {{"n_plus", sym->n_plus},
                       {"n_minus", sym->n_minus},
                       {"dimension", sym->dimension},
                       {"bound_satisfied", sym->bound_satisfied},
                       {"closure", sym->closure}};
    j["branches"] = json::array();
    for (const auto& b : res.branches) {
      json jb{{"id", b.id}, {"side", to_string(b.side)}};
      jb["symmetry_partner"] = b.symmetry_partner ? json(*b.symmetry_partner) : json(nullptr);
      jb["samples"] = json::array();
      for (const auto& smp : b.samples)
        jb["samples"].push_back({{"lambda", smp.lambda},
                                 {"amplitude", smp.amplitude},
                                 {"residual", smp.residual},
                                 {"z", std::vector<double>(smp.z.data(), smp.z.data() + smp.z.size())}});
      j["branches"].push_back(jb);
    }
    emit(out, write_file(rc.out, "branches.json", j.dump(2) + "\n"));
  }
  if (s.formats.count("svg")) {
    Figure fig;
    fig.title = "bifurcation diagram of " + s.config.problem + " at lambda* = " + num(ls);
    fig.x_label = "lambda";
    fig.y_label = "signed amplitude";
    for (const auto& b : res.branches) {
      Series ser{"branch " + std::to_string(b.id), "", {}, true, false};
      std::vector<BranchSample> ordered = b.samples;
      std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& c) { return a.lambda < c.lambda; });
      for (const auto& smp : ordered) ser.points.emplace_back(smp.lambda, signed_amplitude(smp));
      fig.series.push_back(ser);
    }
    Series star{"lambda*", "#000000", {{ls, 0.0}}, true, false};
    fig.series.push_back(star);
    emit(out, write_file(rc.out, "diagram.svg", render_svg(fig)));
  }
  return 0;
}

int cmd_deform(const RunConfig& rc, std::ostream& out) {
  const Setup s = prepare(rc);
  const auto family = std::make_shared<const ScaledFamily>(s.disc, s.spec);
  std::vector<double> grid;
  if (rc.grid.empty()) {
    for (int k = 0; k <= 94; ++k) grid.push_back(0.06 + 0.01 * k);
  } else {
    grid = parse_grid(rc.grid);
  }
  ConjugateOptions co;
  co.kernel_tol = s.spectral.kernel_tol;
  co.record_eigenvalues = 4;
  const ConjugatePointReport rep = conjugate_points(*family, grid, co);
  const FieldVector u0 = family->base_state();
  std::vector<int> nu_grid(rep.t_grid.size());
  parallel_for(static_cast<int>(rep.t_grid.size()), rc.workers, [&](int i) {
    const double t = rep.t_grid[static_cast<std::size_t>(i)];
    nu_grid[static_cast<std::size_t>(i)] = morse_data(family->hessian(t, u0), s.disc->gram(), t, s.spectral).nu;
  });

  int sum_nu = 0;
  for (const auto& c : rep.conjugate_times) sum_nu += c.nu;
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : rep.conjugate_times) rows.push_back({num(c.t), num(c.nu), num(c.jump)});
  out << text_table({"t", "nu", "jump"}, rows);
  const std::string smale = "smale mu_start=" + std::to_string(rep.mu_start) + " mu_end=" + std::to_string(rep.mu_end) +
                            " sum_nu=" + std::to_string(sum_nu) + " defect=" + std::to_string(rep.smale_defect) +
                            (rep.accepted() ? " accepted" : " REJECTED");
  out << smale << "\n";

  int columns = 0;
  for (const auto& e : rep.smallest_eigenvalues) columns = std::max(columns, static_cast<int>(e.size()));
  if (s.formats.count("csv")) {
    Csv csv;
    provenance(csv, "deform", s, rc);
    csv.comment(smale);
    std::vector<std::string> head{"t", "mu", "nu"};
    for (int k = 0; k < columns; ++k) head.push_back("e" + std::to_string(k + 1));
    csv.header(head);
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
      std::vector<std::string> cells{num(rep.t_grid[i]), num(rep.mu[i]), num(nu_grid[i])};
      const Vector& e = rep.smallest_eigenvalues[i];
      for (int k = 0; k < e.size(); ++k) cells.push_back(num(e[k]));
      csv.row(cells);
    }
    emit(out, write_file(rc.out, "deform.csv", csv.text()));
    Csv conj;
    provenance(conj, "deform conjugate times", s, rc);
    conj.comment(smale);
    conj.header({"t", "nu", "jump"});
    for (const auto& r : rows) conj.row(r);
    emit(out, write_file(rc.out, "conjugate.csv", conj.text()));
  }
  if (s.formats.count("json")) {
    json j = provenance("deform", s, rc);
    j["mu_start"] = rep.mu_start;
    j["mu_end"] = rep.mu_end;
    j["smale_defect"] = rep.smale_defect;
    j["conjugate_times"] = json::array();
    for (const auto& c : rep.conjugate_times) j["conjugate_times"].push_back({{"t", c.t}, {"nu", c.nu}, {"jump", c.jump}});
    j["rows"] = json::array();
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
      const Vector& e = rep.smallest_eigenvalues[i];
      j["rows"].push_back({{"t", rep.t_grid[i]},
                           {"mu", rep.mu[i]},
                           {"nu", nu_grid[i]},
                           {"eigenvalues", std::vector<double>(e.data(), e.data() + e.size())}});
    }
    emit(out, write_file(rc.out, "deform.json", j.dump(2) + "\n"));
  }
  if (s.formats.count("svg")) {
    Figure fig;
    fig.title = "smallest Hessian eigenvalues of " + s.config.problem + " along the deformation";
    fig.x_label = "t";
    fig.y_label = "eigenvalue";
    for (int k = 0; k < columns; ++k) {
      Series ser{"e" + std::to_string(k + 1), "", {}, false, false};
      for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        if (k < rep.smallest_eigenvalues[i].size()) ser.points.emplace_back(rep.t_grid[i], rep.smallest_eigenvalues[i][k]);
      fig.series.push_back(ser);
    }
    emit(out, write_file(rc.out, "deform.svg", render_svg(fig)));
  }
  return 0;
}

int cmd_selftest(const RunConfig& rc, std::ostream& out) {
  testing::SuiteOptions so;
  so.seed = rc.seed;
  so.workers = rc.workers;
  const auto results = testing::run_acceptance(so);
  std::string text = "# varbif selftest seed=" + std::to_string(rc.seed) + "\n";
  int failed = 0;
  for (const auto& r : results) {
    text += testing::render(r);
    if (!r.passed) ++failed;
  }
  text += std::to_string(results.size() - static_cast<std::size_t>(failed)) + "/" + std::to_string(results.size()) +
          " criteria passed\n";
  out << text;
  emit(out, write_file(rc.out, "selftest.txt", text));
  return failed == 0 ? 0 : 1;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"sweep",    "detect",        "reduce", "branch",
                                              "deform",   "selftest",      "list-problems"};
  return names;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("--grid expects a:b:step but got '" + text + "'");
    const double a = parse_real(parts[0]), b = parse_real(parts[1]), step = parse_real(parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError("--grid needs a <= b and step > 0");
    const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    if (count > 100000) throw ConfigError("--grid has too many points");
    for (long long k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * step);
  } else {
    for (const auto& p : split(text, ','))
      if (!p.empty()) out.push_back(parse_real(p));
  }
  if (out.empty()) throw ConfigError("--grid is empty");
  return out;
}

int run(const std::string& subcommand, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.workers < 1) throw ConfigError("--workers must be at least 1");
    if (subcommand == "list-problems") return cmd_list(config, out);
    if (subcommand == "sweep") return cmd_sweep(config, out);
    if (subcommand == "detect") return cmd_detect(config, out);
    if (subcommand == "reduce") return cmd_reduce(config, out);
    if (subcommand == "branch") return cmd_branch(config, out);
    if (subcommand == "deform") return cmd_deform(config, out);
    if (subcommand == "selftest") return cmd_selftest(config, out);
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace varbif::cli
