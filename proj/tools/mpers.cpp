// mpers: command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 parse/field/domain error, 3 solver budget exhausted.

#include <mpers/filtration.hpp>
#include <mpers/homology.hpp>
#include <mpers/infer.hpp>
#include <mpers/interleave.hpp>
#include <mpers/io.hpp>
#include <mpers/onedim.hpp>
#include <mpers/presentation.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mpers;

constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

struct BudgetExhausted : Error {
  using Error::Error;
};

struct Globals {
  std::vector<std::string> field;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultBudget;
  std::string out;

  std::optional<Field> field_override() const {
    if (field.empty()) return std::nullopt;
    std::string s;
    for (const auto& t : field) s += (s.empty() ? "" : " ") + t;
    return Field::parse(s);
  }
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

Presentation read_presentation(const std::string& path, const Globals& g) {
  auto in = open_input(path);
  Presentation p = parse_presentation(in);
  if (auto f = g.field_override(); f && !(*f == p.field))
    throw ParseError("field mismatch: '" + path + "' is over " + p.field.str() + ", expected " + f->str());
  return p;
}

PersistenceDiagram read_diagram(const std::string& path) {
  auto in = open_input(path);
  return parse_diagram(in);
}

BifilteredComplex read_complex(const std::string& path) {
  auto in = open_input(path);
  return parse_complex(in);
}

std::vector<std::vector<Rational>> read_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_csv(in);
}

/// Writes the primary output to --out, or stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(g.out);
  if (!os) throw ParseError("cannot write '" + g.out + "'");
  os << text;
}

Field homology_field(const Globals& g) { return g.field_override().value_or(Field::prime(2)); }

/// "v,v,v;v,v": one comma list per axis.
Grid parse_axes(const std::string& text) {
  std::vector<std::vector<Rational>> axes;
  std::stringstream ss(text);
  for (std::string axis; std::getline(ss, axis, ';');) {
    std::vector<Rational> values;
    std::stringstream as(axis);
    for (std::string v; std::getline(as, v, ',');) {
      auto b = v.find_first_not_of(" \t"), e = v.find_last_not_of(" \t");
      if (b == std::string::npos) throw ParseError("empty axis value in '" + text + "'");
      values.push_back(Rational::parse(v.substr(b, e - b + 1)));
    }
    if (values.empty()) throw ParseError("empty axis in '" + text + "'");
    axes.push_back(std::move(values));
  }
  return make_grid(std::move(axes));
}

std::string yes_no(Decision d) { return d == Decision::Yes ? "yes" : "no"; }

// ---------------------------------------------------------------------------

int cmd_present_validate(const Globals& g, const std::string& file) {
  Presentation p = read_presentation(file, g);
  if (auto d = validate_presentation(p)) {
    std::cout << "invalid: " << d->where << ": " << d->message << "\n";
    return kExitInput;
  }
  std::cout << "valid: " << p.generators.size() << " generators, " << p.relations.size() << " relations\n";
  return 0;
}

int cmd_present_minimize(const Globals& g, const std::string& file) {
  Presentation p = read_presentation(file, g);
  require_valid(p);
  emit(g, emit_presentation(minimize_presentation(p)));
  return 0;
}

int cmd_distance_interleaving(const Globals& g, const std::string& fm, const std::string& fn,
                              const std::optional<std::string>& decide, const std::optional<std::string>& export_path) {
  Presentation m = read_presentation(fm, g), n = read_presentation(fn, g);
  if (!(m.field == n.field)) throw ParseError("field mismatch between '" + fm + "' and '" + fn + "'");
  if (m.n != n.n) throw ParseError("parameter count mismatch between '" + fm + "' and '" + fn + "'");
  require_valid(m);
  require_valid(n);
  std::ostringstream os;
  if (decide) {
    Rational eps = Rational::parse(*decide);
    if (export_path) {
      auto j = MonotoneAffineMap::translation(m.n, eps);
      std::ofstream q(*export_path);
      q << export_interleaving_system(assemble_system(minimize_presentation(m), minimize_presentation(n), j, j));
    }
    DecisionResult d = decide_interleaving(m, n, eps, g.budget);
    if (d.decision == Decision::BudgetExceeded)
      throw BudgetExhausted("budget of " + std::to_string(g.budget) + " nodes exhausted deciding eps = " + eps.str());
    os << yes_no(d.decision) << "\n";
    os << "variables " << d.variables << "\nequations " << d.equations << "\nnodes " << d.nodes << "\n";
    emit(g, os.str());
    return 0;
  }
  DistanceResult r = interleaving_distance(m, n, g.budget);
  if (export_path && r.exact && r.value.is_finite()) {
    auto j = MonotoneAffineMap::translation(m.n, r.value.value());
    std::ofstream q(*export_path);
    q << export_interleaving_system(assemble_system(minimize_presentation(m), minimize_presentation(n), j, j));
  }
  if (!r.exact) {
    std::cerr << "budget of " << g.budget << " nodes exhausted: d_I in (" << (r.lower ? r.lower->str() : "-inf") << ", "
              << r.upper.str() << "]\n";
    return kExitBudget;
  }
  os << "d_I = " << r.value.str() << "\n";
  os << "candidates " << r.candidates << "\ndecisions " << r.decisions << "\nnodes " << r.nodes << "\n";
  emit(g, os.str());
  return 0;
}

int cmd_distance_bottleneck(const Globals& g, const std::string& f1, const std::string& f2) {
  emit(g, "d_B = " + bottleneck_distance(read_diagram(f1), read_diagram(f2)).str() + "\n");
  return 0;
}

int cmd_diagram(const Globals& g, const std::string& file) {
  Presentation p = read_presentation(file, g);
  if (p.n != 1) throw ParseError("diagram needs a 1-parameter presentation, got n = " + std::to_string(p.n));
  require_valid(p);
  emit(g, emit_diagram(diagram_from_presentation(p)));
  return 0;
}

struct FiltrationArgs {
  std::string points, function, metric = "l2";
  std::size_t max_dim = 2;
  std::optional<std::string> scale_cap;
  bool negate = false;
};

int cmd_filtration(const Globals& g, bool cech, const FiltrationArgs& a) {
  auto rows = read_csv(a.points);
  PointCloud x = points_from_csv(rows);
  auto frows = read_csv(a.function);
  if (frows.size() != rows.size())
    throw ParseError("function file has " + std::to_string(frows.size()) + " rows, points file " +
                     std::to_string(rows.size()));
  FunctionValues f;
  for (auto& r : frows) {
    if (a.negate)
      for (auto& v : r) v = -v;
    f.push_back(r);
  }
  Metric metric = parse_metric(a.metric);
  if (cech && metric == Metric::L1) throw ParseError("cech does not support the l1 metric");
  std::optional<Rational> cap;
  if (a.scale_cap) cap = Rational::parse(*a.scale_cap);
  if (x.size() == 0) {
    BifilteredComplex empty;
    empty.params = frows.empty() ? 2 : frows.front().size() + 1;
    emit(g, emit_complex(empty));
    return 0;
  }
  BifilteredComplex c =
      cech ? cech_bifiltration(x, metric, f, a.max_dim, cap) : rips_bifiltration(x, metric, f, a.max_dim, cap);
  emit(g, emit_complex(c));
  return 0;
}

int cmd_homology_present2d(const Globals& g, const std::string& complex_file, std::size_t degree) {
  BifilteredComplex c = read_complex(complex_file);
  if (c.params != 2) throw ParseError("present2d needs a 2-parameter complex, got " + std::to_string(c.params));
  GradedChainComplex cc = chain_complex_of(c, homology_field(g));
  Presentation p = present_homology_2d(cc, degree);
  Grid grid = critical_grid(cc, degree);
  auto bad = hilbert_mismatches(p, grid_module_of(cc, degree, grid));
  std::cerr << "hilbert check: " << (bad.empty() ? "ok" : "FAILED") << " on " << grid.size() << " grid points\n";
  emit(g, emit_presentation(p));
  return bad.empty() ? 0 : kExitInput;
}

int cmd_homology_grid(const Globals& g, const std::optional<std::string>& complex_file,
                      const std::optional<std::string>& presentation_file, std::size_t degree,
                      const std::optional<std::string>& axes, bool check_refinement) {
  if (complex_file.has_value() == presentation_file.has_value())
    throw ParseError("grid needs exactly one of --complex and --presentation");
  if (presentation_file) {
    Presentation p = read_presentation(*presentation_file, g);
    require_valid(p);
    Grid grid;
    if (axes) {
      grid = parse_axes(*axes);
    } else {
      std::vector<std::vector<Rational>> ax;
      for (const auto& s : critical_grades(p).per_axis) ax.emplace_back(s.begin(), s.end());
      grid = make_grid(std::move(ax));
    }
    emit(g, emit_grid_module(grid_module_of(p, grid)));
    return 0;
  }
  GradedChainComplex cc = chain_complex_of(read_complex(*complex_file), homology_field(g));
  Grid grid = axes ? parse_axes(*axes) : critical_grid(cc, degree);
  if (check_refinement) {
    auto bad = refinement_mismatches(cc, degree, grid);
    std::cerr << "refinement check: " << (bad.empty() ? "ok" : "axes miss a critical value") << "\n";
    if (!bad.empty()) return kExitInput;
  }
  emit(g, emit_grid_module(grid_module_of(cc, degree, grid)));
  return 0;
}

int cmd_homology_image(const Globals& g, const std::string& complex_file, std::size_t degree, const std::string& d1,
                       const std::string& d2, const std::optional<std::string>& axes) {
  BifilteredComplex c = read_complex(complex_file);
  Rational delta1 = Rational::parse(d1), delta2 = Rational::parse(d2);
  Grid grid;
  if (axes) {
    grid = parse_axes(*axes);
  } else {
    grid = critical_grid(chain_complex_of(fixed_scale_slice(c, delta2), homology_field(g)), degree);
  }
  emit(g, emit_grid_module(image_grid_module(c, degree, delta1, delta2, grid, homology_field(g))));
  return 0;
}

int cmd_export_quadsys(const Globals& g, const std::string& fm, const std::string& fn, const std::string& eps_text) {
  Presentation m = read_presentation(fm, g), n = read_presentation(fn, g);
  if (!(m.field == n.field)) throw ParseError("field mismatch between '" + fm + "' and '" + fn + "'");
  Rational eps = Rational::parse(eps_text);
  if (eps.sign() < 0) throw ParseError("epsilon must be >= 0");
  auto j = MonotoneAffineMap::translation(m.n, eps);
  emit(g, export_interleaving_system(assemble_system(minimize_presentation(m), minimize_presentation(n), j, j)));
  return 0;
}

struct InferArgs {
  std::string density = "1/2:-1:1/4;1/2:1:1/4";
  std::string samples = "50,200,800";
  std::size_t trials = 10;
  std::string bandwidth = "1/5";
  std::string kernel = "gaussian";
  std::string grid;
  std::string metric = "l2";
  std::size_t degree = 0;
  unsigned threads = 0;
};

int cmd_infer(const Globals& g, const InferArgs& a) {
  InferConfig c;
  c.density = parse_density_spec(a.density);
  std::stringstream ss(a.samples);
  for (std::string s; std::getline(ss, s, ',');) {
    Rational v = Rational::parse(s);
    if (!v.is_integer() || v.sign() < 0) throw ParseError("sample sizes must be non-negative integers");
    c.samples.push_back(v.numerator().get_ui());
  }
  c.trials = a.trials;
  c.seed = g.seed;
  c.kde.bandwidth = Rational::parse(a.bandwidth);
  c.kde.kernel = parse_kernel(a.kernel);
  c.grid = parse_infer_grid_spec(a.grid);
  c.metric = parse_metric(a.metric);
  c.degree = a.degree;
  c.threads = a.threads;
  emit(g, run_experiment(c).to_json().dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact multiparameter persistence: presentations, interleavings, bifiltrations, inference"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--field", g.field, "coefficient field: 'zp P' or 'q'")->expected(1, 2);
  app.add_option("--seed", g.seed, "seed for every random choice");
  app.add_option("--budget", g.budget, "solver node budget");
  app.add_option("--out", g.out, "write the primary output here instead of stdout");

  std::function<int()> run;

  auto* present = app.add_subcommand("present", "presentation utilities")->require_subcommand(1);
  std::string pfile;
  present->add_subcommand("validate", "check presentation invariants")
      ->callback([&] { run = [&] { return cmd_present_validate(g, pfile); }; })
      ->add_option("file", pfile)->required();
  present->add_subcommand("minimize", "minimal presentation")
      ->callback([&] { run = [&] { return cmd_present_minimize(g, pfile); }; })
      ->add_option("file", pfile)->required();

  auto* distance = app.add_subcommand("distance", "distances")->require_subcommand(1);
  std::string f1, f2;
  std::optional<std::string> decide, export_path;
  auto* inter = distance->add_subcommand("interleaving", "interleaving distance of two presentations");
  inter->add_option("m", f1)->required();
  inter->add_option("n", f2)->required();
  inter->add_option("--decide", decide, "decide eps-interleaving instead");
  inter->add_option("--export-quadsys", export_path, "write the quadratic system");
  inter->callback([&] { run = [&] { return cmd_distance_interleaving(g, f1, f2, decide, export_path); }; });
  auto* bott = distance->add_subcommand("bottleneck", "bottleneck distance of two diagram files");
  bott->add_option("d1", f1)->required();
  bott->add_option("d2", f2)->required();
  bott->callback([&] { run = [&] { return cmd_distance_bottleneck(g, f1, f2); }; });

  auto* diagram = app.add_subcommand("diagram", "persistence diagram of a 1-parameter presentation");
  diagram->add_option("file", pfile)->required();
  diagram->callback([&] { run = [&] { return cmd_diagram(g, pfile); }; });

  auto* filtration = app.add_subcommand("filtration", "Rips/Cech bifiltrations")->require_subcommand(1);
  FiltrationArgs fa;
  for (const char* name : {"rips", "cech"}) {
    auto* sub = filtration->add_subcommand(name, std::string(name) + " bifiltration of a point cloud");
    sub->add_option("--points", fa.points, "points CSV")->required();
    sub->add_option("--function", fa.function, "function values CSV")->required();
    sub->add_option("--metric", fa.metric, "l1, l2 or linf");
    sub->add_option("--max-dim", fa.max_dim, "largest simplex dimension");
    sub->add_option("--scale-cap", fa.scale_cap, "omit simplices above this scale");
    sub->add_flag("--negate-function", fa.negate, "superlevelset filtration");
    const bool cech = std::string(name) == "cech";
    sub->callback([&, cech] { run = [&, cech] { return cmd_filtration(g, cech, fa); }; });
  }

  auto* homology = app.add_subcommand("homology", "homology of bifiltered complexes")->require_subcommand(1);
  std::optional<std::string> complex_file, presentation_file, axes;
  std::string complex_req, d1, d2;
  std::size_t degree = 0;
  bool check_refinement = false;
  auto* p2d = homology->add_subcommand("present2d", "presentation of H_i of a 2-parameter complex");
  p2d->add_option("--complex", complex_req)->required();
  p2d->add_option("--degree", degree);
  p2d->callback([&] { run = [&] { return cmd_homology_present2d(g, complex_req, degree); }; });
  auto* grid = homology->add_subcommand("grid", "grid module of a complex or presentation");
  grid->add_option("--complex", complex_file);
  grid->add_option("--presentation", presentation_file);
  grid->add_option("--degree", degree);
  grid->add_option("--axes", axes, "'v,v,...;v,...' per axis");
  grid->add_flag("--check-refinement", check_refinement, "verify the axes hold every critical value");
  grid->callback([&] {
    run = [&] { return cmd_homology_grid(g, complex_file, presentation_file, degree, axes, check_refinement); };
  });
  auto* image = homology->add_subcommand("image", "image module between two fixed-scale slices");
  image->add_option("--complex", complex_req)->required();
  image->add_option("--degree", degree);
  image->add_option("--delta1", d1)->required();
  image->add_option("--delta2", d2)->required();
  image->add_option("--axes", axes);
  image->callback([&] { run = [&] { return cmd_homology_image(g, complex_req, degree, d1, d2, axes); }; });

  auto* exportc = app.add_subcommand("export", "exports")->require_subcommand(1);
  std::string eps;
  auto* qs = exportc->add_subcommand("quadsys", "quadratic system deciding eps-interleaving");
  qs->add_option("m", f1)->required();
  qs->add_option("n", f2)->required();
  qs->add_option("--eps", eps)->required();
  qs->callback([&] { run = [&] { return cmd_export_quadsys(g, f1, f2, eps); }; });

  auto* infer = app.add_subcommand("infer", "inference experiments")->require_subcommand(1);
  InferArgs ia;
  auto* infer_run = infer->add_subcommand("run", "sample, estimate, compare against the true density");
  infer_run->add_option("--density", ia.density, "w:c1,..:sigma;...");
  infer_run->add_option("--samples", ia.samples, "ascending comma list");
  infer_run->add_option("--trials", ia.trials);
  infer_run->add_option("--bandwidth", ia.bandwidth);
  infer_run->add_option("--kernel", ia.kernel, "gaussian or epanechnikov");
  infer_run->add_option("--grid", ia.grid, "f=17,s=17,ambient=33,fmin=..,smax=..");
  infer_run->add_option("--metric", ia.metric, "l2 or linf");
  infer_run->add_option("--degree", ia.degree);
  infer_run->add_option("--threads", ia.threads, "worker threads (0: all cores)");
  infer_run->callback([&] { run = [&] { return cmd_infer(g, ia); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    return run ? run() : 1;
  } catch (const BudgetExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
