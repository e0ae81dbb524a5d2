#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ubranch/analytic.hpp"
#include "ubranch/config.hpp"
#include "ubranch/errors.hpp"
#include "ubranch/experiments.hpp"
#include "ubranch/lines.hpp"
#include "ubranch/report.hpp"
#include "ubranch/spatial.hpp"

namespace py = pybind11;
using namespace ubranch;

namespace {

LinesParams lines_params(double gamma, double C, double C1, double C2) {
  LinesParams p;
  p.gamma = gamma;
  p.C = C;
  p.C1 = C1;
  p.C2 = C2;
  return p;
}

// Results cross the boundary as JSON text; the Python wrapper decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

std::string summaries(const std::vector<ExperimentSummary>& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : s) out.push_back(report::to_json(x));
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_ubranch, m) {
  m.doc() = "Core simulators, closed forms and oracle experiments";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
  py::register_exception<UnsupportedCriticalCase>(m, "UnsupportedCriticalCase", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("gw_mean", [](double l, double mu, double t) { return analytic::gw_mean({l, mu}, t); }, py::arg("lam"),
        py::arg("mu"), py::arg("t"));
  m.def("extinction_prob", [](double l, double mu) { return analytic::extinction_prob({l, mu}); }, py::arg("lam"),
        py::arg("mu"));
  m.def("yule_pmf", &analytic::yule_pmf, py::arg("n"), py::arg("t"), py::arg("lam"));
  m.def("yule_relative_tail", &analytic::yule_relative_tail, py::arg("c"), py::arg("t"), py::arg("lam"));
  m.def("bd_gf", [](double s, double t, double l, double mu) { return analytic::bd_gf(s, t, {l, mu}); },
        py::arg("s"), py::arg("t"), py::arg("lam"), py::arg("mu"));
  m.def("reduced_gf", [](double s, double t, double l, double mu) { return analytic::reduced_gf(s, t, {l, mu}); },
        py::arg("s"), py::arg("t"), py::arg("lam"), py::arg("mu"));
  m.def("jump_target_pmf", &analytic::jump_target_pmf, py::arg("i"), py::arg("j"), py::arg("C"));
  m.def("long_jump_prob", &analytic::long_jump_prob, py::arg("J"), py::arg("C"));
  m.def(
      "schedule_lower",
      [](std::int64_t J, double gamma, double C, double C1, double C2) {
        const auto s = analytic::schedule_lower(J, lines_params(gamma, C, C1, C2));
        return py::dict(py::arg("t") = s.t, py::arg("q") = s.q, py::arg("log_q") = s.log_q,
                        py::arg("degenerate") = s.degenerate);
      },
      py::arg("J"), py::arg("gamma") = 0.5, py::arg("C") = 0.5, py::arg("C1") = 3.0, py::arg("C2") = 0.5);
  m.def(
      "max_line_tail_bound",
      [](std::int64_t J, double gamma, double C, double C1, double C2) {
        return analytic::max_line_tail_bound(J, lines_params(gamma, C, C1, C2));
      },
      py::arg("J"), py::arg("gamma") = 0.5, py::arg("C") = 0.5, py::arg("C1") = 3.0, py::arg("C2") = 0.5);

  m.def(
      "simulate_lines",
      [](double gamma, double C, double horizon, std::int64_t cap, std::uint64_t seed, std::int64_t sample_grid,
         std::uint64_t replicate, bool exits) {
        LinesSimConfig c;
        c.params = lines_params(gamma, C, 3.0, 0.5);
        c.horizon = horizon;
        c.cap = cap;
        c.seed = seed;
        c.sample_grid = sample_grid;
        c.replicate = replicate;
        py::gil_scoped_release release;
        const auto t = exits ? simulate_lines_by_exits(LinesModel::from_params(c.params), horizon, cap, sample_grid,
                                                       1, make_stream(seed, replicate))
                             : simulate_lines(c);
        nlohmann::json j = report::to_json(t, replicate);
        j["t"] = t.sample_times;
        j["population"] = t.population_at;
        j["max_line"] = t.max_line_at;
        return dump(j);
      },
      py::arg("gamma") = 0.5, py::arg("C") = 0.5, py::arg("horizon") = 5.0, py::arg("cap") = 1'000'000,
      py::arg("seed") = 1, py::arg("sample_grid") = 101, py::arg("replicate") = 0, py::arg("exits") = false);

  m.def(
      "simulate_spatial",
      [](double alpha, double gamma, double horizon, std::int64_t cap, std::uint64_t seed, std::int64_t sample_grid,
         std::uint64_t replicate) {
        SpatialConfig c;
        c.measure = JumpMeasure(alpha, 1.0, 1.0);
        c.gamma = gamma;
        c.horizon = horizon;
        c.cap = cap;
        c.seed = seed;
        c.sample_grid = sample_grid;
        c.replicate = replicate;
        py::gil_scoped_release release;
        const auto t = simulate_spatial(c);
        nlohmann::json j = report::to_json(t, replicate);
        j["t"] = t.sample_times;
        j["population"] = t.population_at;
        j["max_position"] = t.max_position_at;
        return dump(j);
      },
      py::arg("alpha") = 1.0, py::arg("gamma") = 0.5, py::arg("horizon") = 5.0, py::arg("cap") = 1'000'000,
      py::arg("seed") = 1, py::arg("sample_grid") = 101, py::arg("replicate") = 0);

  m.def(
      "extinction_experiment",
      [](double l, double mu, std::int64_t replicates, double horizon, std::int64_t cap, double tol,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return dump(report::to_json(extinction_experiment({l, mu}, replicates, horizon, cap, tol, {seed, 0})));
      },
      py::arg("lam") = 2.0, py::arg("mu") = 1.0, py::arg("replicates") = 5000, py::arg("horizon") = 30.0,
      py::arg("cap") = 1000, py::arg("tolerance") = 0.02, py::arg("seed") = 1);
  m.def(
      "yule_law_experiment",
      [](double l, double t, std::int64_t replicates, double tol, std::uint64_t seed) {
        py::gil_scoped_release release;
        return dump(report::to_json(yule_law_experiment(l, t, replicates, tol, {seed, 0})));
      },
      py::arg("lam") = 1.0, py::arg("t") = 0.6931471805599453, py::arg("replicates") = 10000,
      py::arg("tolerance") = 0.02, py::arg("seed") = 1);
  m.def(
      "validate_suite",
      [](std::uint64_t seed, std::int64_t threads) {
        py::gil_scoped_release release;
        return summaries(validate_suite({seed, threads}));
      },
      py::arg("seed") = 1, py::arg("threads") = 0);
  m.def(
      "domination_quantiles",
      [](std::vector<double> lower, std::vector<double> upper, std::vector<double> levels, std::int64_t resamples,
         std::uint64_t seed, std::int64_t min_samples) {
        py::gil_scoped_release release;
        return dump(report::to_json(domination_quantiles(lower, upper, levels, resamples, seed, min_samples)));
      },
      py::arg("lower"), py::arg("upper"), py::arg("levels"), py::arg("resamples") = 2000, py::arg("seed") = 1,
      py::arg("min_samples") = 1000);

  m.attr("schema_version") = report::kSchemaVersion;
}
