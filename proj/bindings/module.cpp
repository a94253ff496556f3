#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uwbcoop/io.hpp"

namespace py = pybind11;
using namespace uwbcoop;

namespace {

py::object opt_point(const std::optional<Point2>& p) {
    if (!p) return py::none();
    return py::make_tuple(p->x, p->y);
}

py::list estimates_to_py(const std::vector<std::vector<std::optional<Point2>>>& est) {
    py::list tags;
    for (const auto& series : est) {
        py::list periods;
        for (const auto& e : series) periods.append(opt_point(e));
        tags.append(periods);
    }
    return tags;
}

std::vector<Point2> to_points(const std::vector<std::pair<double, double>>& v) {
    std::vector<Point2> out;
    out.reserve(v.size());
    for (const auto& [x, y] : v) out.push_back({x, y});
    return out;
}

}  // namespace

PYBIND11_MODULE(_uwbcoop, m) {
    m.doc() = "Cooperative UWB indoor positioning simulator";

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("sigma_toa", &Scenario::sigma_toa)
        .def_readwrite("sigma_twr", &Scenario::sigma_twr)
        .def_readwrite("periods", &Scenario::periods)
        .def_readwrite("grid_step", &Scenario::grid_step)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("cooperative", &Scenario::cooperative)
        .def_property_readonly("n_tags", &Scenario::n_tags)
        .def_property_readonly("n_anchors",
                               [](const Scenario& s) { return s.anchors.size(); })
        .def_property_readonly("tag_truths", [](const Scenario& s) {
            py::list out;
            for (const auto& p : s.tag_truths) out.append(py::make_tuple(p.x, p.y));
            return out;
        });

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("seed", &RunResult::seed)
        .def_readonly("cooperative", &RunResult::cooperative)
        .def_readonly("n_dropped", &RunResult::n_dropped)
        .def_property_readonly(
            "estimates", [](const RunResult& r) { return estimates_to_py(r.estimates); })
        .def("tag_series", [](const RunResult& r, int tag, int burn_in) {
            py::list out;
            for (const auto& p : r.tag_series(tag, burn_in)) {
                out.append(py::make_tuple(p.x, p.y));
            }
            return out;
        }, py::arg("tag"), py::arg("burn_in") = kDefaultBurnIn);

    py::class_<Cep>(m, "Cep")
        .def_readonly("radius", &Cep::radius)
        .def_readonly("fraction", &Cep::fraction)
        .def_readonly("n_samples", &Cep::n_samples)
        .def_readonly("low_sample", &Cep::low_sample)
        .def_property_readonly(
            "center", [](const Cep& c) { return py::make_tuple(c.center.x, c.center.y); });

    m.def("load_scenario", &parse_scenario, py::arg("path"),
          "Read, parse and validate a scenario JSON file.");
    m.def("validate_scenario",
          [](const Scenario& s) { return validate_scenario(s); }, py::arg("scenario"),
          "List of invariant violations; empty means valid.");
    m.def("scenario_hash", &scenario_hash, py::arg("scenario"));

    m.def("run_scenario",
          [](const Scenario& s) { return run_scenario(s); }, py::arg("scenario"),
          "Synthesize measurements and run the EKF bank for one scenario.");

    m.def("run_monte_carlo",
          [](const Scenario& base, int n_configs, std::uint64_t master_seed,
             int n_threads, int burn_in) {
              const auto items = run_monte_carlo(base, n_configs, master_seed, {}, n_threads);
              py::list out;
              for (const auto& item : items) {
                  if (!item.ok) continue;
                  for (int t = 0; t < base.n_tags(); ++t) {
                      const auto st = item.tdoa_run.tag_series(t, burn_in);
                      const auto sc = item.coop_run.tag_series(t, burn_in);
                      if (st.empty() || sc.empty()) continue;
                      out.append(py::make_tuple(item.config_index, t, cep(st).radius,
                                                cep(sc).radius));
                  }
              }
              return out;
          },
          py::arg("scenario"), py::arg("n_configs"), py::arg("master_seed"),
          py::arg("n_threads") = 0, py::arg("burn_in") = kDefaultBurnIn,
          "Paired sweep; returns (config, tag, cep68_tdoa, cep68_coop) tuples.");

    m.def("cep",
          [](const std::vector<std::pair<double, double>>& pts, double fraction) {
              return cep(to_points(pts), fraction);
          },
          py::arg("estimates"), py::arg("fraction") = 0.68);
    m.def("accuracy",
          [](const std::vector<std::pair<double, double>>& pts,
             std::pair<double, double> truth) {
              return accuracy(to_points(pts), {truth.first, truth.second});
          },
          py::arg("estimates"), py::arg("truth"));
    m.def("distance",
          [](std::pair<double, double> a, std::pair<double, double> b) {
              return distance({a.first, a.second}, {b.first, b.second});
          },
          py::arg("a"), py::arg("b"));

    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
    m.attr("DEFAULT_BURN_IN") = kDefaultBurnIn;

    py::register_exception<ParseError>(m, "ParseError");
}
