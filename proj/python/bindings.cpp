#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chaining/functionals.hpp"
#include "chaining/gaussian.hpp"
#include "chaining/io.hpp"
#include "chaining/lower_bound.hpp"
#include "chaining/optimizer.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/vlc.hpp"

namespace py = pybind11;
using namespace chaining;

namespace {

py::list diagnostics(const Diagnostics& d) {
  py::list out;
  for (const auto& x : d) out.append(py::make_tuple(x.kind, x.message));
  return out;
}

py::dict estimate(const McEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["half_width"] = e.half_width;
  d["samples"] = e.samples;
  d["seed"] = e.seed;
  return d;
}

LengthChannel channel_of(const std::string& s) {
  if (s == "integer") return LengthChannel::integer;
  if (s == "ideal") return LengthChannel::ideal;
  throw ParameterError("channel must be 'integer' or 'ideal'");
}

WeightSequence weights_of(const py::object& p) {
  if (p.is_none()) return WeightSequence::dyadic();
  return WeightSequence::from_list(p.cast<std::vector<double>>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generic chaining functionals, variable-length codes and Gaussian checks";

  auto base = py::register_exception<Error>(m, "ChainingError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", base.ptr());

  py::class_<MetricSpace>(m, "MetricSpace")
      .def(py::init<std::vector<std::string>, Eigen::MatrixXd>(), py::arg("labels"), py::arg("dist"))
      .def_static("euclidean", &MetricSpace::euclidean, py::arg("points"),
                  py::arg("labels") = std::vector<std::string>{})
      .def_static("from_json", [](const std::string& text) { return metric_from_json(parse_json(text)); })
      .def("to_json", [](const MetricSpace& s) { return metric_to_json(s).dump(); })
      .def_property_readonly("labels", &MetricSpace::labels)
      .def_property_readonly("matrix", &MetricSpace::matrix)
      .def("index_of", [](const MetricSpace& s, const std::string& l) { return s.index_of(l); })
      .def("__len__", &MetricSpace::size)
      .def("__call__", [](const MetricSpace& s, std::size_t i, std::size_t j) { return s(i, j); });

  py::class_<ProbabilityMeasure>(m, "ProbabilityMeasure")
      .def(py::init<std::vector<double>>(), py::arg("weights"))
      .def_static("uniform", &ProbabilityMeasure::uniform)
      .def_static("dirac", &ProbabilityMeasure::dirac)
      .def_static("normalized", &ProbabilityMeasure::normalized)
      .def_property_readonly("weights", &ProbabilityMeasure::weights)
      .def("__len__", &ProbabilityMeasure::size)
      .def("__getitem__", [](const ProbabilityMeasure& mu, std::size_t i) {
        if (i >= mu.size()) throw py::index_error();
        return mu[i];
      });

  m.def("validate_metric", [](const MetricSpace& s) { return diagnostics(validate_metric(s)); });
  m.def("diameter", [](const MetricSpace& s) { return diameter(s); });
  m.def("normalize_diameter", &normalize_diameter);
  m.def("covering_number", [](const MetricSpace& s, double eps) {
    const auto c = covering_number(s, eps);
    return py::make_tuple(c.count, c.exact);
  });

  py::class_<PartitionTree, std::shared_ptr<PartitionTree>>(m, "PartitionTree")
      .def_property_readonly("ratio", &PartitionTree::ratio)
      .def_property_readonly("depth", &PartitionTree::depth)
      .def_property_readonly("terminal", &PartitionTree::terminal)
      .def_property_readonly("root_diameter", &PartitionTree::root_diameter)
      .def("resolution", &PartitionTree::resolution)
      .def("cells", [](const PartitionTree& t, std::size_t k) {
        py::list out;
        for (const auto& c : t.level(k)) {
          py::dict d;
          d["members"] = c.members;
          d["representative"] = c.representative;
          d["parent"] = c.parent == kNoParent ? py::object(py::none()) : py::cast(c.parent);
          d["child_index"] = c.child_index;
          out.append(d);
        }
        return out;
      })
      .def("cell_of", [](const PartitionTree& t, std::size_t k, std::size_t p) { return t.cell_of(k, p).members; });

  m.def("build_radial_partitions", [](const MetricSpace& s, double r, std::size_t depth) {
    return std::make_shared<PartitionTree>(build_radial_partitions(s, r, depth));
  }, py::arg("space"), py::arg("r"), py::arg("max_depth"));
  m.def("validate_tree", [](const PartitionTree& t, const MetricSpace& s) { return diagnostics(validate_tree(t, s)); });

  py::class_<VlcSequence>(m, "VlcSequence")
      .def_property_readonly("construction", &VlcSequence::construction)
      .def_property_readonly("depth", &VlcSequence::depth)
      .def_property_readonly("tail_increment", &VlcSequence::tail_increment)
      .def("length", py::overload_cast<std::size_t, std::size_t>(&VlcSequence::length, py::const_))
      .def("ideal_length", &VlcSequence::ideal_length)
      .def("kraft_sum", [](const VlcSequence& v, std::size_t k) { return kraft_sum(v.level_lengths(k)); })
      .def("to_json", [](const VlcSequence& v, const std::vector<std::string>& labels) {
        return vlc_to_json(v, labels).dump();
      });

  auto share = [](const std::shared_ptr<PartitionTree>& t) { return std::shared_ptr<const PartitionTree>(t); };
  m.def("build_from_measures", [share](const std::shared_ptr<PartitionTree>& t, const ProbabilityMeasure& mu,
                                       const std::string& conditionals) {
    if (conditionals != "uniform" && conditionals != "mu") throw ParameterError("conditionals must be 'uniform' or 'mu'");
    const auto c = conditionals == "mu" ? conditionals_from_measure(*t, mu) : uniform_conditionals(*t);
    return build_from_measures(share(t), mu, c);
  }, py::arg("tree"), py::arg("mu"), py::arg("conditionals") = "uniform");
  m.def("build_from_labeled_net", [share](const std::shared_ptr<PartitionTree>& t) {
    return build_from_labeled_net(share(t));
  });
  m.def("build_from_single_measure", [share](const std::shared_ptr<PartitionTree>& t, const ProbabilityMeasure& mu) {
    return build_from_single_measure(share(t), mu);
  });
  m.def("assign_lower_codes", [share](const std::shared_ptr<PartitionTree>& t) { return assign_lower_codes(share(t)); });
  m.def("validate_admissible", [](const VlcSequence& v) { return diagnostics(validate_admissible(v)); });

  m.def("ft_functional", &ft_functional, py::arg("space"), py::arg("mu"), py::arg("t"));
  m.def("m_functional", &m_functional, py::arg("space"), py::arg("mu"), py::arg("nu"));
  m.def("sigma_bar", [](const VlcSequence& v, std::size_t t, const py::object& p) {
    return sigma_bar(v, weights_of(p), t).value;
  }, py::arg("vlc"), py::arg("t"), py::arg("p") = py::none());
  m.def("sigma_code", [](const VlcSequence& v, std::size_t t, const std::string& ch) {
    return sigma_code(v, t, channel_of(ch)).value;
  }, py::arg("vlc"), py::arg("t"), py::arg("channel") = "integer");
  m.def("sigma_prime", [](const VlcSequence& v, const py::object& p) { return sigma_prime(v, weights_of(p)).value; },
        py::arg("vlc"), py::arg("p") = py::none());
  m.def("refinement_bound", [](const VlcSequence& v, std::size_t t, const std::string& ch) {
    return refinement_bound(v, t, channel_of(ch)).value;
  }, py::arg("vlc"), py::arg("t"), py::arg("channel") = "integer");
  m.def("bednorz_partition_bound", &bednorz_partition_bound, py::arg("tree"), py::arg("mu"), py::arg("t"));
  m.def("entropy_chain_bound", &entropy_chain_bound, py::arg("tree"), py::arg("mu"));

  py::class_<GaussianModel>(m, "GaussianModel")
      .def(py::init<std::vector<std::string>, Eigen::MatrixXd>(), py::arg("labels"), py::arg("cov"))
      .def_static("rbf", &GaussianModel::rbf, py::arg("points"), py::arg("lengthscale"),
                  py::arg("labels") = std::vector<std::string>{})
      .def_static("iid", &GaussianModel::iid, py::arg("m"), py::arg("variance") = 1.0)
      .def_property_readonly("labels", &GaussianModel::labels)
      .def_property_readonly("covariance", &GaussianModel::covariance)
      .def("__len__", &GaussianModel::size);

  m.def("canonical_metric", &canonical_metric, py::arg("model"), py::arg("scale") = 1.0);
  m.def("sample", &sample, py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def("estimate_sup", [](const GaussianModel& g, const PointSet& subset, std::size_t n, std::uint64_t seed) {
    return estimate(estimate_sup(g, subset, n, seed));
  }, py::arg("model"), py::arg("subset"), py::arg("n"), py::arg("seed"));
  m.def("wilson_interval", [](std::size_t hits, std::size_t n) {
    const auto w = wilson_interval(hits, n);
    return py::make_tuple(w.rate, w.lower, w.upper);
  });

  m.def("optimize_majorizing_measure", [](const MetricSpace& s, std::size_t iters, std::uint64_t seed) {
    OptimizerConfig cfg;
    cfg.iters = iters;
    cfg.seed = seed;
    const auto r = optimize_majorizing_measure(s, cfg);
    py::dict d;
    d["measure"] = r.measure.weights();
    d["value"] = r.value;
    d["uniform_value"] = r.uniform_value;
    d["trace"] = r.trace;
    return d;
  }, py::arg("space"), py::arg("iters") = 200, py::arg("seed") = 0);
}
