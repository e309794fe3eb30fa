#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wse/chaining.hpp"
#include "wse/cli.hpp"
#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/error.hpp"
#include "wse/eval.hpp"

namespace py = pybind11;

namespace {

wse::SimilarityKernel make_kernel(const std::string& kind, double temperature) {
  wse::SimilarityKernel k;
  if (kind == "dot") {
    k.kind = wse::KernelKind::kDot;
  } else if (kind == "neg_sq_euclidean") {
    k.kind = wse::KernelKind::kNegSquaredEuclidean;
  } else {
    throw wse::UsageError("kernel must be dot or neg_sq_euclidean");
  }
  k.temperature = temperature;
  return k;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Word sense extension: chaining scores, corpus statistics and the pipeline CLI";

  py::register_exception<wse::UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<wse::DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<wse::InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  m.def(
      "prototype_score",
      [](const Eigen::MatrixXd& exemplars, const Eigen::VectorXd& h, const std::string& kernel,
         double temperature) { return wse::prototype_score(exemplars, h, make_kernel(kernel, temperature)); },
      py::arg("exemplars"), py::arg("h"), py::arg("kernel") = "dot", py::arg("temperature") = 1.0,
      "Kernel between h and the mean row of `exemplars`.");
  m.def(
      "exemplar_score",
      [](const Eigen::MatrixXd& exemplars, const Eigen::VectorXd& h, const std::string& kernel,
         double temperature) { return wse::exemplar_score(exemplars, h, make_kernel(kernel, temperature)); },
      py::arg("exemplars"), py::arg("h"), py::arg("kernel") = "dot", py::arg("temperature") = 1.0,
      "Log of the mean exponentiated kernel over the rows of `exemplars`.");
  m.def("typevec", &wse::typevec, py::arg("token"), py::arg("dimension"), py::arg("seed") = 0);

  m.def(
      "corpus_stats",
      [](const std::string& path) {
        const wse::CorpusStats s = wse::corpus_stats(wse::load_corpus(path));
        py::dict d;
        d["word_types"] = s.word_types;
        d["usages"] = s.usages;
        d["mean_senses"] = s.mean_senses;
        return d;
      },
      py::arg("path"));

  m.def(
      "wu_palmer",
      [](const std::map<std::string, std::string>& parent, const std::string& a, const std::string& b) {
        std::map<wse::SenseId, wse::SenseId> edges;
        for (const auto& [c, p] : parent) edges[{c}] = {p};
        return wse::wu_palmer({a}, {b}, wse::Taxonomy(edges));
      },
      py::arg("parent"), py::arg("a"), py::arg("b"), "Similarity in a tree given as child -> parent.");

  m.def(
      "run",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "wse");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out;
        std::ostringstream err;
        const int code = wse::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process; returns (exit code, stdout, stderr).");
}
