// python/xvec-python.cc

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Python bindings: pipeline commands, metrics, backend scoring and the
// gradient suite.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xvec/backend/backend.h"
#include "xvec/base/error.h"
#include "xvec/evalkit/evalkit.h"
#include "xvec/pipeline/commands.h"
#include "xvec/pipeline/embeddings.h"
#include "xvec/pipeline/gradient-suite.h"
#include "xvec/pipeline/run-config.h"

namespace py = pybind11;

namespace {

xvec::RunConfig MakeConfig(const std::string &text, const std::vector<std::string> &overrides) {
  return xvec::ParseRunConfigWithOverrides(text, "<python>", overrides);
}

py::dict ReportDict(const xvec::MetricsReport &r) {
  py::dict d;
  d["system"] = r.system;
  d["eer"] = r.eer;
  d["min_dcf_p01"] = r.min_dcf_p01;
  d["min_dcf_p001"] = r.min_dcf_p001;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "x-vector speaker verification toolkit";

  py::register_exception<xvec::Error>(m, "XvecError", PyExc_RuntimeError);
  static py::exception<xvec::NumericError> numeric(m, "NumericError", m.attr("XvecError"));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const xvec::NumericError &e) {
      py::set_error(numeric, e.what());
    }
  });

  m.def("command_names", &xvec::CommandNames, "Subcommands accepted by run_command.");

  m.def(
      "run_command",
      [](const std::string &command, const std::string &config_text, const std::vector<std::string> &overrides,
         const std::string &data_dir, const std::string &model_path, const std::vector<std::string> &splits,
         const std::string &embeddings_path, const std::string &backend_path, const std::string &enroll_path,
         const std::string &test_path, const std::string &trials_path, const std::vector<std::string> &scores) {
        xvec::CommandInputs in;
        in.data_dir = data_dir;
        in.model_path = model_path;
        in.splits = splits;
        in.embeddings_path = embeddings_path;
        in.backend_path = backend_path;
        in.enroll_path = enroll_path;
        in.test_path = test_path;
        in.trials_path = trials_path;
        in.scores = scores;
        in.command_line = "python run_command " + command;
        xvec::CommandResult r;
        {
          py::gil_scoped_release release;
          r = xvec::RunCommand(command, MakeConfig(config_text, overrides), in);
        }
        py::dict out;
        out["outputs"] = r.outputs;
        py::list reports;
        for (const auto &rep : r.reports) reports.append(ReportDict(rep));
        out["reports"] = reports;
        out["ok"] = r.ok;
        return out;
      },
      py::arg("command"), py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
      py::arg("data_dir") = "", py::arg("model_path") = "", py::arg("splits") = std::vector<std::string>{},
      py::arg("embeddings_path") = "", py::arg("backend_path") = "", py::arg("enroll_path") = "",
      py::arg("test_path") = "", py::arg("trials_path") = "", py::arg("scores") = std::vector<std::string>{},
      "Runs one pipeline subcommand; the output directory is the config's paths.out.");

  m.def(
      "normalize_config",
      [](const std::string &text, const std::vector<std::string> &overrides) {
        return MakeConfig(text, overrides).ToToml();
      },
      py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Parses, validates and re-renders a TOML run configuration.");

  m.def(
      "compute_eer",
      [](const std::vector<double> &target, const std::vector<double> &nontarget) {
        return xvec::ComputeEer(target, nontarget);
      },
      py::arg("target"), py::arg("nontarget"));
  m.def(
      "compute_min_dcf",
      [](const std::vector<double> &target, const std::vector<double> &nontarget, double p_target, double c_miss,
         double c_fa) { return xvec::ComputeMinDcf(target, nontarget, p_target, c_miss, c_fa); },
      py::arg("target"), py::arg("nontarget"), py::arg("p_target"), py::arg("c_miss") = 1.0, py::arg("c_fa") = 1.0);

  m.def(
      "plda_score",
      [](const Eigen::VectorXd &mu, const Eigen::MatrixXd &between, const Eigen::MatrixXd &within,
         const Eigen::VectorXd &enroll, const Eigen::VectorXd &test) {
        return xvec::Plda(mu, between, within).Score(enroll, test);
      },
      py::arg("mu"), py::arg("between"), py::arg("within"), py::arg("enroll"), py::arg("test"),
      "Two-covariance PLDA log-likelihood ratio.");
  m.def(
      "length_normalize",
      [](const Eigen::VectorXd &e, bool unit) {
        return xvec::LengthNormalize(e, unit ? xvec::LengthNorm::kUnit : xvec::LengthNorm::kSqrtDim);
      },
      py::arg("embedding"), py::arg("unit") = false);

  m.def(
      "read_embeddings",
      [](const std::string &path) {
        xvec::EmbeddingSet s = xvec::ReadEmbeddings(path);
        return py::make_tuple(s.utterance_ids, s.speaker_ids, s.vectors);
      },
      py::arg("path"), "Returns (utterance_ids, speaker_ids, matrix) from an .xvem file.");

  m.def(
      "gradient_suite",
      [](std::uint64_t seed) {
        std::vector<xvec::GradSuiteEntry> entries;
        {
          py::gil_scoped_release release;
          entries = xvec::RunGradientSuite(seed);
        }
        py::list out;
        for (const auto &e : entries) out.append(py::make_tuple(e.name, e.max_rel_error, e.num_checked));
        return out;
      },
      py::arg("seed") = 1, "Finite-difference checks as (name, max_rel_error, num_checked).");
  m.attr("GRADIENT_TOLERANCE") = xvec::kGradSuiteTolerance;
}
