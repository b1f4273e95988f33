// Python bindings for the dialogue pipeline: generation, training,
// evaluation and reporting, mirroring the command-line subcommands.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "bankdial/eval.hpp"
#include "bankdial/pipeline.hpp"
#include "bankdial/runner.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace bankdial;

namespace {

json to_json(const py::handle& obj) {
  py::object dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const json& j) {
  py::object loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

RunConfig config_from(const py::dict& config) { return RunConfig::from_json(to_json(config)); }

ReportData report_data_from(const py::dict& data) {
  ReportData out;
  for (const auto& [model, by_tag] : data)
    for (const auto& [tag, acc] : by_tag.cast<py::dict>())
      out[model.cast<std::string>()][tag.cast<std::string>()] = acc.cast<double>();
  return out;
}

}  // namespace

PYBIND11_MODULE(_bankdial, m) {
  m.doc() = "Synthetic banking dialogue corpora, memory-network training and evaluation";

  m.def(
      "default_config", [] { return from_json(RunConfig{}.to_json()); },
      "The default run configuration as a dict.");

  m.def(
      "generate",
      [](const py::dict& config) {
        GenerateResult res = generate_all(config_from(config));
        py::dict out;
        out["manifest_path"] = res.manifest_path;
        out["candidates_path"] = res.candidates_path;
        out["candidates_by_intent_path"] = res.candidates_by_intent_path;
        out["challenge_manifest_path"] = res.challenge_manifest_path;
        py::dict counts;
        for (const auto& [tag, n] : res.counts) counts[py::str(tag)] = n;
        out["counts"] = counts;
        return out;
      },
      py::arg("config"),
      "Generate every corpus, the candidate lists and the manifests under config['out_dir'].");

  m.def(
      "train",
      [](const py::dict& config, const std::string& model) {
        TrainOutcome res = run_training(config_from(config), model);
        py::dict out;
        out["checkpoint_path"] = res.checkpoint_path;
        out["log_path"] = res.log_path;
        py::list log;
        for (const auto& e : res.log) {
          py::dict entry;
          entry["epoch"] = e.epoch;
          entry["loss"] = e.loss;
          entry["dev_accuracy"] = e.dev_accuracy;
          log.append(entry);
        }
        out["log"] = log;
        return out;
      },
      py::arg("config"), py::arg("model"),
      "Train 'smn' or 'mmn' on the generated corpora; writes and returns the checkpoint path.");

  m.def(
      "evaluate",
      [](const py::dict& config, const std::string& model, const std::string& checkpoint,
         const std::vector<std::string>& testsets) {
        EvalOutcome res = run_evaluation(config_from(config), model, checkpoint, testsets);
        py::dict out;
        py::dict acc;
        for (const auto& [tag, a] : res.data.at(model)) acc[py::str(tag)] = a;
        out["accuracy_pct"] = acc;
        out["report_path"] = res.report_path;
        out["predictions_path"] = res.predictions_path;
        return out;
      },
      py::arg("config"), py::arg("model"), py::arg("checkpoint") = "",
      py::arg("testsets") = std::vector<std::string>{},
      "Evaluate a checkpoint per testset tag; returns per-tag per-response accuracy.");

  m.def(
      "render_report", [](const py::dict& data) { return render_report(report_data_from(data)); },
      py::arg("data"), "Plain-text accuracy tables from {model: {tag: accuracy_pct}}.");

  m.def(
      "trend_violations",
      [](const py::dict& data) { return trend_violations(report_data_from(data)); },
      py::arg("data"),
      "Messages for each violated condition of the expected accuracy profile; empty means ok.");

  m.def("testset_tags", &all_testset_tags, "All corpus tags a generation run produces.");
}
