#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gertis/evidence_engine.hpp"
#include "gertis/explanation.hpp"
#include "gertis/json_io.hpp"
#include "gertis/kb_language.hpp"
#include "gertis/knowledge_model.hpp"

namespace py = pybind11;
using namespace gertis;

namespace {

using KbPtr = std::shared_ptr<KnowledgeBase>;

KbPtr held(std::shared_ptr<const KnowledgeBase> kb) { return std::const_pointer_cast<KnowledgeBase>(std::move(kb)); }

struct Consultation {
  WorkingMemory wm;
};

EvidenceMap evidence_from(const std::vector<std::tuple<std::string, std::string, double>>& entries) {
  EvidenceMap out;
  for (const auto& [frame, element, degree] : entries) out[{frame, element}] = degree;
  return out;
}

Bpa bpa_from(const FrameSignature& sig, const std::vector<std::pair<std::vector<std::string>, double>>& masses) {
  std::vector<std::pair<FocalSet, double>> pairs;
  for (const auto& [names, mass] : masses) pairs.emplace_back(encode(sig, names), mass);
  return Bpa::make(sig, std::move(pairs));
}

std::vector<std::pair<std::vector<std::string>, double>> bpa_to(const Bpa& m, const FrameSignature& sig) {
  std::vector<std::pair<std::vector<std::string>, double>> out;
  for (const auto& [set, mass] : m.masses()) out.emplace_back(decode(set, sig), mass);
  return out;
}

}  // namespace

PYBIND11_MODULE(_gertis, m) {
  m.doc() = "Evidential-reasoning engine core";

  py::register_exception<Error>(m, "GertisError");

  py::class_<KnowledgeBase, KbPtr>(m, "KnowledgeBase")
      .def_property_readonly("id", &KnowledgeBase::id)
      .def("frames_json", [](const KnowledgeBase& kb) { return json_io::frames(kb).dump(); })
      .def("hypotheses_json", [](const KnowledgeBase& kb) { return json_io::hypotheses(kb).dump(); })
      .def("rule_json", [](const KnowledgeBase& kb, const std::string& id) { return json_io::rule(kb, kb.rule(id)).dump(); })
      .def("serialize", [](const KnowledgeBase& kb) { return serialize_kb(kb.declarations()); })
      .def("code_of", [](const KnowledgeBase& kb, const std::string& frame, const std::vector<std::string>& names) {
        return py::int_(py::str(encode(kb.frame(frame).signature, names).code()));
      });

  m.def("load_kb", [](const std::string& path) { return held(load_knowledge_base(path)); }, py::arg("path"));
  m.def("kb_from_text", [](const std::string& text, const std::string& id) { return held(knowledge_base_from_text(text, id)); },
        py::arg("text"), py::arg("kb_id") = "kb");
  m.def("parse_diagnostics", [](const std::string& text, const std::string& file) {
    std::vector<std::tuple<int, int, std::string>> out;
    for (const auto& d : parse_kb(text, file).diagnostics) out.emplace_back(d.span.line, d.span.column, d.message);
    return out;
  }, py::arg("text"), py::arg("file") = "<input>");

  py::class_<Consultation>(m, "Consultation")
      .def(py::init([](KbPtr kb, const std::vector<std::tuple<std::string, std::string, double>>& evidence,
                       double threshold) {
             EngineSettings s;
             s.threshold = threshold;
             py::gil_scoped_release release;
             return Consultation{forward_chain(std::move(kb), evidence_from(evidence), s)};
           }),
           py::arg("kb"), py::arg("evidence") = std::vector<std::tuple<std::string, std::string, double>>{},
           py::arg("threshold") = 0.0)
      .def("update",
           [](Consultation& c, const std::vector<std::tuple<std::string, std::string, std::optional<double>>>& changes) {
             std::vector<EvidenceChange> cs;
             for (const auto& [frame, element, degree] : changes) cs.push_back({frame, element, degree});
             c.wm = update_evidence(c.wm, cs);
           })
      .def("interval",
           [](const Consultation& c, const std::string& hypothesis) {
             BeliefInterval iv = hypothesis_interval(c.wm, hypothesis);
             return std::make_pair(iv.bel, iv.pl);
           })
      .def("bpa", [](const Consultation& c, const std::string& frame) {
        return bpa_to(c.wm.bpa(frame), c.wm.kb().frame(frame).signature);
      })
      .def("diagnoses_json", [](const Consultation& c) { return json_io::diagnoses(c.wm).dump(); })
      .def("explanation_json", [](const Consultation& c, const std::string& hypothesis, int depth) {
        return json_io::explanation_chain(c.wm, hypothesis, depth).dump();
      }, py::arg("hypothesis"), py::arg("depth") = 0)
      .def("explanation_text", [](const Consultation& c, const std::string& hypothesis) {
        return render_text(explain(c.wm, hypothesis));
      })
      .def("triggered_b_rules", [](const Consultation& c, const std::string& hypothesis) {
        std::vector<std::string> out;
        for (const auto& t : c.wm.triggered_b_rules(hypothesis)) out.push_back(t.rule_id);
        return out;
      });

  m.def("combine",
        [](const std::vector<std::string>& frame, const std::vector<std::pair<std::vector<std::string>, double>>& a,
           const std::vector<std::pair<std::vector<std::string>, double>>& b) {
          FrameSignature sig("frame", frame);
          return bpa_to(combine(bpa_from(sig, a), bpa_from(sig, b)), sig);
        },
        py::arg("frame"), py::arg("a"), py::arg("b"));
}
