"""Python bindings for the gertis evidential-reasoning engine."""

import json

from ._gertis import Consultation, GertisError, KnowledgeBase, combine, kb_from_text, load_kb, parse_diagnostics

__all__ = [
    "Consultation",
    "GertisError",
    "KnowledgeBase",
    "combine",
    "consult",
    "diagnoses",
    "explanation",
    "kb_from_text",
    "load_kb",
    "parse_diagnostics",
]


def consult(kb, evidence=(), threshold=0.0):
    """Run forward chaining. `evidence` holds (frame, element, degree) triples."""
    return Consultation(kb, list(evidence), threshold)


def diagnoses(consultation):
    return json.loads(consultation.diagnoses_json())


def explanation(consultation, hypothesis, depth=0):
    return json.loads(consultation.explanation_json(hypothesis, depth))
