import os
import pathlib

import pytest

import gertis

ROOT = pathlib.Path(os.environ.get("GERTIS_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
E4 = [
    ("RE000042", "negative", 1.0),
    ("RE000011", "present", 1.0),
    ("RE000012", "present", 0.7),
    ("RE000013", "present", 1.0),
    ("RE000014", "present", 1.0),
    ("RE000015", "present", 1.0),
]


@pytest.fixture(scope="module")
def kb():
    return gertis.load_kb(str(ROOT / "data" / "polyarthritis.gkb"))


def test_sample_consultation(kb):
    c = gertis.consult(kb, E4)
    rows = gertis.diagnoses(c)
    assert [r["hypothesis"] for r in rows] == ["Ne", "Rh"]
    assert rows[0]["bel"] == pytest.approx(0.56)
    assert c.interval("Po") == (0.0, 0.0)
    masses = dict((tuple(names), m) for names, m in c.bpa("PA"))
    assert sum(masses.values()) == pytest.approx(1.0)


def test_update_and_explanation(kb):
    c = gertis.consult(kb, E4)
    assert c.triggered_b_rules("Ne") == ["Rule1"]
    node = gertis.explanation(c, "Ne", 1)
    assert node["contributions"][0]["rule"] == "Rule1"
    assert node["parent_node"]["hypothesis"] == "Rh"
    assert "[0.560, 1.000]" in c.explanation_text("Ne")
    c.update([("RE000042", "negative", None)])
    assert c.triggered_b_rules("Ne") == []
    assert c.interval("Rh")[0] == pytest.approx(0.56)


def test_kb_accessors(kb):
    assert kb.code_of("PA", ["ne1", "ne2", "ne3", "ne4"]) == 240
    assert kb.id == "polyarthritis"
    again = gertis.kb_from_text(kb.serialize(), "copy")
    assert again.serialize() == kb.serialize()


def test_combine():
    out = dict((tuple(n), m) for n, m in gertis.combine(["a", "b"], [(["a"], 0.6), (["a", "b"], 0.4)],
                                                         [(["b"], 0.5), (["a", "b"], 0.5)]))
    k = 0.3
    assert out[("a",)] == pytest.approx(0.3 / (1 - k))
    assert out[("b",)] == pytest.approx(0.2 / (1 - k))
    with pytest.raises(gertis.GertisError):
        gertis.combine(["a", "b"], [(["a"], 1.0)], [(["b"], 1.0)])


def test_parse_diagnostics():
    text = (ROOT / "tests" / "data" / "malformed" / "06_min_count.gkb").read_text()
    diags = gertis.parse_diagnostics(text)
    assert any(line == 6 and col == 12 and "count 3 out of range" in msg for line, col, msg in diags)
