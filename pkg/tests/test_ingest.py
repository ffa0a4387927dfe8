import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecpcheck.aspbridge import emit_facts
from ecpcheck.ingest import (
    ParseError, format_layout, format_score, parse_detections, parse_facts, parse_layout, parse_score,
)
from ecpcheck.model import LayoutError
from ecpcheck.topology import Between, ManhattanFact, build_relations, normalize_instance
from helpers import CAD, NET, perturbed_instance, scatter_instance

MINIMAL = "canvas 320 320\nmembership cad\ncomponent 1 relay 0 0 10 10\n"


def test_parse_minimal_layout():
    l = parse_layout(MINIMAL)
    assert l.canvas == (320, 320) and l.membership is CAD
    assert [(c.id, c.label, c.bbox.as_tuple()) for c in l] == [(1, "relay", (0, 0, 10, 10))]


def test_layout_round_trip_with_scores_and_comments():
    text = ("# header\ncanvas 100 50\nmembership net\n"
            "component 4 fuse 1 2 3 4 0.25   # trailing\ncomponent 2 relay 5 5 9 9 1/3\n")
    l = parse_layout(text)
    assert l.by_id()[4].score == Fraction(1, 4) and l.by_id()[2].score == Fraction(1, 3)
    assert parse_layout(format_layout(l)) == l


def test_duplicate_id_rejected():
    with pytest.raises(LayoutError, match="duplicate id"):
        parse_layout(MINIMAL + "component 1 fuse 20 0 30 10\n")


def test_degenerate_box_rejected():
    with pytest.raises(LayoutError, match="degenerate box"):
        parse_layout("canvas 320 320\nmembership cad\ncomponent 1 relay 10 0 5 10\n")


@pytest.mark.parametrize("text,fragment", [
    ("canvas 10 10\nmembership cad\ncomponent 1 relay 0 0 2.5 4\n", "fractional"),
    ("canvas 10 10\nmembership cad\ncomponent 1 relay 0 0 x 4\n", "expected integer"),
    ("canvas 10 10\nmembership foo\n", "unknown membership"),
    ("membership cad\n", "missing canvas"),
    ("canvas 10 10\n", "missing membership"),
    ("canvas 10 10\nmembership cad\nwidget 1\n", "unknown record"),
])
def test_layout_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_layout(text)


def test_parse_error_reports_line_and_field():
    with pytest.raises(ParseError) as e:
        parse_layout("canvas 10 10\nmembership cad\ncomponent 1 relay 0 0 2.5 4\n")
    assert e.value.line == 3 and e.value.field == "x2"


DETECTIONS = ("canvas 100 100\n"
              "detection relay 0 0 10 10 0.9\n"
              "detection relay 20 0 30 10 0.6\n"
              "detection fuse 40 0 50 10 0.3\n")


def test_detections_threshold():
    assert len(parse_detections(DETECTIONS, Fraction(1, 2))) == 2
    assert len(parse_detections(DETECTIONS, 0)) == 3
    assert len(parse_detections(DETECTIONS, 1)) == 0


def test_detection_ids_follow_file_order_before_filtering():
    l = parse_detections(DETECTIONS.replace("0.9", "0.1"), Fraction(1, 2))
    assert l.ids == [2] and l.membership is NET


def test_detection_score_errors():
    with pytest.raises(ParseError):
        parse_detections("canvas 10 10\ndetection relay 0 0 5 5 1.5\n")
    with pytest.raises(ValueError):
        parse_detections(DETECTIONS, Fraction(2))


@given(st.lists(st.integers(0, 100), min_size=1, max_size=10), st.integers(0, 100), st.integers(0, 100))
def test_detection_filter_monotone(scores, a, b):
    text = "canvas 100 100\n" + "".join(f"detection x 0 0 5 5 {s / 100}\n" for s in scores)
    lo, hi = sorted((Fraction(a, 100), Fraction(b, 100)))
    assert set(parse_detections(text, hi).ids) <= set(parse_detections(text, lo).ids)


@given(st.fractions(min_value=0, max_value=1, max_denominator=2000))
def test_score_format_round_trip(s):
    assert parse_score(format_score(s)) == s


def test_score_format_examples():
    assert [format_score(Fraction(x)) for x in ("1/2", "1/3", "0", "1", "7/40")] == ["0.5", "1/3", "0", "1", "0.175"]


def test_object_fact():
    fs = parse_facts('object("relay",1,0,0,10,10,"cad").\n')
    assert len(fs.instance.cad) == 1 and len(fs.instance.net) == 0
    assert fs.between is None and fs.manhattan is None


@pytest.mark.parametrize("text,fragment", [
    ('object("relay",1,0,0,10,10,"xyz").', "unknown membership"),
    ('object("relay",1,0,0,10).', "arity mismatch"),
    ('object("relay",1,0,0,10,10,"cad")', "syntax error at offset 0"),
    ('\nfoo(1).', "unknown predicate"),
    ('between(1,none,2,"d","cad").', "unknown direction"),
])
def test_fact_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_facts(text)


def test_explicit_relations_are_honored():
    text = ('object("a",1,0,0,10,10,"cad").\nobject("a",2,0,50,10,60,"cad").\n'
            'object("a",5,0,0,10,10,"net").\n'
            'between(1,none,2,"h","cad").\n'
            'manhattan(1,5,7,"cad","net").\n')
    fs = parse_facts(text)
    rg = fs.relations(1000)
    assert rg.between == {Between(1, None, 2, "h", CAD)}
    assert rg.manhattan == {ManhattanFact(1, 5, 7)}


def test_missing_relation_kinds_are_computed():
    text = 'object("a",1,0,0,10,10,"cad").\nobject("a",5,0,0,10,10,"net").\n'
    assert parse_facts(text).relations(1000).manhattan == {ManhattanFact(1, 5, 0)}


def test_canvas_inference_and_borrowing():
    fs = parse_facts('canvas(40,30,"cad").\nobject("a",1,0,0,10,10,"cad").\n')
    assert fs.instance.cad.canvas == (40, 30) and fs.instance.net.canvas == (40, 30)
    fs = parse_facts('object("a",1,0,0,12,9,"cad").\n')
    assert fs.instance.cad.canvas == (12, 9)


@given(st.integers(0, 2**32 - 1))
def test_fact_round_trip(seed):
    rng = random.Random(seed)
    inst = normalize_instance(scatter_instance(rng) if seed % 2 else perturbed_instance(rng))
    rg = build_relations(inst)
    text = emit_facts(inst, rg)
    fs = parse_facts(text)
    assert emit_facts(fs.instance, fs.relations()) == text
    if len(inst.cad) and len(inst.net):
        assert fs.instance == inst
