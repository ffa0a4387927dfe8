from ecpcheck.bench import (
    RECORD_HEADER, BenchConfig, format_records_csv, format_summary_csv, make_instance, run, summarize, trend,
)

import pytest


def test_default_cells():
    cells = BenchConfig().cells()
    assert len(cells) == 13
    assert all(l <= c for l, c in cells)
    assert (50, 12) not in cells and (6, 75) in cells


def test_full_sweep_cells():
    cells = BenchConfig(labels=(2, 3), components=(3, 4), full_sweep=True).cells()
    assert cells == [(2, 3), (3, 3), (2, 4), (3, 4)]


def test_single_record():
    r = run(BenchConfig(labels=(6,), components=(12,), samples=1))
    assert len(r.records) == 1 and r.records[0].optimal and r.records[0].wall_ms >= 0
    assert len(r.cells) == 1 and r.max_ms == r.records[0].wall_ms


def test_costs_reproducible_and_order_stable():
    cfg = BenchConfig(labels=(6, 12), components=(12, 25), samples=2, seed=7)
    a, b = run(cfg), run(cfg, workers=2)
    key = lambda r: [(x.n_labels, x.n_components, x.sample, x.cost) for x in r.records]
    assert key(a) == key(b)
    assert len(a.records) == len(cfg.cells()) * cfg.samples
    assert make_instance(cfg, 6, 12, 1) == make_instance(cfg, 6, 12, 1)
    assert make_instance(cfg, 6, 12, 1) != make_instance(cfg, 6, 12, 0)


def test_csv_and_trend():
    r = run(BenchConfig(labels=(6,), components=(12, 25), samples=2))
    lines = format_records_csv(r.records).splitlines()
    assert lines[0] == ",".join(RECORD_HEADER) and len(lines) == 5
    summary = format_summary_csv(r).splitlines()
    assert summary[-1].startswith("all,all,4,")
    assert [k for k, _ in trend(r)] == [12, 25]


def test_invalid_configs():
    for cfg in (BenchConfig(labels=()), BenchConfig(samples=0), BenchConfig(labels=(50,), components=(12,))):
        with pytest.raises(ValueError):
            cfg.validate()


def test_summarize_empty():
    assert summarize([]).max_ms == 0.0
