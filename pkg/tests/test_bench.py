import math

import pytest

from cascade.bench.harness import (CSV_HEADER, BenchConfig, BenchRow, bench_fileplugin,
                                   check_ordering, rows_to_csv, rows_to_json)
from cascade.errors import UserError


def test_config_validation():
    with pytest.raises(UserError):
        BenchConfig(runs=1)
    with pytest.raises(UserError):
        BenchConfig(points=())
    with pytest.raises(UserError):
        BenchConfig(points=(0,))
    with pytest.raises(UserError):
        BenchConfig(n=0)
    assert BenchConfig(experiment="fileplugin", points=(0,)).points == (0,)


def test_csv_header_is_stable():
    rows = [BenchRow("unmodified", 10, 1.0, 0.1, 1.0, note="x")]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == CSV_HEADER == "config,point,mean_ms,stddev_ms,relative"
    assert text.splitlines()[1] == "unmodified,10,1.000000,0.100000,1.0000"
    assert rows_to_csv([]).splitlines() == [CSV_HEADER]
    assert '"note": "x"' in rows_to_json(rows)


def test_ordering_check_reports_violations():
    def row(c, m):
        return BenchRow(c, 1000, m, 0, 0)
    good = [row("unmodified", 1), row("waterfall-plain", 3), row("waterfall-instrumented", 3.1),
            row("reflective-unsafe", 30), row("reflective-safe", 35)]
    assert check_ordering(good) == []
    bad = [row("unmodified", 1), row("waterfall-plain", 3), row("waterfall-instrumented", 5),
           row("reflective-unsafe", 4), row("reflective-safe", 6)]
    problems = check_ordering(bad)
    assert len(problems) == 3


def test_zero_directory_point_still_emits_rows():
    rows = bench_fileplugin(BenchConfig(experiment="fileplugin", points=(0,), runs=2, filesystem="memory"))
    assert [r.config for r in rows] == ["direct", "compiled"]
    assert all(r.mean_ms >= 0 and not r.note for r in rows)


def test_unusable_root_is_annotated(tmp_path):
    # a regular file as root makes every run directory fail, even for root
    root = tmp_path / "plain-file"
    root.write_text("")
    rows = bench_fileplugin(BenchConfig(experiment="fileplugin", points=(2,), runs=2, root=str(root)))
    assert all(r.note.startswith("io-error") for r in rows)


def test_relative_is_mean_over_baseline():
    rows = bench_fileplugin(BenchConfig(experiment="fileplugin", points=(3,), runs=3, filesystem="memory"))
    base, other = rows
    assert base.relative == 1.0
    assert math.isclose(other.relative, other.mean_ms / base.mean_ms)


def test_first_call_time_is_a_comment_line():
    rows = [BenchRow("direct", 0, 1.0, 0.0, 1.0, first_call_ms=2.5),
            BenchRow("direct", 5, 1.0, 0.0, 1.0, first_call_ms=2.5)]
    lines = rows_to_csv(rows).splitlines()
    assert lines[0] == CSV_HEADER
    assert lines.count("# first_call_ms direct: 2.500000") == 1
