from __future__ import annotations

import csv
import io
import itertools
import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import stats_oracle, stats_oracle_fsum

from hybridkex.bench import (
    CSV_HEADER,
    REFERENCE_ACCOUNTING,
    BenchConfig,
    BenchRow,
    account_bytes,
    account_packets,
    check_accounting,
    compute_stats,
    render_report,
    run_bench,
    suite_accounting,
    time_suite,
)
from hybridkex.errors import BenchError
from hybridkex.suites import get_suite, list_suites


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300) if b else abs(a)


@pytest.mark.parametrize(
    "samples,expected",
    [
        ([100, 100, 100], (100.0, 0.0, 100, 100)),
        ([1, 2, 3], (2.0, 1.0, 3, 1)),
    ],
)
def test_compute_stats_examples(samples, expected):
    s = compute_stats(samples)
    assert (s.average_ns, s.std_dev_ns, s.max_ns, s.min_ns) == expected


def test_compute_stats_two_samples():
    s = compute_stats([100, 300])
    assert s.average_ns == 200
    assert s.std_dev_ns == pytest.approx(141.42135623730951, rel=1e-12)


def test_compute_stats_needs_two():
    with pytest.raises(BenchError):
        compute_stats([5])


def test_compute_stats_matches_oracles_on_1000_sets():
    rng = random.Random(77)
    for _ in range(1000):
        n = rng.randrange(2, 300)
        samples = [rng.randrange(1, 10**9) for _ in range(n)]
        s = compute_stats(samples)
        mean, std, mx, mn = stats_oracle(samples)
        mean2, std2 = stats_oracle_fsum(samples)
        assert _rel(s.average_ns, mean) <= 1e-9 and _rel(s.average_ns, mean2) <= 1e-9
        assert _rel(s.std_dev_ns, std) <= 1e-9 and _rel(s.std_dev_ns, std2) <= 1e-9
        assert (s.max_ns, s.min_ns) == (mx, mn)


@given(st.lists(st.integers(0, 10**12), min_size=2, max_size=50))
def test_compute_stats_ordering(samples):
    s = compute_stats(samples)
    assert s.min_ns <= s.average_ns * (1 + 1e-12) and s.average_ns <= s.max_ns * (1 + 1e-12)
    assert s.std_dev_ns >= 0


@pytest.mark.parametrize(
    "label,expected",
    [
        ("X25519-MLKEM768-Draft00", (1216, 1120, 2336)),
        ("X25519-MLKEM1024-Draft00", (1600, 1600, 3200)),
        ("X448-MLKEM768-Draft00", (1240, 1144, 2384)),
    ],
)
def test_account_bytes(label, expected):
    assert account_bytes(label) == expected


def test_account_bytes_override():
    f1, f2, total = account_bytes("X25519-Mceliece-Draft00")
    assert total == 200722 and f1 + f2 != total
    assert suite_accounting(get_suite(10)) == (200722, 139, False)


@pytest.mark.parametrize(
    "flights,mtu,expected", [([1216, 1120], 1500, 2), ([1600, 1600], 1500, 4), ([15680, 15808], 1500, 22)]
)
def test_account_packets(flights, mtu, expected):
    assert account_packets(flights, mtu) == expected


def test_account_packets_rejects_bad_mtu():
    with pytest.raises(ValueError):
        account_packets([1], 0)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 9000), st.integers(1, 9000))
def test_packets_monotone(a, extra, mtu_small, mtu_delta):
    assert account_packets([a], mtu_small) <= account_packets([a + extra], mtu_small)
    assert account_packets([a], mtu_small + mtu_delta) <= account_packets([a], mtu_small)


def test_accounting_matches_table_values():
    results = check_accounting()
    assert results and all(r.ok for r in results)
    for s in list_suites():
        total, packets, verified = suite_accounting(s)
        assert (total, packets) == REFERENCE_ACCOUNTING[s.label][:2]
        assert verified == (not s.unverified)


def test_check_accounting_detects_mismatch(monkeypatch):
    monkeypatch.setitem(REFERENCE_ACCOUNTING, "X25519-MLKE512M-Draft00", (1633, 2, 128, 128))
    bad = [r for r in check_accounting() if not r.ok]
    assert [(r.label, r.column) for r in bad] == [("X25519-MLKE512M-Draft00", "bytes")]


def test_bench_config_validation():
    with pytest.raises(ValueError):
        BenchConfig(iterations=1)
    with pytest.raises(ValueError):
        BenchConfig(mtu=0)
    with pytest.raises(ValueError):
        BenchConfig(output="xml")
    with pytest.raises(LookupError):
        BenchConfig(suites=("nope",)).selected()
    assert [s.id for s in BenchConfig(suites=("X448-MLKEM768-Draft00", "X25519-Kyber768-Draft00")).selected()] == [1, 5]


def test_constant_clock_gives_zero_std():
    ticks = itertools.count(0, 1000)
    samples = time_suite(get_suite(2), 5, 0, clock=lambda: next(ticks))
    assert samples == [1000] * 5
    assert compute_stats(samples).std_dev_ns == 0


def test_backwards_clock_is_an_error():
    ticks = iter([10, 5])
    with pytest.raises(BenchError):
        time_suite(get_suite(2), 1, 0, clock=lambda: next(ticks))


def test_run_bench_small():
    rows = run_bench(BenchConfig(iterations=2, warmup=0, suites=("X25519-MLKE512M-Draft00", "X25519-Mceliece-Draft00")))
    assert [r.label for r in rows] == ["X25519-MLKE512M-Draft00", "X25519-Mceliece-Draft00"]
    assert rows[1].verified_accounting is False and rows[0].verified_accounting is True
    assert (rows[0].strength_pqc, rows[0].strength_classical) == (128, 128)
    for r in rows:
        assert r.timing.min_ns <= r.timing.average_ns <= r.timing.max_ns
        assert r.timing.iterations == 2


def _rows():
    from hybridkex.bench import TimingStats

    return [
        BenchRow(s.label, TimingStats(1000.5, 2.25, 1003, 998, 2), *suite_accounting(s)[:2],
                 s.strength_pqc_bits, s.strength_classical_bits, not s.unverified)
        for s in list_suites()
    ]


def test_render_csv_header_and_rows():
    text = render_report(_rows(), "csv")
    lines = list(csv.reader(io.StringIO(text)))
    assert lines[0] == CSV_HEADER
    assert ",".join(lines[0]) == "function,avg_ns,std_ns,max_ns,min_ns,bytes,packets,pqc_bits,classical_bits,verified"
    assert len(lines) == 11
    row = dict(zip(lines[0], lines[2]))
    assert (row["function"], row["pqc_bits"], row["classical_bits"]) == ("X25519-MLKE512M-Draft00", "128", "128")
    assert lines[-1][-1] == "false"


def test_render_json_and_round_trip():
    rows = _rows()
    data = json.loads(render_report(rows, "json"))
    assert len(data) == 10 and set(data[0]) == set(CSV_HEADER)
    back = [BenchRow.from_json(o) for o in data]
    assert render_report(back, "csv") == render_report(rows, "csv")


def test_render_table_and_errors():
    text = render_report(_rows(), "table")
    assert "X25519-Mceliece-Draft00" in text and "no (copied)" in text
    assert len(text.strip().splitlines()) == 12
    with pytest.raises(BenchError):
        render_report(_rows(), "xml")
    with pytest.raises(BenchError):
        render_report([], "csv")
