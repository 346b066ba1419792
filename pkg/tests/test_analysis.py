import csv
import math

import pytest
from scipy.integrate import quad

import vortex_plateau.analysis as analysis
from vortex_plateau.analysis import (
    CSV_COLUMNS,
    BracketError,
    SweepError,
    ac_part,
    sweep,
    threshold_bisect,
    vortex_relaxed_area,
)

N = 12


@pytest.mark.parametrize("l", [0.1, 0.5, 1.0, 3.0])
def test_ac_part_matches_quadrature(l):
    ref, _ = quad(lambda r: 2 * math.pi * math.sqrt(1 + r * r), 0, l, epsabs=1e-13, epsrel=1e-13)
    assert ac_part(l) == pytest.approx(ref, abs=1e-10)


def test_ac_part_unit_disc():
    assert ac_part(1.0) == pytest.approx(math.pi * (math.sqrt(2) + math.asinh(1)), abs=1e-14)
    assert round(ac_part(1.0), 3) == 7.212


def test_vortex_assembly_bounds():
    for l in (0.05, 0.3, 2.0):
        v = vortex_relaxed_area(l, n1=N, n2=N)
        assert v.singular_part <= math.pi + 1e-9
        assert v.total == pytest.approx(v.ac_part + v.singular_part)
        assert v.total <= v.ac_part + math.pi + 1e-9
    small = vortex_relaxed_area(0.05, n1=N, n2=N)
    assert small.singular_part <= 2 * math.pi * 0.05 + 1e-3
    with pytest.raises(ValueError):
        vortex_relaxed_area(-1.0)


def test_single_step_sweep(tmp_path):
    recs = sweep(0.2, 0.2, 1, n1=N, n2=N, out=tmp_path / "s.csv")
    assert len(recs) == 1 and recs[0].l == 0.2
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 2


def test_sweep_bounds_and_flag_pattern(tmp_path):
    recs = sweep(0.1, 1.0, 4, n1=N, n2=N, out=tmp_path / "s.csv")
    for r in recs:
        assert r.value <= min(2 * math.pi * r.l, math.pi) + 1e-3
        assert r.value <= math.pi + 1e-9
    flags = [r.degenerate for r in recs]
    assert flags == sorted(flags)
    assert flags[0] is False and flags[-1] is True


def test_sweep_csv_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    sweep(0.2, 0.4, 2, n1=N, n2=N, out=a, timing=False)
    sweep(0.2, 0.4, 2, n1=N, n2=N, out=b, timing=False)
    assert a.read_bytes() == b.read_bytes()


def test_sweep_keeps_partial_results(tmp_path, monkeypatch):
    real = analysis.minimize_over_profiles
    calls = []

    def flaky(l, *args, **kwargs):
        calls.append(l)
        if len(calls) == 2:
            raise RuntimeError("boom")
        return real(l, *args, **kwargs)

    monkeypatch.setattr(analysis, "minimize_over_profiles", flaky)
    out = tmp_path / "p.csv"
    with pytest.raises(SweepError) as err:
        sweep(0.2, 0.4, 3, n1=N, n2=N, out=out)
    assert len(err.value.records) == 1
    assert len(out.read_text().splitlines()) == 2


def test_sweep_argument_checks():
    with pytest.raises(ValueError):
        sweep(0.5, 0.1, 3)
    with pytest.raises(ValueError):
        sweep(0.1, 0.5, 0)


def test_threshold_small_grid():
    res = threshold_bisect(0.5, 1.5, 0.02, n1=N, n2=N)
    assert res.width <= 0.02
    assert res.lo >= 0.5 and res.midpoint > 0.5
    assert res.lo < res.midpoint < res.hi
    assert not res.evaluations[0].degenerate and res.evaluations[1].degenerate


def test_threshold_bad_brackets():
    with pytest.raises(BracketError):
        threshold_bisect(2.0, 3.0, 0.5, n1=N, n2=N)
    with pytest.raises(BracketError):
        threshold_bisect(0.2, 0.3, 0.05, n1=N, n2=N)
    with pytest.raises(BracketError):
        threshold_bisect(0.5, 0.4, 0.05)
