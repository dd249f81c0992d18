import json
import math

import pytest

import twophase_torsion as tt


def test_closed_forms():
    g = tt.BallGeometry(2, 0.5)
    assert tt.torsional_rigidity_concentric(g, tt.Medium(1, 1)) == pytest.approx(math.pi / 8, rel=1e-15)
    assert tt.q_volume(g, tt.Medium(2, 1), 1) == pytest.approx(-1 / 11, rel=1e-14)
    assert tt.b_coefficient(g, tt.Medium(2, 1), 1) == pytest.approx(-5 / 44, rel=1e-14)
    b, c, d = tt.solve_mode_coefficients(g, tt.Medium(2, 1), 1)
    assert b == pytest.approx(-5 / 44, rel=1e-13)
    assert c == pytest.approx(-d)
    assert tt.harmonic_multiplicity(3, 2) == 5
    assert tt.stress_function(g, tt.Medium(1, 1), 1.0) == 0.0


def test_classification():
    g = tt.BallGeometry(2, 0.5)
    assert tt.classify(g, tt.Medium(2, 1)) == ("LocalMaximizer", None)
    assert tt.classify(g, tt.Medium(1, 2)) == ("Saddle", 3)
    verdict, mode = tt.classify(g, tt.Medium(2, 1), "perimeter")
    assert verdict == "Saddle" and mode >= 2


def test_errors():
    with pytest.raises(ValueError):
        tt.BallGeometry(2, 1.5)
    with pytest.raises(tt.DomainError):
        tt.Medium(-1, 1)
    with pytest.raises(ValueError):
        tt.classify(tt.BallGeometry(2, 0.5), tt.Medium(2, 1), "area")


def test_qcurve_payload():
    rows = tt.qcurve(kmax=10)
    assert [r["k"] for r in rows] == list(range(1, 11))
    qv = [r["q_volume"] for r in rows]
    assert all(a > b for a, b in zip(qv, qv[1:]))
    assert rows[0]["q_volume"] == rows[0]["q_perimeter"]
    assert tt._core.cmd_qcurve(kmax=5) == tt._core.cmd_qcurve(kmax=5)
    flat = tt.qcurve(sigma_in=1.0, sigma_out=1.0, kmax=4)
    assert all(r["q_volume"] == 0 and r["q_perimeter"] == 0 for r in flat)


def test_sweep_and_report():
    cells = tt.sweep()
    assert len(cells) == 100
    assert all((c["verdict"] == "LocalMaximizer") == (c["rho"] > 1) for c in cells)
    rep = tt.classify_report(sigma_in=1.0, sigma_out=2.0)
    assert rep["verdict"] == "Saddle" and rep["critical_mode"] == 3
    payload = json.loads(tt._core.cmd_classify())
    assert set(payload) == {"command", "config", "result"}


def test_radial():
    g = tt.BallGeometry(3, 0.4)
    m = tt.Medium(0.5, 1.0)
    sol = tt.solve_radial(g, m, 4096)
    assert sol["max_relative_error"] < 1e-6
    assert sol["values"][-1] == 0.0
    assert tt.extrapolated_energy(g, m) == pytest.approx(tt.torsional_rigidity_concentric(g, m), rel=1e-8)


def test_fem_estimate():
    g = tt.BallGeometry(2, 0.5)
    est = tt.estimate_q(g, tt.Medium(2, 1), 2, h=0.04)
    assert len(est["levels"]) == 2
    assert est["q_estimate"] == pytest.approx(est["q_analytic"], rel=0.05)
    assert est["q_analytic"] == tt.q_volume(g, tt.Medium(2, 1), 2)
    with pytest.raises(ValueError):
        tt.estimate_q(g, tt.Medium(2, 1), 2, h=0.04, t_samples=[0.0, 0.01, 0.02])
