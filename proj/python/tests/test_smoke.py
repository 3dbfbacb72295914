import json
import math

import numpy as np
import pytest

import hjmrw

VASICEK = """
grid: {dt: 0.01, horizon_t: 0.5, horizon_xi: 6}
n_paths: 200
maturities: [1, 2, 5]
model:
  m: 1
  volatility: {scale: [[0.01], [0.012]], decay: [-1.0, -0.8]}
  market: {lambda: [0.2]}
  spots: [{a: 0, b: [0]}, {a: 0, b: [0.1]}]
"""


def test_curve_roundtrip():
    c = hjmrw.Curve(0.03, [0.0] * 101, 0.01)
    assert c.horizon == pytest.approx(1.0)
    assert np.allclose(c.values, 0.03)
    assert c.integrate(0.5) == pytest.approx(0.015)
    assert c.norm(1.0) == pytest.approx(0.03)


def test_space_constants():
    c_rho, c_rr, k_rr = hjmrw.space_constants(1.0, 2.0)
    assert c_rho == pytest.approx(2.0)
    assert c_rr == pytest.approx(1 / math.sqrt(2))
    assert hjmrw.v_k(1.0, hjmrw.w_k_inverse(1.0, 10.0)) == pytest.approx(10.0, abs=1e-10)


def test_config_errors_surface():
    with pytest.raises(hjmrw.ConfigError, match="grid contract violated"):
        hjmrw.parse_scenario("grid: {dt: 0.01, dxi: 0.02, horizon_t: 1, horizon_xi: 3}\n")


def test_verify_drift_report():
    s = hjmrw.parse_scenario(VASICEK)
    r = hjmrw.run_command(s, "verify-drift")
    assert r["passed"]
    assert r["report"]["schema"] == "hjm-report/1"
    assert r["report"]["max_residual"] < 1e-6
    assert r["tables"]["residuals"].startswith("t,T,index,residual")


def test_simulate_arrays_and_determinism():
    s = hjmrw.parse_scenario(VASICEK)
    a = hjmrw.simulate(s)
    s.threads = 3
    b = hjmrw.simulate(s)
    assert a["spots"].shape == (200, len(a["times"]), 2)
    assert a["bonds"].shape == (200, len(a["times"]), 2, 3)
    assert np.array_equal(a["bonds"], b["bonds"], equal_nan=True)
    assert np.all(a["bonds"][:, 0, :, :] < 1.0)


def test_mmm_gap_closed_form():
    p = hjmrw.MmmParams()
    assert hjmrw.mprc_complement(p, 0.0, 1.0, 1.0) == pytest.approx(math.exp(-1 / (2 * hjmrw.phi_time(p, 1.0))))
    e = hjmrw.expected_ratio(p, 0.0, 10.0, 4000, 0.01, seed=1)
    assert e["within_3se"]


def test_run_writes_manifest(tmp_path):
    s = hjmrw.parse_scenario(VASICEK)
    s.output_dir = str(tmp_path)
    code, manifest = hjmrw.run(s, ["verify-drift"])
    assert code == 0
    assert manifest["schema"] == "hjm-manifest/1"
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk == manifest
