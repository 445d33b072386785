import json
import math

import pytest

from stochvis.cli import main
from stochvis.harness import (CSV_HEADER, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_PRECISION,
                              ConfigError, RunConfig, SweepRow, read_rows, rows_to_csv,
                              run_sweep, verify_bounds)

SMALL = dict(model="boolean", d=2, alpha=0.1, rho=1.0, r=(4.0, 6.0, 8.0), n=400, seed=5)


def rows_with_ratios(ratios, rel_se=0.01):
    out = []
    for i, q in enumerate(ratios):
        out.append(SweepRow("boolean", 2, 0.1, "1", 4.0 + i, 1000, f_analytic=0.5,
                            pvis_hat=0.5, pvis_se=0.5 * rel_se, ratio=q, ratio_lo=q, ratio_hi=q))
    return out


# --- configuration ----------------------------------------------------------------


@pytest.mark.parametrize("bad", [
    dict(model="poisson"), dict(r=(8.0, 4.0)), dict(r=()), dict(r=(-1.0,)), dict(n=0),
    dict(threads=0), dict(format="xml"), dict(alpha=-0.1), dict(rho=-1.0),
    dict(model="interlacements", d=2), dict(model="interlacements", d=3, r=(1.0, 4.0)),
    dict(band=0.5), dict(resolution=0.0), dict(step=0.0),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig(**{**SMALL, **bad})


def test_config_json_roundtrip_and_override(tmp_path):
    cfg = RunConfig(**SMALL)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = RunConfig.from_json(path)
    assert again == cfg
    assert again.override(seed=9, n=None).seed == 9 and again.override(n=None).n == 400
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**cfg.to_dict(), "colour": "red"})
    with pytest.raises(ConfigError):
        RunConfig.from_json(tmp_path / "missing.json")


def test_radius_law_config():
    cfg = RunConfig(**{**SMALL, "radius_law": {"kind": "discrete", "values": [0.5, 1.5],
                                              "probs": [0.5, 0.5]}})
    assert cfg.params().rho_max == 1.5
    assert cfg.window(4.0).margin == 1.5


# --- sweeps -------------------------------------------------------------------------


@pytest.mark.parametrize("model,d,r", [("boolean", 2, (3.0, 5.0)), ("cylinders", 3, (3.0, 5.0)),
                                       ("boolean", 3, (3.0, 5.0))])
def test_alpha_zero_sweep_ratio(model, d, r):
    res = run_sweep(RunConfig(model=model, d=d, alpha=0.0, r=r, n=50))
    for row in res.rows:
        assert row.f_hat == row.pvis_hat == 1.0
        assert row.ratio == pytest.approx((row.delta_r / row.r) ** (d - 1))


def test_sweep_rows_and_csv_are_deterministic():
    a = run_sweep(RunConfig(**SMALL))
    b = run_sweep(RunConfig(**{**SMALL, "threads": 2}))
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == ",".join(CSV_HEADER)
    assert all(row.wall_ms == 0.0 for row in a.rows)
    for row in a.rows:
        assert row.f_analytic == pytest.approx(math.exp(-0.1 * (math.pi + 2 * row.r)))
        assert row.pvis_hat >= row.f_hat
        assert row.ratio_lo <= row.ratio <= row.ratio_hi


def test_sweep_timing_flag():
    res = run_sweep(RunConfig(**{**SMALL, "timing": True, "r": (4.0,)}))
    assert res.rows[0].wall_ms > 0


def test_sweep_records_failures_and_continues():
    # alpha so large that f underflows: the ratio cannot be formed
    res = run_sweep(RunConfig(model="cylinders", d=2, alpha=400.0, r=(1.0, 2.0), n=20))
    assert all(row.failed for row in res.rows)
    assert all(row.error for row in res.rows)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_result_files_roundtrip(fmt, tmp_path):
    res = run_sweep(RunConfig(**SMALL))
    path = tmp_path / f"sweep.{fmt}"
    res.write(path, fmt)
    rows = read_rows(path)
    assert rows_to_csv(rows) == res.to_csv()


# --- verification -----------------------------------------------------------------


def test_verify_constant_ratio():
    rep = verify_bounds(rows_with_ratios([0.7] * 4), 1.0 + 1e-9)
    assert rep.status == "PASS" and rep.achieved == pytest.approx(1.0)
    assert rep.exit_code == EXIT_OK


def test_verify_band_examples():
    rows = rows_with_ratios([1.0, 2.0, 2.5])
    assert verify_bounds(rows, 3.0).status == "PASS"
    rep = verify_bounds(rows, 2.0)
    assert rep.status == "FAIL" and rep.achieved == pytest.approx(2.5)
    assert rep.exit_code == EXIT_FAIL


def test_verify_needs_three_precise_rows():
    rows = rows_with_ratios([1.0, 1.1]) + rows_with_ratios([1.0], rel_se=0.5)
    rep = verify_bounds(rows, 3.0)
    assert rep.status == "INSUFFICIENT" and rep.exit_code == EXIT_PRECISION


def test_verify_uses_pessimistic_brackets():
    rows = rows_with_ratios([1.0, 1.0, 1.0])
    rows[0].ratio_lo, rows[1].ratio_hi = 0.5, 1.6
    assert verify_bounds(rows, 3.0).achieved == pytest.approx(3.2)


# --- command line -------------------------------------------------------------------


def cli_args(*extra):
    return ["--model", "boolean", "--dim", "2", "--alpha", "0.1", "--rho", "1",
            "--r", "4,6,8", "--samples", "300", "--seed", "1", *extra]


def test_cli_analytic(capsys):
    assert main(["analytic", *cli_args()]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("model,d,alpha,rho_spec,r,f_analytic,delta_r")
    assert len(lines) == 4


def test_cli_sweep_then_verify(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", *cli_args("--out", str(out))]) == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    code = main(["verify", "--input", str(out), "--band", "50"])
    assert code == EXIT_OK and capsys.readouterr().out.startswith("PASS")
    assert main(["verify", "--input", str(out), "--band", "1"]) == EXIT_FAIL


def test_cli_verify_insufficient(tmp_path):
    out = tmp_path / "s.csv"
    out.write_text(rows_to_csv(rows_with_ratios([1.0, 1.0])))
    assert main(["verify", "--input", str(out)]) == EXIT_PRECISION


def test_cli_f_pvis_json(capsys):
    assert main(["f", *cli_args("--format", "json")]) == EXIT_OK
    recs = json.loads(capsys.readouterr().out)
    assert [rec["r"] for rec in recs] == [4.0, 6.0, 8.0]
    assert main(["pvis", *cli_args()]) == EXIT_OK
    assert "pvis_hat" in capsys.readouterr().out


def test_cli_capacity(capsys):
    code = main(["capacity", "--shape", "ball", "--dim", "3", "--r", "1", "--samples", "2000"])
    assert code == EXIT_OK
    rec = capsys.readouterr().out.splitlines()[1].split(",")
    cap_hat, cap_se, exact = float(rec[5]), float(rec[6]), float(rec[8])
    assert abs(cap_hat - exact) <= 4 * cap_se
    assert main(["capacity", "--dim", "2"]) == EXIT_CONFIG


def test_cli_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "cylinders", "d": 2, "r": [2, 3]}))
    assert main(["analytic", "--config", str(cfg), "--alpha", "0.2"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("cylinders,2,0.2,")


@pytest.mark.parametrize("argv", [
    ["sweep", "--model", "poisson"],
    ["sweep", "--r", "8,4"],
    ["sweep", "--samples", "ten"],
    ["analytic", "--config", "/nonexistent.json"],
    ["verify", "--input", "/nonexistent.csv"],
    ["frobnicate"],
])
def test_cli_config_errors_exit_1(argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_CONFIG


def test_cli_capacity_csv_has_plain_numbers(capsys):
    assert main(["capacity", "--dim", "3", "--rho", "1", "--r", "4", "--samples", "500"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "np." not in out
    float(out.splitlines()[1].split(",")[5])


def test_numpy_scalars_in_rows_format_plainly():
    import numpy as np
    row = rows_with_ratios([1.0])[0]
    row.ratio = np.float64(0.25)
    assert rows_to_csv([row]).splitlines()[1].split(",")[13] == "0.25"
