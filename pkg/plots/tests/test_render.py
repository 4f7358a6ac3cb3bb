import csv
import math

import numpy as np
import pytest

from ris_crs_plots import PlotJob, SchemaError, aggregate, load_rows, render
from ris_crs_plots.cli import main

SWEEP_HEADER = ["strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                "min_rate", "iters_outer", "wall_ms"]
TRACE_HEADER = ["strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                "iteration", "t"]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


def sweep_rows(strategies=("RIS_CRS", "RIS_RSMA"), snrs=(0.0, 10.0),
               trials=3, scale=1.0):
    rows = []
    rng = np.random.default_rng(0)
    for s_i, strat in enumerate(strategies):
        for snr in snrs:
            for trial in range(trials):
                rate = scale * (s_i + 1) * (1 + snr / 10.0) \
                    + 0.01 * rng.standard_normal()
                rows.append([strat, snr, 4, 2, trial, trial, rate, 3, 12.5])
    return rows


def test_missing_column_is_named(tmp_path):
    path = write_csv(tmp_path / "bad.csv", SWEEP_HEADER[:-1],
                     [["RIS_CRS", 0, 4, 2, 0, 0, 1.0, 3]])
    with pytest.raises(SchemaError, match="wall_ms"):
        load_rows(path, "fig3")


def test_empty_body_rejected_and_no_file_written(tmp_path):
    path = write_csv(tmp_path / "empty.csv", SWEEP_HEADER, [])
    out = tmp_path / "fig.png"
    with pytest.raises(SchemaError, match="no data rows"):
        render(PlotJob(csv_path=path, figure_kind="fig3",
                       out_image_path=str(out)))
    assert not out.exists()


def test_aggregation_matches_hand_computation(tmp_path):
    # 10-row sample recomputed independently: 2 strategies x 1 snr x 5 trials
    vals = {"RIS_CRS": [1.0, 1.2, 0.8, 1.1, 0.9],
            "RIS_RSMA": [0.5, 0.55, 0.45, 0.5, 0.5]}
    rows = []
    for strat, ys in vals.items():
        for trial, y in enumerate(ys):
            rows.append([strat, 15.0, 4, 2, trial, trial, y, 2, 1.0])
    path = write_csv(tmp_path / "s.csv", SWEEP_HEADER, rows)
    series = aggregate(load_rows(path, "fig3"), "fig3")
    for strat, ys in vals.items():
        mean = sum(ys) / len(ys)
        var = sum((y - mean) ** 2 for y in ys) / (len(ys) - 1)
        stderr = math.sqrt(var / len(ys))
        assert series[strat]["mean"][0] == pytest.approx(mean, abs=1e-12)
        assert series[strat]["stderr"][0] == pytest.approx(stderr, abs=1e-12)


def test_fig5_single_strategy_single_curve(tmp_path):
    ts = [0.0, 0.8, 1.1, 1.15, 1.16]
    rows = [["RIS_CRS", 15.0, 8, 2, 0, 0, i, t] for i, t in enumerate(ts)]
    path = write_csv(tmp_path / "trace.csv", TRACE_HEADER, rows)
    series = aggregate(load_rows(path, "fig5"), "fig5")
    assert list(series) == ["RIS_CRS"]
    assert np.all(np.diff(series["RIS_CRS"]["mean"]) >= 0)
    out = render(PlotJob(csv_path=path, figure_kind="fig5",
                         out_image_path=str(tmp_path / "fig5.png")))
    assert (tmp_path / "fig5.png").stat().st_size > 0


def test_render_is_idempotent_and_leaves_csv_alone(tmp_path):
    path = write_csv(tmp_path / "s.csv", SWEEP_HEADER, sweep_rows())
    before = open(path, "rb").read()
    out = tmp_path / "fig3.png"
    render(PlotJob(csv_path=path, figure_kind="fig3",
                   out_image_path=str(out)))
    first = out.read_bytes()
    render(PlotJob(csv_path=path, figure_kind="fig3",
                   out_image_path=str(out)))
    assert out.read_bytes() == first
    assert open(path, "rb").read() == before


def test_unknown_strategy_needs_style(tmp_path):
    rows = sweep_rows(strategies=("MYSTERY",))
    path = write_csv(tmp_path / "s.csv", SWEEP_HEADER, rows)
    with pytest.raises(ValueError, match="MYSTERY"):
        render(PlotJob(csv_path=path, figure_kind="fig3",
                       out_image_path=str(tmp_path / "x.png")))


def test_fig4_uses_element_axis(tmp_path):
    rows = []
    for n in (2, 4, 8):
        for trial in range(2):
            rows.append(["RIS_CRS", 15.0, n, 2, trial, trial,
                         1.0 + 0.1 * n, 2, 1.0])
    path = write_csv(tmp_path / "n.csv", SWEEP_HEADER, rows)
    series = aggregate(load_rows(path, "fig4"), "fig4")
    assert list(series["RIS_CRS"]["x"]) == [2.0, 4.0, 8.0]


def test_bad_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="figure kind"):
        PlotJob(csv_path="x.csv", figure_kind="fig9", out_image_path="y.png")


def test_cli_roundtrip(tmp_path, capsys):
    path = write_csv(tmp_path / "s.csv", SWEEP_HEADER, sweep_rows())
    out = tmp_path / "fig3.png"
    rc = main(["--csv", path, "--kind", "fig3", "--out", str(out)])
    assert rc == 0
    assert out.exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_reports_schema_error(tmp_path, capsys):
    path = write_csv(tmp_path / "bad.csv", ["strategy"], [["RIS_CRS"]])
    rc = main(["--csv", path, "--kind", "fig3",
               "--out", str(tmp_path / "x.png")])
    assert rc == 2
    assert "missing column" in capsys.readouterr().err
