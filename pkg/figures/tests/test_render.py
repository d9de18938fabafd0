"""Acceptance tests for the figure renderer.

These consume only the committed reference CSVs (produced once by the
``nvspin sweep`` CLI) and never import the physics package.
"""

import pathlib

import pytest

from nvfigures import EmptySeries, FigureSpec, MissingColumn, render
from nvfigures.cli import main as cli_main
from nvfigures.render import REQUIRED_COLUMNS, load_csv

REFERENCE = pathlib.Path(__file__).resolve().parents[1] / "reference"

HEADER = ",".join(REQUIRED_COLUMNS)


def _report(detail):
    print(f"\ncriterion 12: PASS - {detail}")


def test_reference_csvs_are_committed():
    for fig in ("fig2", "fig3", "fig4", "fig5"):
        path = REFERENCE / f"{fig}.csv"
        assert path.is_file(), f"missing reference CSV {path}"
        assert (REFERENCE / f"{fig}.yaml").is_file()
        assert load_csv(path), f"reference CSV {path} has no data rows"


def test_render_all_reference_figures_deterministically(tmp_path):
    for fig in ("fig2", "fig3", "fig4", "fig5"):
        csv_path = str(REFERENCE / f"{fig}.csv")
        out_a = tmp_path / f"{fig}_a.png"
        out_b = tmp_path / f"{fig}_b.png"
        render(FigureSpec(csv=csv_path, figure=fig, out=str(out_a)))
        render(FigureSpec(csv=csv_path, figure=fig, out=str(out_b)))
        data = out_a.read_bytes()
        assert data, f"{fig} produced an empty image"
        assert data == out_b.read_bytes(), \
            f"{fig} renders are not byte-identical"
    _report("fig2-fig5 analogues regenerate byte-identically from the "
            "committed reference CSVs")


def test_render_svg_deterministically(tmp_path):
    csv_path = str(REFERENCE / "fig3.csv")
    out_a = tmp_path / "a.svg"
    out_b = tmp_path / "b.svg"
    render(FigureSpec(csv=csv_path, figure="fig3", out=str(out_a)))
    render(FigureSpec(csv=csv_path, figure="fig3", out=str(out_b)))
    text = out_a.read_text()
    assert text == out_b.read_text()
    assert "dc:date" not in text


def test_missing_column_raises(tmp_path):
    cols = [c for c in REQUIRED_COLUMNS if c != "gamma_phi"]
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(cols) + "\n" + ",".join("0" for _ in cols) + "\n")
    with pytest.raises(MissingColumn) as err:
        render(FigureSpec(csv=str(bad), figure="fig2",
                          out=str(tmp_path / "x.png")))
    assert err.value.column == "gamma_phi"


def test_empty_series_raises(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# units: none\n" + HEADER + "\n")
    with pytest.raises(EmptySeries):
        render(FigureSpec(csv=str(empty), figure="fig2",
                          out=str(tmp_path / "x.png")))
    # rows present but every plotted cell empty
    hollow = tmp_path / "hollow.csv"
    hollow.write_text(
        HEADER + "\n" + "R,1.0,analytic,,,,,,,,,,,failed:Error\n")
    with pytest.raises(EmptySeries):
        render(FigureSpec(csv=str(hollow), figure="fig2",
                          out=str(tmp_path / "x.png")))


def test_single_engine_csv_renders(tmp_path):
    rows = [HEADER]
    for r in (1.0, 10.0, 100.0):
        rows.append(f"R,{r},analytic,0.1,0.01,0.01,50.0,8.0,1.0,"
                    "0.05,0.05,0.01,0.01,")
    solo = tmp_path / "solo.csv"
    solo.write_text("\n".join(rows) + "\n")
    out = tmp_path / "solo.png"
    render(FigureSpec(csv=str(solo), figure="fig2", out=str(out)))
    assert out.stat().st_size > 0


def test_unknown_figure_id_rejected(tmp_path):
    with pytest.raises(Exception, match="fig9"):
        FigureSpec(csv="x.csv", figure="fig9", out="x.png")


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "cli.png"
    assert cli_main(["--csv", str(REFERENCE / "fig4.csv"),
                     "--figure", "fig4", "--out", str(out)]) == 0
    assert out.stat().st_size > 0
    assert cli_main(["--csv", str(tmp_path / "nope.csv"),
                     "--figure", "fig4", "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("sweep_name,engine\nR,analytic\n")
    assert cli_main(["--csv", str(bad), "--figure", "fig4",
                     "--out", str(out)]) == 2
    assert "missing required CSV column" in capsys.readouterr().err
