import csv
import json

import numpy as np
import pytest

from swar import EstimatorConfig, fit, sif_rho
from swar.cli import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, load_csv, main
from swar.exceptions import MissingResponse, NonNumericCell, ParseError
from swar.slicing import Dataset


def _write_csv(path, X, y, names=None):
    names = names or [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + names)
        for i in range(len(y)):
            w.writerow([repr(float(y[i]))] + [repr(float(v)) for v in X[i]])
    return path


@pytest.fixture
def wide(tmp_path):
    """45 x 9 positive, skewed response resembling a price index."""
    rng = np.random.default_rng(21)
    X = rng.standard_normal((45, 9))
    y = np.exp(0.8 * X[:, 0] - 0.5 * X[:, 1] + 0.2 * rng.standard_normal(45))
    return _write_csv(tmp_path / "wide.csv", X, y), X, y


class TestLoadCsv:
    def test_small_file(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n")
        data, names = load_csv(f)
        assert (data.n, data.p) == (3, 2) and names == ["x1", "x2"]
        assert np.array_equal(data.y, [1, 4, 7]) and np.array_equal(data.X[:, 1], [3, 6, 9])

    def test_response_not_first(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("a,price,b\n1,2,3\n4,5,6\n")
        data, names = load_csv(f, "price")
        assert names == ["a", "b"] and np.array_equal(data.y, [2, 5])

    def test_nan_cell(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("y,x1\n1,2\n3,NaN\n")
        with pytest.raises(NonNumericCell) as err:
            load_csv(f)
        assert err.value.row == 2 and err.value.column == "x1"

    def test_text_cell(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("y,x1\nabc,2\n")
        with pytest.raises(NonNumericCell) as err:
            load_csv(f)
        assert err.value.row == 1 and err.value.column == "y"

    def test_missing_response(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("a,b\n1,2\n")
        with pytest.raises(MissingResponse):
            load_csv(f)

    def test_ragged_row(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("y,x1\n1,2\n3\n")
        with pytest.raises(ParseError) as err:
            load_csv(f)
        assert err.value.row == 2

    def test_empty_and_header_only(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("")
        with pytest.raises(ParseError):
            load_csv(f)
        f.write_text("y,x1\n")
        with pytest.raises(ParseError):
            load_csv(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv")


class TestFit:
    def test_report_round_trip(self, wide, tmp_path):
        path, X, y = wide
        out = tmp_path / "fit.json"
        assert main(["fit", "--data", str(path), "--method", "swar", "--h", "2", "--k", "2",
                     "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        basis = fit(Dataset(X, y), EstimatorConfig("swar", 2, 2))
        assert np.array_equal(np.array(rep["directions"]).T, basis.directions)
        assert np.array_equal(rep["eigenvalues"], basis.eigenvalues)
        D = np.array(rep["directions"])
        assert np.allclose(D @ D.T, np.eye(2), atol=1e-12)
        assert len(rep["essp"]["scores"]) == 45 and len(rep["essp"]["scores"][0]) == 2
        assert rep["predictors"] == [f"x{j + 1}" for j in range(9)]

    def test_essp_csv(self, wide, tmp_path):
        path, X, y = wide
        essp = tmp_path / "essp.csv"
        assert main(["fit", "--data", str(path), "--h", "2", "--out", str(tmp_path / "f.json"),
                     "--essp", str(essp)]) == EXIT_OK
        rows = list(csv.reader(essp.open()))
        assert rows[0] == ["index", "y", "score_1"] and len(rows) == 46
        g = fit(Dataset(X, y), EstimatorConfig("swar", 2, 1)).directions[:, 0]
        assert np.array_equal([float(r[2]) for r in rows[1:]], X @ g)

    def test_all_methods(self, wide, tmp_path):
        path = wide[0]
        for m in ("ols", "sir", "swar", "swar_w", "swar_t"):
            h = "1" if m == "ols" else "2"
            assert main(["fit", "--data", str(path), "--method", m, "--h", h,
                         "--out", str(tmp_path / f"{m}.json")]) == EXIT_OK

    def test_too_many_slices(self, wide, capsys):
        assert main(["fit", "--data", str(wide[0]), "--method", "swar", "--h", "10",
                     "--k", "1"]) == EXIT_NUMERICAL
        err = capsys.readouterr().err
        assert err.count("\n") == 1 and "slice" in err


class TestExitCodes:
    def test_unknown_command(self, capsys):
        assert main(["bogus"]) == EXIT_USAGE

    def test_no_arguments(self):
        assert main([]) == EXIT_USAGE

    def test_bad_method(self, wide):
        assert main(["fit", "--data", str(wide[0]), "--method", "pca"]) == EXIT_USAGE

    def test_bad_k(self, wide):
        assert main(["fit", "--data", str(wide[0]), "--k", "0"]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert main(["fit", "--data", str(tmp_path / "nope.csv")]) == EXIT_DATA

    def test_bad_cell(self, tmp_path, capsys):
        f = tmp_path / "a.csv"
        f.write_text("y,x1\n1,oops\n")
        assert main(["fit", "--data", str(f)]) == EXIT_DATA
        assert "row 1" in capsys.readouterr().err

    def test_bad_json_config(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text("{not json")
        assert main(["simulate", "--config", str(f)]) == EXIT_DATA

    def test_unknown_config_key(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text('{"colour": 1}')
        assert main(["simulate", "--config", str(f)]) == EXIT_USAGE

    def test_zero_repetitions(self):
        assert main(["simulate", "--model", "linear10", "--reps", "0"]) == EXIT_USAGE

    def test_garbage_files_never_crash(self, tmp_path):
        blobs = [b"\xff\xfe\x00", b"y\n", b",,,\n,,,\n", b"y,x\n1,2\n", b"y,x\n1e999,2\n"]
        for k, blob in enumerate(blobs):
            f = tmp_path / f"g{k}.csv"
            f.write_bytes(blob)
            assert main(["fit", "--data", str(f)]) in (EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL)


class TestInfluence:
    def _rows(self, path):
        return list(csv.reader(open(path)))

    def test_sif_rho(self, wide, tmp_path):
        path, X, y = wide
        out = tmp_path / "inf.csv"
        assert main(["influence", "--data", str(path), "--kind", "sif-rho", "--h", "2",
                     "--out", str(out)]) == EXIT_OK
        rows = self._rows(out)
        assert rows[0] == ["index", "slice", "value"]
        rep = sif_rho(Dataset(X, y), EstimatorConfig("swar", 2, 1))
        assert np.array_equal([float(r[2]) for r in rows[1:]], rep.values)
        assert [int(r[1]) for r in rows[1:]] == list(rep.slices + 1)

    def test_sif_reslice_differs(self, wide, tmp_path):
        path = wide[0]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["influence", "--data", str(path), "--kind", "sif-rho", "--h", "2", "--out", str(a)])
        main(["influence", "--data", str(path), "--kind", "sif-rho", "--h", "2", "--reslice",
              "--out", str(b)])
        assert a.read_text() != b.read_text()

    def test_sif_vectors(self, wide, tmp_path):
        out = tmp_path / "inf.csv"
        assert main(["influence", "--data", str(wide[0]), "--kind", "sif", "--h", "2", "--k", "2",
                     "--direction", "2", "--out", str(out)]) == EXIT_OK
        rows = self._rows(out)
        assert len(rows[0]) == 2 + 9 and len(rows) == 46
        assert {int(r[1]) for r in rows[1:]} == {1, 2}

    def test_direction_out_of_range(self, wide):
        assert main(["influence", "--data", str(wide[0]), "--kind", "sif",
                     "--direction", "2"]) == EXIT_USAGE

    def test_eif(self, wide, tmp_path):
        out = tmp_path / "inf.csv"
        assert main(["influence", "--data", str(wide[0]), "--kind", "eif", "--h", "2",
                     "--out", str(out)]) == EXIT_OK
        assert all(float(r[2]) <= 0 for r in self._rows(out)[1:])


class TestSelect:
    def test_grid(self, wide, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        assert main(["select", "--data", str(wide[0]), "--h-grid", "2,3,5", "--k-grid", "1,2",
                     "--out", str(out)]) == EXIT_OK
        chosen = json.loads(capsys.readouterr().out)
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 6
        feasible = [r for r in rows if r["feasible"] == "1"]
        best = min(feasible, key=lambda r: float(r["mean_abs_sif"]))
        assert (chosen["H"], chosen["K"]) == (int(best["H"]), int(best["K"]))
        assert {r["H"] for r in rows if r["feasible"] == "0"} == {"5"}

    def test_nothing_feasible(self, wide):
        assert main(["select", "--data", str(wide[0]), "--h-grid", "10"]) == EXIT_NUMERICAL

    def test_bad_grid(self, wide):
        assert main(["select", "--data", str(wide[0]), "--h-grid", "2,x"]) == EXIT_USAGE


class TestSimulate:
    def test_config_file_rerun_identical(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "model1", "n": 80, "p": 4, "H": [2, 5], "K": 1,
                                   "methods": ["ols", "swar", "swar_w"], "repetitions": 5,
                                   "seed": 3, "contamination": {"fraction": 0.05}}))
        outs = []
        for k in range(2):
            c, j = tmp_path / f"r{k}.csv", tmp_path / f"r{k}.json"
            assert main(["simulate", "--config", str(cfg), "--workers", "1",
                         "--out", str(c), "--json", str(j)]) == EXIT_OK
            outs.append((c.read_bytes(), j.read_bytes()))
        assert outs[0] == outs[1]
        assert outs[0][0].startswith(b"method,H,n,p,direction,mean,sd,infeasible\n")

    def test_inline_overrides(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "linear10", "n": 50, "p": 3, "repetitions": 3,
                                   "methods": ["ols"]}))
        out = tmp_path / "r.csv"
        assert main(["simulate", "--config", str(cfg), "--n", "70", "--workers", "1",
                     "--out", str(out)]) == EXIT_OK
        assert out.read_text().splitlines()[1].startswith("ols,1,70,3,")
