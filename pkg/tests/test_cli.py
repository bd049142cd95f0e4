import csv
import math
import os

import pytest

from roadnoma import validation
from roadnoma.cli import main
from roadnoma.config import SystemConfig, config_to_text
from roadnoma.figures import CSV_COLUMNS, reproduce_figure


@pytest.fixture
def default_cfg_file(tmp_path):
    path = tmp_path / "default.cfg"
    path.write_text(config_to_text(SystemConfig(rates=(1.0, 0.5, 0.5))))
    return str(path)


class TestRun:
    def test_writes_csv_and_summary(self, tmp_path, default_cfg_file, capsys):
        out = tmp_path / "out"
        rc = main(["run", "--config", default_cfg_file, "--trials", "2000",
                   "--seed", "9", "--out", str(out)])
        assert rc == 0
        path = out / "scenario.csv"
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert [r["user"] for r in rows] == ["comp", "noma1", "noma2"]
        assert set(rows[0]) == {"scenario_id", "user", "n_trials", "p_hat",
                                "stderr", "analytic_p", "z_score"}
        assert "comp" in capsys.readouterr().out

    def test_missing_field_names_it(self, tmp_path, capsys):
        text = "\n".join(
            line for line in config_to_text(SystemConfig()).splitlines()
            if not line.startswith("lambda_b")
        )
        bad = tmp_path / "bad.cfg"
        bad.write_text(text)
        rc = main(["run", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "lambda_b" in capsys.readouterr().err

    def test_invalid_value_names_field(self, tmp_path, capsys):
        rc = main(["run", "--beta", "1.4", "--trials", "10",
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "beta" in capsys.readouterr().err

    def test_flag_overrides_config_field(self, tmp_path, default_cfg_file):
        out = tmp_path / "o"
        rc = main(["run", "--config", default_cfg_file, "--rates", "3.0,0.5,0.5",
                   "--beta", "0.2", "--trials", "300", "--users", "comp",
                   "--out", str(out)])
        assert rc == 0
        with open(out / "scenario.csv") as fh:
            row = next(csv.DictReader(fh))
        # the overridden rate is infeasible for the split: certain outage
        assert float(row["p_hat"]) == 1.0
        assert float(row["analytic_p"]) == 1.0

    def test_check_passes_on_consistent_scenario(self, tmp_path, default_cfg_file):
        rc = main(["run", "--config", default_cfg_file, "--trials", "4000",
                   "--seed", "3", "--users", "comp", "--check",
                   "--out", str(tmp_path / "o")])
        assert rc == 0

    def test_worker_invariant_bytes(self, tmp_path, default_cfg_file):
        outs = []
        for workers in ("1", "2"):
            out = tmp_path / f"w{workers}"
            rc = main(["run", "--config", default_cfg_file, "--trials", "3000",
                       "--seed", "5", "--workers", workers, "--out", str(out)])
            assert rc == 0
            outs.append((out / "scenario.csv").read_bytes())
        assert outs[0] == outs[1]


class TestFigureCommand:
    def test_fig2_writes_csv_and_plot(self, tmp_path):
        out = tmp_path / "figs"
        rc = main(["figure", "fig2", "--trials", "300", "--seed", "2",
                   "--out", str(out)])
        assert rc == 0
        csv_path = out / "fig2.csv"
        assert csv_path.exists() and (out / "fig2.pdf").exists()
        with open(csv_path) as fh:
            reader = csv.DictReader(fh)
            assert tuple(reader.fieldnames) == CSV_COLUMNS
            rows = list(reader)
        cases = {r["case"] for r in rows}
        assert cases == {"case_i", "case_ii"}
        assert {r["series"] for r in rows} == {"analytic", "mc"}

    def test_reruns_are_byte_identical(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            reproduce_figure("fig2", str(out), seed=4, trials=200)
            blobs.append((out / "fig2.csv").read_bytes())
        assert blobs[0] == blobs[1]

    def test_unknown_figure_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["figure", "fig9", "--out", str(tmp_path)])
        with pytest.raises(ValueError):
            reproduce_figure("fig9", str(tmp_path))

    def test_fig7_exact_and_asymptotic_series(self, tmp_path):
        out = tmp_path / "figs"
        rc = main(["figure", "fig7", "--out", str(out)])
        assert rc == 0
        with open(out / "fig7.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["series"] for r in rows} == {"analytic", "asymptotic"}
        # the two series converge at the sparse-BS end of the sweep
        small = min(float(r["x_value"]) for r in rows)
        sub = {r["series"]: float(r["value"]) for r in rows
               if float(r["x_value"]) == small and r["case"] == "case_i"}
        assert abs(sub["analytic"] - sub["asymptotic"]) <= 2e-2

    def test_snapshot(self, tmp_path):
        out = tmp_path / "snap"
        rc = main(["snapshot", "--seed", "1", "--out", str(out)])
        assert rc == 0
        with open(out / "snapshot.csv") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header == ["kind", "rho", "theta", "offset", "x", "y"]
        kinds = {r[0] for r in rows}
        assert {"line", "bs", "user"} <= kinds
        assert (out / "snapshot.pdf").exists()


class TestValidateCommand:
    def test_mutation_is_caught(self):
        # a sign flip in the same-road transform must fail the oracle suite
        def sabotaged(s, d1, d2, lambda_b, alpha0):
            from roadnoma.analytic import intra_tail_integral

            return math.exp(+lambda_b * (
                intra_tail_integral(d1, s, alpha0) + intra_tail_integral(d2, s, alpha0)
            ))

        rows = validation.check_special_functions(n_grid=5, laplace_intra_fn=sabotaged)
        assert any(not r.passed for r in rows)
        report = validation.format_report(rows)
        assert "FAIL" in report

    def test_healthy_suites_pass_quickly(self):
        rows = validation.check_special_functions(n_grid=5)
        rows += validation.check_inter_transform(n_grid=2)
        assert all(r.passed for r in rows)
        assert "FAILED" not in validation.format_report(rows)

    def test_cli_writes_report_and_creates_out_dir(self, tmp_path, monkeypatch):
        # keep the CLI path fast by shrinking the suites it runs
        original = validation.check_lemma1
        monkeypatch.setattr(
            validation, "check_lemma1",
            lambda **kw: original(n_realizations=3, n_draws=2000,
                                  seed=kw.get("seed", 2)))
        out = tmp_path / "does" / "not" / "exist"
        rc = main(["validate", "--trials", "2000", "--out", str(out)])
        assert rc == 0
        assert (out / "validation_report.txt").exists()
