"""CLI commands: predict, variogram, study, verify, and their exit codes."""

import json

import numpy as np
import pytest

from gpkrige import (
    Dataset,
    KernelSpec,
    MeanSpec,
    ordinary_krige,
    sample_field,
    semivariogram_of,
    simple_krige,
)
from gpkrige.cli import main

SE_CONFIG = {
    "variant": "ok",
    "kernel": {"family": "squared_exponential", "variance": 1.0, "lengthscales": [1.0]},
    "mean": {"type": "constant_unknown"},
    "noise_variance": 0.0,
}


def write_csv(path, x, y):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    header = [f"x{i + 1}" for i in range(x.shape[1])] + ["y"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row, yi in zip(x, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{float(yi)!r}\n")


def write_config(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_rows(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


@pytest.fixture
def demo(tmp_path):
    data = tmp_path / "data.csv"
    config = tmp_path / "config.json"
    write_csv(data, [0.0, 1.0], [1.0, 2.0])
    write_config(config, SE_CONFIG)
    return tmp_path, str(data), str(config)


class TestPredict:
    def test_two_point_symmetric_example(self, demo):
        tmp, data, config = demo
        out = tmp / "out.csv"
        code = main(["predict", "--data", data, "--config", config,
                     "--grid", "0.5:0.5:1", "--out", str(out)])
        assert code == 0
        header, rows = read_rows(out)
        assert header == ["x1", "mean", "error_variance"]
        assert rows[0][0] == "0.5"
        assert float(rows[0][1]) == pytest.approx(1.5, abs=1e-12)
        lib = ordinary_krige(Dataset([0.0, 1.0], [1.0, 2.0]),
                             KernelSpec("squared_exponential", 1.0, (1.0,)), [0.5])
        assert float(rows[0][2]) == lib.error_variance  # exact round-trip

    def test_sk_at_training_point(self, tmp_path):
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        write_csv(data, [0.0, 1.0], [1.5, -0.5])
        write_config(config, {**SE_CONFIG, "variant": "sk",
                              "mean": {"type": "known", "constant": 0.0}})
        out = tmp_path / "o.csv"
        code = main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "1:1:1", "--out", str(out)])
        assert code == 0
        _, rows = read_rows(out)
        assert float(rows[0][1]) == pytest.approx(-0.5, abs=1e-9)
        assert float(rows[0][2]) <= 1e-9

    def test_full_precision_round_trip(self, demo):
        tmp, data, config = demo
        out = tmp / "out.csv"
        main(["predict", "--data", data, "--config", config,
              "--grid", "0:2:7", "--out", str(out)])
        _, rows = read_rows(out)
        dataset = Dataset([0.0, 1.0], [1.0, 2.0])
        kernel = KernelSpec("squared_exponential", 1.0, (1.0,))
        for row in rows:
            lib = ordinary_krige(dataset, kernel, [float(row[0])])
            assert float(row[1]) == lib.mean
            assert float(row[2]) == lib.error_variance

    def test_malformed_row_cites_line(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("x1,y\n0.0,1.0\noops,2.0\n")
        config = tmp_path / "c.json"
        write_config(config, SE_CONFIG)
        code = main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "0:1:2"])
        assert code == 2
        assert "line 3" in capsys.readouterr().err

    def test_bad_variant_exits_2(self, demo):
        tmp, data, config = demo
        bad = tmp / "bad.json"
        write_config(bad, {**SE_CONFIG, "variant": "cokriging"})
        assert main(["predict", "--data", data, "--config", str(bad),
                     "--grid", "0:1:2"]) == 2

    def test_invalid_json_exits_2(self, demo, capsys):
        tmp, data, _ = demo
        bad = tmp / "bad.json"
        bad.write_text("{not json")
        assert main(["predict", "--data", data, "--config", str(bad),
                     "--grid", "0:1:2"]) == 2

    def test_duplicate_points_exit_3(self, tmp_path):
        data = tmp_path / "dup.csv"
        config = tmp_path / "c.json"
        write_csv(data, [0.0, 0.0], [1.0, 2.0])
        write_config(config, SE_CONFIG)
        assert main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "0:1:2"]) == 3

    def test_missing_targets_exit_2(self, demo):
        _, data, config = demo
        assert main(["predict", "--data", data, "--config", config]) == 2

    def test_points_file_targets(self, demo):
        tmp, data, config = demo
        pts = tmp / "pts.csv"
        pts.write_text("x1\n0.25\n0.75\n")
        out = tmp / "o.csv"
        assert main(["predict", "--data", data, "--config", config,
                     "--points", str(pts), "--out", str(out)]) == 0
        _, rows = read_rows(out)
        assert len(rows) == 2

    def test_grid_expansion_row_major(self, tmp_path):
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        write_csv(data, np.array([[0.0, 0.0], [1.0, 1.0], [0.5, 0.2]]),
                  [1.0, 2.0, 1.5])
        write_config(config, {**SE_CONFIG,
                              "kernel": {"family": "squared_exponential",
                                         "variance": 1.0, "lengthscales": [1.0, 1.0]}})
        out = tmp_path / "o.csv"
        code = main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "0:1:2", "--grid", "0:1:3", "--out", str(out)])
        assert code == 0
        _, rows = read_rows(out)
        coords = [(float(r[0]), float(r[1])) for r in rows]
        assert coords == [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0),
                          (1.0, 0.0), (1.0, 0.5), (1.0, 1.0)]

    def test_repeated_invocations_byte_identical(self, demo):
        tmp, data, config = demo
        out1, out2 = tmp / "a.csv", tmp / "b.csv"
        main(["predict", "--data", data, "--config", config,
              "--grid", "0:3:9", "--out", str(out1)])
        main(["predict", "--data", data, "--config", config,
              "--grid", "0:3:9", "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_uk_variant_matches_library(self, tmp_path):
        from gpkrige import universal_krige

        data_vals = ([0.0, 1.0, 2.5, 4.0], [1.0, -1.0, 0.5, 2.0])
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        write_csv(data, *data_vals)
        write_config(config, {**SE_CONFIG, "variant": "uk",
                              "mean": {"type": "basis", "basis": "polynomial",
                                       "degree": 1}})
        out = tmp_path / "o.csv"
        assert main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "3:3:1", "--out", str(out)]) == 0
        _, rows = read_rows(out)
        lib = universal_krige(Dataset(*data_vals),
                              KernelSpec("squared_exponential", 1.0, (1.0,)),
                              MeanSpec.polynomial(1, 1), [3.0])
        assert float(rows[0][1]) == lib.mean
        assert float(rows[0][2]) == lib.error_variance

    def test_gpr_basis_variant_matches_uk(self, tmp_path):
        from gpkrige import universal_krige

        data_vals = ([0.0, 1.0, 2.5, 4.0], [1.0, -1.0, 0.5, 2.0])
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        write_csv(data, *data_vals)
        write_config(config, {**SE_CONFIG, "variant": "gpr-basis",
                              "mean": {"type": "basis", "basis": "polynomial",
                                       "degree": 1}})
        out = tmp_path / "o.csv"
        assert main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "3:3:1", "--out", str(out)]) == 0
        _, rows = read_rows(out)
        lib = universal_krige(Dataset(*data_vals),
                              KernelSpec("squared_exponential", 1.0, (1.0,)),
                              MeanSpec.polynomial(1, 1), [3.0])
        assert float(rows[0][1]) == pytest.approx(lib.mean, abs=1e-10)
        assert float(rows[0][2]) == pytest.approx(lib.error_variance, abs=1e-10)

    def test_gpr_variant_matches_sk(self, tmp_path):
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        write_csv(data, [0.0, 1.0, 2.5], [1.0, -1.0, 0.5])
        write_config(config, {**SE_CONFIG, "variant": "gpr",
                              "mean": {"type": "known", "constant": 0.0}})
        out = tmp_path / "o.csv"
        assert main(["predict", "--data", str(data), "--config", str(config),
                     "--grid", "0.7:0.7:1", "--out", str(out)]) == 0
        _, rows = read_rows(out)
        sk = simple_krige(Dataset([0.0, 1.0, 2.5], [1.0, -1.0, 0.5]),
                          KernelSpec("squared_exponential", 1.0, (1.0,)),
                          MeanSpec.known_constant(0.0), [0.7])
        assert float(rows[0][1]) == pytest.approx(sk.mean, abs=1e-12)
        assert float(rows[0][2]) == pytest.approx(sk.error_variance, abs=1e-12)


class TestVariogram:
    def test_constant_data_gives_zero(self, tmp_path):
        data = tmp_path / "d.csv"
        write_csv(data, np.arange(5.0), np.full(5, 2.0))
        out = tmp_path / "v.csv"
        assert main(["variogram", "--data", str(data), "--bins", "3",
                     "--max-lag", "4.5", "--out", str(out)]) == 0
        _, rows = read_rows(out)
        for row in rows:
            if int(row[1]) > 0:
                assert float(row[2]) == 0.0

    def test_two_points_definitional(self, tmp_path):
        data = tmp_path / "d.csv"
        write_csv(data, [0.0, 1.0], [1.0, 4.0])
        out = tmp_path / "v.csv"
        assert main(["variogram", "--data", str(data), "--bins", "1",
                     "--max-lag", "2", "--out", str(out)]) == 0
        _, rows = read_rows(out)
        assert int(rows[0][1]) == 1
        assert float(rows[0][2]) == pytest.approx(4.5)

    def test_empty_bins_emit_empty_field(self, tmp_path):
        data = tmp_path / "d.csv"
        write_csv(data, [0.0, 10.0], [0.0, 1.0])
        out = tmp_path / "v.csv"
        main(["variogram", "--data", str(data), "--bins", "4",
              "--max-lag", "20", "--out", str(out)])
        _, rows = read_rows(out)
        empties = [row for row in rows if int(row[1]) == 0]
        assert empties and all(row[2] == "" for row in empties)

    def test_model_column_matches_library(self, tmp_path):
        data = tmp_path / "d.csv"
        config = tmp_path / "c.json"
        rng = np.random.default_rng(60)
        write_csv(data, rng.uniform(0, 3, 8), rng.normal(size=8))
        write_config(config, SE_CONFIG)
        out = tmp_path / "v.csv"
        assert main(["variogram", "--data", str(data), "--bins", "4",
                     "--max-lag", "3", "--config", str(config),
                     "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header[-1] == "model_semivariance"
        kernel = KernelSpec("squared_exponential", 1.0, (1.0,))
        for row in rows:
            assert float(row[3]) == semivariogram_of(kernel, float(row[0]))


class TestStudy:
    STUDY = {
        "kernel": {"family": "squared_exponential", "variance": 1.0,
                   "lengthscales": [0.2]},
        "true_mean": {"type": "known", "constant": 5.0},
        "noise_variance": 0.01,
        "n_train": 10,
        "n_test": 5,
        "domain": [[0.0, 1.0]],
        "replicates": 2,
        "seed": 77,
        "predictors": ["ls", "ok"],
    }

    def test_minimal_config_valid_report(self, tmp_path):
        config = tmp_path / "s.json"
        write_config(config, {**self.STUDY, "replicates": 1})
        out = tmp_path / "r.json"
        assert main(["study", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["replicates"] == 1
        assert set(report["predictors"]) == {"ls", "ok"}

    def test_byte_identical_reports(self, tmp_path):
        config = tmp_path / "s.json"
        write_config(config, self.STUDY)
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        main(["study", "--config", str(config), "--out", str(out1)])
        main(["study", "--config", str(config), "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_override_changes_report(self, tmp_path):
        config = tmp_path / "s.json"
        write_config(config, self.STUDY)
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        main(["study", "--config", str(config), "--out", str(out1)])
        main(["study", "--config", str(config), "--seed", "78", "--out", str(out2)])
        a, b = json.loads(out1.read_text()), json.loads(out2.read_text())
        assert a != b and b["seed"] == 78

    def test_bad_config_exit_2(self, tmp_path):
        config = tmp_path / "s.json"
        write_config(config, {**self.STUDY, "predictors": ["nope"]})
        assert main(["study", "--config", str(config)]) == 2

    def test_total_failure_exit_4(self, tmp_path):
        config = tmp_path / "s.json"
        write_config(config, {
            **self.STUDY,
            "kernel": {"family": "squared_exponential", "variance": 0.0,
                       "lengthscales": [0.2]},
            "noise_variance": 0.0,
            "predictors": ["ok"],
        })
        assert main(["study", "--config", str(config)]) == 4


class TestVerify:
    @staticmethod
    def make_dataset(tmp_path, noise=0.0):
        kernel = KernelSpec("exponential", 1.0, (0.3,))
        rng = np.random.default_rng(61)
        x = rng.uniform(0, 1, (20, 1))
        y = sample_field(kernel, MeanSpec.known_constant(5.0), x, noise, rng)
        data = tmp_path / "d.csv"
        write_csv(data, x, y)
        config = tmp_path / "c.json"
        write_config(config, {
            "variant": "ok",
            "kernel": {"family": "exponential", "variance": 1.0,
                       "lengthscales": [0.3]},
            "mean": {"type": "constant_unknown"},
            "noise_variance": noise,
        })
        return str(data), str(config)

    def test_well_conditioned_dataset_passes(self, tmp_path, capsys):
        data, config = self.make_dataset(tmp_path)
        code = main(["verify", "--data", data, "--config", config,
                     "--grid", "0.05:0.95:7"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("pass") == 6
        assert "interpolation" in out

    def test_duplicate_points_exit_3(self, tmp_path):
        data = tmp_path / "dup.csv"
        write_csv(data, [0.0, 0.0, 1.0], [1.0, 2.0, 3.0])
        config = tmp_path / "c.json"
        write_config(config, SE_CONFIG)
        assert main(["verify", "--data", str(data), "--config", str(config),
                     "--grid", "0:1:3"]) == 3

    def test_noisy_config_skips_interpolation(self, tmp_path, capsys):
        data, config = self.make_dataset(tmp_path, noise=0.1)
        code = main(["verify", "--data", data, "--config", config,
                     "--grid", "0.1:0.9:5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "skipped (noisy)" in out
