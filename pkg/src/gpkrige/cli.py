"""Command-line front end: predict, variogram, study, verify.

Datasets are CSV files with a header row naming the coordinate columns
``x1..xd`` followed by the response column ``y``.  Model configuration is a
JSON document carrying the kernel/mean/noise description plus a ``variant``
key (sk, ok, uk, gpr, gpr-basis).  Prediction targets come either from
repeated ``--grid lo:hi:count`` flags (one per dimension, expanded in
row-major order) or from a ``--points`` CSV file.

Numbers are emitted in shortest round-trip decimal form, so every value in
an output file equals the corresponding library result exactly.  Exit
codes: 0 success, 2 input/parse error, 3 numerical singularity, 4 study
failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .exceptions import InputError, NumericalError, SingularityError, StudyError
from .gpr import gpr_predict, gpr_predict_basis
from .kernels import (
    Dataset,
    MeanSpec,
    empirical_semivariogram,
    model_from_json,
    semivariogram_of,
)
from .kriging import (
    blup_general,
    ordinary_krige,
    ordinary_krige_direct,
    predict_points,
    sk_with_plugin_mean,
    universal_krige,
)
from .simulate import run_study, study_config_from_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_STUDY = 4
EXIT_VERIFY = 5

VARIANTS = ("sk", "ok", "uk", "gpr", "gpr-basis")

VERIFY_TOL = 1e-8


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# File input
# ---------------------------------------------------------------------------


def _split_csv_line(line: str) -> list[str]:
    return [f.strip() for f in line.split(",")]


def read_point_table(path: str, expect_response: bool = True):
    """Read a coordinates(+response) CSV; returns (X, y or None).

    Errors cite the 1-based line number of the offending row.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise InputError(f"{path}: empty file")
    header = _split_csv_line(lines[0])
    if expect_response:
        if len(header) < 2 or header[-1] != "y":
            raise InputError(f"{path}: line 1: header must end with a 'y' column")
        coord_names = header[:-1]
    else:
        # a trailing response column is tolerated (and ignored) in points files
        coord_names = header[:-1] if len(header) > 1 and header[-1] == "y" else header
    dim = len(coord_names)
    expected = [f"x{i + 1}" for i in range(dim)]
    if coord_names != expected:
        raise InputError(
            f"{path}: line 1: coordinate columns must be {','.join(expected)}, "
            f"got {','.join(coord_names)}"
        )
    ncols = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = _split_csv_line(line)
        if len(fields) != ncols:
            raise InputError(
                f"{path}: line {lineno}: expected {ncols} fields, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError as err:
            raise InputError(f"{path}: line {lineno}: {err}") from err
        if not all(np.isfinite(values)):
            raise InputError(f"{path}: line {lineno}: non-finite value")
        rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    table = np.asarray(rows)
    if expect_response:
        return table[:, :dim], table[:, dim]
    return table[:, :dim], None


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as err:
            raise InputError(f"{path}: line {err.lineno}: invalid JSON: {err.msg}") from err


def _parse_grid(specs: list[str], dim: int) -> np.ndarray:
    if len(specs) != dim:
        raise InputError(f"need {dim} --grid specs (one per dimension), got {len(specs)}")
    axes = []
    for spec in specs:
        parts = spec.split(":")
        if len(parts) != 3:
            raise InputError(f"bad grid spec {spec!r}; expected lo:hi:count")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as err:
            raise InputError(f"bad grid spec {spec!r}: {err}") from err
        if count < 1:
            raise InputError(f"bad grid spec {spec!r}: count must be positive")
        axes.append(np.linspace(lo, hi, count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _resolve_targets(args, dim: int) -> np.ndarray:
    if args.grid and args.points:
        raise InputError("give either --grid or --points, not both")
    if args.grid:
        return _parse_grid(args.grid, dim)
    if args.points:
        xs, _ = read_point_table(args.points, expect_response=False)
        if xs.shape[1] != dim:
            raise InputError(
                f"target points have dimension {xs.shape[1]}, data has {dim}"
            )
        return xs
    raise InputError("prediction targets required: --grid or --points")


def _open_out(args):
    if args.out:
        return open(args.out, "w", encoding="utf-8", newline="")
    return sys.stdout


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------


def _model_from_config(config: dict, dim: int):
    kernel, mean, noise = model_from_json(config, dim=dim)
    max_jitter = float(config.get("max_jitter", 0.0))
    return kernel, mean, noise, max_jitter


def cmd_predict(args) -> int:
    x, y = read_point_table(args.data)
    config = _load_json(args.config)
    variant = config.get("variant")
    if variant not in VARIANTS:
        raise InputError(f"config variant must be one of {VARIANTS}, got {variant!r}")
    kernel, mean, noise, max_jitter = _model_from_config(config, x.shape[1])
    data = Dataset(x, y, noise)
    targets = _resolve_targets(args, data.dim)

    jitter_seen = False
    if variant == "gpr":
        if not mean.is_identified:
            raise InputError("variant 'gpr' requires a known mean in the config")
        post = gpr_predict(data, kernel, mean, targets, max_jitter=max_jitter)
        means, variances = post.mean, post.variance
    elif variant == "gpr-basis":
        means_spec = mean if mean.kind != "known" else None
        if means_spec is None:
            raise InputError("variant 'gpr-basis' requires a basis or constant_unknown mean")
        post = gpr_predict_basis(data, kernel, means_spec, targets, max_jitter=max_jitter)
        means, variances = post.mean, post.variance
    else:
        lib_variant = {"sk": "sk", "ok": "ok", "uk": "uk"}[variant]
        if lib_variant == "sk" and not mean.is_identified:
            raise InputError("variant 'sk' requires a known mean in the config")
        preds = predict_points(data, kernel, targets, lib_variant,
                               mean=mean if lib_variant != "ok" else None,
                               max_jitter=max_jitter)
        means = np.array([p.mean for p in preds])
        variances = np.array([p.error_variance for p in preds])
        jitter_seen = any(p.jitter_warning for p in preds)

    if jitter_seen:
        print("warning: diagonal jitter was added to factor the covariance",
              file=sys.stderr)

    out = _open_out(args)
    try:
        header = [f"x{i + 1}" for i in range(data.dim)] + ["mean", "error_variance"]
        out.write(",".join(header) + "\n")
        for point, m, v in zip(targets, means, variances):
            fields = [_fmt(c) for c in point] + [_fmt(m), _fmt(v)]
            out.write(",".join(fields) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# variogram
# ---------------------------------------------------------------------------


def cmd_variogram(args) -> int:
    x, y = read_point_table(args.data)
    centers, counts, gamma = empirical_semivariogram(x, y, args.bins, args.max_lag)
    model = None
    if args.config:
        config = _load_json(args.config)
        kernel, _, _, _ = _model_from_config(config, x.shape[1])
        model = semivariogram_of(kernel, centers)

    out = _open_out(args)
    try:
        header = ["lag_center", "pair_count", "empirical_semivariance"]
        if model is not None:
            header.append("model_semivariance")
        out.write(",".join(header) + "\n")
        for b in range(len(centers)):
            fields = [
                _fmt(centers[b]),
                str(int(counts[b])),
                "" if counts[b] == 0 else _fmt(gamma[b]),
            ]
            if model is not None:
                fields.append(_fmt(model[b]))
            out.write(",".join(fields) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# study
# ---------------------------------------------------------------------------


def cmd_study(args) -> int:
    doc = _load_json(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = study_config_from_json(doc)
    report = run_study(cfg)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _pair_deviation(a_mean, a_var, b_mean, b_var) -> float:
    dev_mean = abs(a_mean - b_mean) / max(1.0, abs(a_mean))
    dev_var = abs(a_var - b_var) / max(1.0, abs(a_var))
    return max(dev_mean, dev_var)


def cmd_verify(args) -> int:
    x, y = read_point_table(args.data)
    config = _load_json(args.config)
    kernel, mean, noise, max_jitter = _model_from_config(config, x.shape[1])
    data = Dataset(x, y, noise)
    targets = _resolve_targets(args, data.dim)

    constant = MeanSpec.constant_unknown()
    if mean.kind == "basis":
        basis = dataclasses.replace(mean, prior_mean=None, prior_cov=None)
    else:
        basis = MeanSpec.polynomial(data.dim, 1)
    known = mean if mean.is_identified else MeanSpec.known_constant(0.0)

    results: list[tuple[str, float | None, str]] = []

    def record(name, deviation):
        status = "pass" if deviation <= VERIFY_TOL else "fail"
        results.append((name, deviation, status))

    dev = 0.0
    for point in targets:
        a = ordinary_krige(data, kernel, point, max_jitter)
        b = ordinary_krige_direct(data, kernel, point, max_jitter)
        dev = max(dev, _pair_deviation(a.mean, a.error_variance, b.mean, b.error_variance))
    record("ok_vs_ok_direct", dev)

    dev = 0.0
    for point in targets:
        a = ordinary_krige(data, kernel, point, max_jitter)
        b = sk_with_plugin_mean(data, kernel, constant, point, max_jitter)
        dev = max(dev, _pair_deviation(a.mean, a.error_variance, b.mean, b.error_variance))
    record("ok_vs_sk_plus_gls", dev)

    dev = 0.0
    for point in targets:
        a = universal_krige(data, kernel, basis, point, max_jitter)
        b = sk_with_plugin_mean(data, kernel, basis, point, max_jitter)
        dev = max(dev, _pair_deviation(a.mean, a.error_variance, b.mean, b.error_variance))
    record("uk_vs_sk_plus_gls_beta", dev)

    post = gpr_predict(data, kernel, known, targets, max_jitter=max_jitter)
    dev = 0.0
    for j, point in enumerate(targets):
        b = blup_general(data, kernel, known, point, max_jitter)
        dev = max(dev, _pair_deviation(post.mean[j], post.variance[j],
                                       b.mean, b.error_variance))
    record("gpr_vs_sk", dev)

    post = gpr_predict_basis(data, kernel, basis, targets, max_jitter=max_jitter)
    dev = 0.0
    for j, point in enumerate(targets):
        b = universal_krige(data, kernel, basis, point, max_jitter)
        dev = max(dev, _pair_deviation(post.mean[j], post.variance[j],
                                       b.mean, b.error_variance))
    record("gpr_basis_vs_uk", dev)

    if data.noise_variance > 0.0:
        results.append(("interpolation", None, "skipped (noisy)"))
    else:
        dev = 0.0
        for i in range(data.n):
            p = ordinary_krige(data, kernel, data.x[i], max_jitter)
            dev = max(dev, abs(p.mean - data.y[i]) / max(1.0, abs(data.y[i])))
            dev = max(dev, p.error_variance)
        record("interpolation", dev)

    width = max(len(name) for name, _, _ in results)
    for name, deviation, status in results:
        dev_text = "-" if deviation is None else f"{deviation:.3e}"
        print(f"{name:<{width}}  {dev_text:>11}  {status}")

    failing = [(n, d) for n, d, s in results if s == "fail"]
    if failing:
        for name, deviation in failing:
            print(f"verification failed: {name} deviates by {deviation:.6e}",
                  file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpkrige",
        description="Kriging and Gaussian-process prediction over CSV point data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="predict at grid or listed target points")
    p.add_argument("--data", required=True, help="training CSV (x1..xd,y)")
    p.add_argument("--config", required=True, help="model config JSON with 'variant'")
    p.add_argument("--grid", action="append", default=[],
                   help="per-dimension grid spec lo:hi:count (repeat per dimension)")
    p.add_argument("--points", help="CSV of target points (x1..xd)")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("variogram", help="binned empirical semivariogram")
    p.add_argument("--data", required=True)
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--max-lag", type=float, required=True, dest="max_lag")
    p.add_argument("--config", help="optional model config for the model column")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_variogram)

    p = sub.add_parser("study", help="run a replicated predictor comparison study")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("verify", help="run the cross-path equivalence checks")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--grid", action="append", default=[])
    p.add_argument("--points")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularityError, NumericalError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_SINGULAR
    except StudyError as err:
        print(f"study failed: {err}", file=sys.stderr)
        return EXIT_STUDY
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
