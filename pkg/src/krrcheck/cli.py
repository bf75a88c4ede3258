"""Command-line entry points: dataset ingestion, NSW preprocessing, test
execution, simulation cells, witness export, tuning, and result persistence.

Exit codes: 0 success, 2 input error, 3 numerical error.  Reports are
deterministic in (input, config, seed): machine-readable JSON files carry no
timestamps and serialize every float with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapPlan, TestReport, multiplier_bootstrap, wild_bootstrap_icm
from .errors import InputError, KrrCheckError, NumericalError
from .kernels import KernelConfig, kernel_matrix, median_heuristic
from .models import Dataset, FittedModel, fit_ols, fit_probit, joint_cate_residuals
from .simulate import (
    DgpSpec,
    ExperimentSpec,
    fig1_true_residuals,
    generate,
    run_cell,
    run_power_vs_J,
    write_cell_csv,
    write_power_vs_j_csv,
)
from .spectral import kernel_context
from .stats import RAND_STATISTICS, fit_location_sampler, sample_locations
from .tuning import (
    DEFAULT_TEST_LAMBDA,
    cv_table_rows,
    default_grid,
    tune,
    tune_informative,
)
from .witness import witness_field, witness_grid_export

log = logging.getLogger("krrcheck")

OUTPUT_DIR_ENV = "KRRCHECK_OUTPUT_DIR"

NSW_COVARIATES = (
    "age", "education", "black", "hispanic", "married", "nodegree", "re74", "re75",
)
NSW_BINARY_SLICE = slice(2, 6)

KRR_STATISTICS = ("proj1", "proj2", "rand1", "rand2")


# ---------------------------------------------------------------------------
# ingestion


def ingest_csv(path, y_col: str, x_cols, t_col: str | None = None) -> Dataset:
    """Parse a headered CSV into a Dataset, validating every cell.

    Errors carry the (1-based data row, column name) coordinates of the
    offending cell.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"empty file: {path}") from None
        header = [h.strip() for h in header]
        wanted = list(x_cols) + [y_col] + ([t_col] if t_col else [])
        missing = [c for c in wanted if c not in header]
        if missing:
            raise InputError(f"missing columns in {path}: {missing}")
        idx = {c: header.index(c) for c in wanted}
        rows = []
        for rnum, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            parsed = {}
            for c in wanted:
                cell = row[idx[c]].strip() if idx[c] < len(row) else ""
                try:
                    val = float(cell)
                except ValueError:
                    raise InputError(
                        f"non-numeric cell at row {rnum}, column {c!r}: {cell!r}"
                    ) from None
                if not np.isfinite(val):
                    raise InputError(f"non-finite cell at row {rnum}, column {c!r}")
                parsed[c] = val
            rows.append(parsed)
    if not rows:
        raise InputError(f"no data rows in {path}")
    X = np.array([[r[c] for c in x_cols] for r in rows])
    Y = np.array([r[y_col] for r in rows])
    T = np.array([r[t_col] for r in rows]) if t_col else None
    log.info(
        "ingested %s: n=%d, y=%s, x=%s%s",
        path, len(rows), y_col, list(x_cols), f", t={t_col}" if t_col else "",
    )
    return Dataset(X=X, Y=Y, T=T)


def ingest_nsw_csv(path) -> Dataset:
    """Read the Dehejia-Wahba NSW file with its conventional column names."""
    return ingest_csv(path, y_col="re78", x_cols=NSW_COVARIATES, t_col="treat")


def preprocess_nsw(ds: Dataset) -> Dataset:
    """Rescale age/education by 10 and map all earnings through log1p.

    Expects the covariate order (age, education, black, hispanic, married,
    nodegree, re74, re75) with the outcome being raw 1978 earnings.  The
    log1p transform handles the zero-earnings mass; negative earnings are
    rejected.
    """
    if ds.X.shape[1] != len(NSW_COVARIATES):
        raise InputError(
            f"NSW preprocessing expects {len(NSW_COVARIATES)} covariates, "
            f"got {ds.X.shape[1]}"
        )
    if ds.T is None:
        raise InputError("NSW dataset needs a treatment column")
    X = ds.X.copy()
    bin_block = X[:, NSW_BINARY_SLICE]
    if not np.all((bin_block == 0) | (bin_block == 1)):
        raise InputError("NSW indicator columns must be 0/1")
    earnings = np.column_stack([X[:, 6], X[:, 7], ds.Y])
    if np.any(earnings < 0):
        bad = np.argwhere(earnings < 0)
        raise InputError(f"negative earnings at (row, column) pairs {bad.tolist()[:10]}")
    X[:, 0] /= 10.0
    X[:, 1] /= 10.0
    X[:, 6] = np.log1p(X[:, 6])
    X[:, 7] = np.log1p(X[:, 7])
    Y = np.log1p(ds.Y)
    return Dataset(X=X, Y=Y, T=ds.T)


# ---------------------------------------------------------------------------
# reports


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _dumps17(obj, indent: int = 0) -> str:
    """JSON with floats rendered at 17 significant digits, keys sorted."""
    pad = "  " * indent
    obj = _jsonable(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_dumps17(v, indent + 1)}'
            for k, v in sorted(obj.items())
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_dumps17(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def _git_describe() -> str | None:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.TimeoutExpired):
        return None
    return out.stdout.strip() if out.returncode == 0 else None


def report_payload(report: TestReport, *, label: str, seed, extra=None) -> dict:
    payload = {
        "label": label,
        "statistic": report.statistic.name,
        "value": report.statistic.value,
        "p_value": report.p_value,
        "B": report.B,
        "scale": dict(report.statistic.scale),
        "seed": seed,
        "version": __version__,
        "git": _git_describe(),
    }
    if report.locations is not None:
        payload["locations"] = report.locations.points
    if extra:
        payload.update(extra)
    return payload


def emit_report(report: TestReport, out_dir, *, label: str, seed, extra=None):
    """Write one machine-readable JSON and one human summary for a test."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = report_payload(report, label=label, seed=seed, extra=extra)
        machine = out_dir / f"{label}.json"
        machine.write_text(_dumps17(payload) + "\n")
        human = out_dir / f"{label}.txt"
        lines = [
            f"test:      {label}",
            f"statistic: {report.statistic.name} = {report.statistic.value:.6g}",
            f"p-value:   {report.p_value:.6g}   (B = {report.B})",
            f"scale:     {report.statistic.scale}",
            f"seed:      {seed}",
        ]
        human.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write report under {out_dir}: {exc}") from exc
    return machine, human


# ---------------------------------------------------------------------------
# test execution helpers


@dataclass(frozen=True)
class RunConfig:
    """Resolved options for one `test`-style invocation."""

    statistics: tuple
    B: int = 500
    J: int = 3
    level: float = 0.05
    seed: int = 0
    gamma: object = "cv"                   # float or "cv"
    lam: object = DEFAULT_TEST_LAMBDA      # float or "cv"
    output_dir: Path = Path(".")

    def __post_init__(self) -> None:
        if not 0.0 < self.level < 1.0:
            raise InputError(f"level must be in (0, 1), got {self.level}")


def _resolve_kernel(X, eps, cfg: RunConfig, tune_seed: int):
    """CV-tune whichever of (gamma, lambda) is set to 'cv'; report the table.

    Selection uses the one-standard-error band rule of
    :func:`krrcheck.tuning.tune_informative`, which keeps the kernel
    informative when the residuals carry no signal.  By default only gamma
    is tuned and lambda stays at the pinned testing ridge (see
    :func:`krrcheck.tuning.tune_for_test`); pass ``--lambda cv`` to
    cross-validate both.
    """
    cv_table = None
    gamma, lam = cfg.gamma, cfg.lam
    if gamma == "cv" or lam == "cv":
        grid = default_grid(X, seed=tune_seed)
        if gamma != "cv":
            g = float(gamma)
            grid = type(grid)(gamma_grid=(g,), lambda_grid=grid.lambda_grid,
                              folds=grid.folds, seed=grid.seed)
        if lam != "cv":
            l = float(lam)
            grid = type(grid)(gamma_grid=grid.gamma_grid, lambda_grid=(l,),
                              folds=grid.folds, seed=grid.seed)
        gamma, lam, cv_table = tune_informative(X, eps, grid)
    return float(gamma), float(lam), cv_table


def _seed_streams(seed: int, names):
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(names))
    return {
        name: int(child.generate_state(1, dtype=np.uint64)[0])
        for name, child in zip(names, children)
    }


def run_statistic_suite(
    fm: FittedModel, X, cfg: RunConfig, *, gp_bandwidths=(), label: str = "test"
) -> dict[str, TestReport]:
    """Tune, build shared state, and bootstrap all requested statistics.

    ``gp_bandwidths`` maps report suffixes to fixed kcm bandwidths, e.g.
    ``{"gp_median": None, "gp_fixed": 0.5}`` (None means median heuristic).
    """
    seeds = _seed_streams(cfg.seed, ("tune", "locations", "bootstrap"))
    gamma, lam, _ = _resolve_kernel(X, fm.residuals, cfg, seeds["tune"])
    ctx = kernel_context(KernelConfig(gamma=gamma), X, lam)
    locations = None
    if any(s in RAND_STATISTICS for s in cfg.statistics):
        locations = sample_locations(
            fit_location_sampler(X), cfg.J, seeds["locations"]
        )
    plan = BootstrapPlan(B=cfg.B, master_seed=seeds["bootstrap"])
    krr = [s for s in cfg.statistics if s in KRR_STATISTICS]
    reports = multiplier_bootstrap(
        fm, ctx, krr, plan, locations=locations, keep_bootstrap_values=False
    )
    for suffix, bw in dict(gp_bandwidths).items():
        g = median_heuristic(X) if bw is None else float(bw)
        gp_K = kernel_matrix(KernelConfig(gamma=g), X)
        gp_report = multiplier_bootstrap(
            fm, ctx, ["gp"], plan, gp_kernel=gp_K, gp_gamma=g,
            keep_bootstrap_values=False,
        )["gp"]
        reports[suffix] = gp_report
    log.info(
        "%s: gamma=%.6g lambda=%.6g B=%d J=%s",
        label, gamma, lam, cfg.B, locations.J if locations else "-",
    )
    return reports


def run_nsw_tests(ds: Dataset, cfg: RunConfig):
    """Individual propensity test and joint propensity+CATE test on NSW data.

    Returns ``(individual, joint)`` dicts of TestReports: the four KRR
    statistics plus GP benchmarks at the median-heuristic and fixed 0.5
    bandwidths.
    """
    fm_probit = fit_probit(ds.X, ds.T)
    sub = _seed_streams(cfg.seed, ("individual", "joint"))
    gp = {"gp_median": None, "gp_fixed": 0.5}
    individual = run_statistic_suite(
        fm_probit, ds.X,
        RunConfig(statistics=cfg.statistics, B=cfg.B, J=cfg.J, level=cfg.level,
                  seed=sub["individual"], gamma=cfg.gamma, lam=cfg.lam,
                  output_dir=cfg.output_dir),
        gp_bandwidths=gp, label="nsw-individual",
    )
    fm_joint = joint_cate_residuals(ds.X, ds.Y, ds.T, fm_probit)
    joint = run_statistic_suite(
        fm_joint, ds.X,
        RunConfig(statistics=cfg.statistics, B=cfg.B, J=cfg.J, level=cfg.level,
                  seed=sub["joint"], gamma=cfg.gamma, lam=cfg.lam,
                  output_dir=cfg.output_dir),
        gp_bandwidths=gp, label="nsw-joint",
    )
    return individual, joint


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file with default options")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output-dir", type=Path, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers (never affects results)")


def _statistics_arg(value: str):
    names = tuple(s.strip() for s in value.split(",") if s.strip())
    if not names:
        raise argparse.ArgumentTypeError("empty statistic list")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krrcheck",
        description="Kernel ridge regression model checks for conditional "
                    "moment restriction models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run specification tests on a CSV dataset")
    t.add_argument("--input", type=Path, required=True)
    t.add_argument("--y-col", default=None)
    t.add_argument("--t-col", default=None)
    t.add_argument("--x-cols", default=None, help="comma-separated covariate columns")
    t.add_argument("--model", choices=("ols", "probit", "probit_cate_joint", "nsw"),
                   default="ols")
    t.add_argument("--statistic", dest="statistics", type=_statistics_arg, default=None,
                   help="comma-separated list from proj1,proj2,rand1,rand2")
    t.add_argument("--B", type=int, default=None)
    t.add_argument("--J", type=int, default=None)
    t.add_argument("--level", type=float, default=None)
    t.add_argument("--gamma", default=None, help="bandwidth or 'cv'")
    t.add_argument("--lambda", dest="lam", default=None, help="ridge or 'cv'")
    _add_common(t)

    s = sub.add_parser("simulate", help="run a Monte Carlo size/power cell")
    s.add_argument("--dgp", default=None, help="comma-separated DGP ids")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--d", type=int, default=None)
    s.add_argument("--R", type=int, default=None)
    s.add_argument("--B", type=int, default=None)
    s.add_argument("--J", type=int, default=None)
    s.add_argument("--level", type=float, default=None)
    s.add_argument("--statistic", dest="statistics", type=_statistics_arg, default=None)
    _add_common(s)

    w = sub.add_parser("witness", help="export a witness-function grid as CSV")
    w.add_argument("--input", type=Path, default=None)
    w.add_argument("--y-col", default=None)
    w.add_argument("--x-cols", default=None)
    w.add_argument("--dgp", default=None, help="a fig1 DGP id for synthetic fields")
    w.add_argument("--n", type=int, default=None)
    w.add_argument("--gamma", default=None)
    w.add_argument("--lambda", dest="lam", default=None)
    _add_common(w)

    u = sub.add_parser("tune", help="cross-validate (gamma, lambda) on a CSV dataset")
    u.add_argument("--input", type=Path, required=True)
    u.add_argument("--y-col", default=None)
    u.add_argument("--x-cols", default=None)
    _add_common(u)

    pj = sub.add_parser("power-vs-j", help="power of the random-location tests vs J")
    pj.add_argument("--dgp", default=None)
    pj.add_argument("--n", type=int, default=None)
    pj.add_argument("--d", type=int, default=None)
    pj.add_argument("--R", type=int, default=None)
    pj.add_argument("--B", type=int, default=None)
    pj.add_argument("--J-values", default=None, help="comma-separated J values")
    pj.add_argument("--level", type=float, default=None)
    _add_common(pj)

    return parser


_DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "B": 500,
    "J": 3,
    "level": 0.05,
    "R": 200,
    "n": 200,
    "d": 10,
    "gamma": "cv",
    "lam": DEFAULT_TEST_LAMBDA,
    "statistics": KRR_STATISTICS,
    "dgp": "dgp0",
    "J_values": "1,2,3,4,5,6,8,10,12,15",
}


def _resolve(args: argparse.Namespace) -> dict:
    """Built-in defaults < config file < command-line flags."""
    merged = dict(_DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            loaded = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {cfg_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InputError(f"config {cfg_path} must hold a JSON object")
        if "statistics" in loaded and isinstance(loaded["statistics"], str):
            loaded["statistics"] = _statistics_arg(loaded["statistics"])
        merged.update(loaded)
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            merged[key] = val
    if merged.get("output_dir") is None:
        merged["output_dir"] = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    merged["output_dir"] = Path(merged["output_dir"])
    for key in ("gamma", "lam"):
        v = merged.get(key)
        if v not in (None, "cv"):
            merged[key] = float(v)
    return merged


def _split_cols(value) -> tuple:
    if value is None:
        raise InputError("--x-cols is required for CSV input")
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(c.strip() for c in str(value).split(",") if c.strip())


# ---------------------------------------------------------------------------
# command implementations


def _cmd_test(opts: dict) -> int:
    out_dir = opts["output_dir"]
    cfg = RunConfig(
        statistics=tuple(opts["statistics"]),
        B=int(opts["B"]), J=int(opts["J"]), level=float(opts["level"]),
        seed=int(opts["seed"]), gamma=opts["gamma"], lam=opts["lam"],
        output_dir=out_dir,
    )
    model = opts.get("model", "ols")
    if model == "nsw":
        ds = preprocess_nsw(ingest_nsw_csv(opts["input"]))
        log.info("NSW sample: n=%d, treated=%d, control=%d",
                 ds.n, int(ds.T.sum()), int(ds.n - ds.T.sum()))
        individual, joint = run_nsw_tests(ds, cfg)
        for tag, reports in (("individual", individual), ("joint", joint)):
            for name, rep in reports.items():
                emit_report(rep, out_dir, label=f"nsw_{tag}_{name}",
                            seed=cfg.seed, extra={"model": "nsw", "phase": tag})
                print(f"nsw {tag:10s} {name:9s} p = {rep.p_value:.4f}")
        return 0

    x_cols = _split_cols(opts.get("x_cols"))
    y_col = opts.get("y_col")
    if y_col is None:
        raise InputError("--y-col is required")
    t_col = opts.get("t_col")
    ds = ingest_csv(opts["input"], y_col=y_col, x_cols=x_cols, t_col=t_col)

    if model == "ols":
        fm = fit_ols(ds.X, ds.Y)
    else:
        if ds.T is None:
            raise InputError(f"model {model!r} needs --t-col")
        fm = fit_probit(ds.X, ds.T)
        if model == "probit_cate_joint":
            fm = joint_cate_residuals(ds.X, ds.Y, ds.T, fm)
    reports = run_statistic_suite(fm, ds.X, cfg, label=f"test-{model}")
    for name, rep in reports.items():
        emit_report(rep, out_dir, label=f"test_{model}_{name}", seed=cfg.seed,
                    extra={"model": model, "input": str(opts["input"])})
        print(f"{model} {name:9s} stat = {rep.statistic.value:.6g}  "
              f"p = {rep.p_value:.4f}")
    return 0


def _cmd_simulate(opts: dict) -> int:
    out_dir = opts["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = []
    for dgp_id in str(opts["dgp"]).split(","):
        dgp_id = dgp_id.strip()
        spec = ExperimentSpec(
            dgp=DgpSpec(id=dgp_id, n=int(opts["n"]), d=int(opts["d"])),
            statistics=tuple(opts["statistics"]),
            R=int(opts["R"]), B=int(opts["B"]), J=int(opts["J"]),
            level=float(opts["level"]), master_seed=int(opts["seed"]),
        )
        cell = run_cell(spec, workers=int(opts["workers"]))
        cells.append(cell)
        for name in spec.statistics:
            print(f"{dgp_id} n={spec.dgp.n} d={spec.dgp.d} {name:9s} "
                  f"reject = {cell.rejection[name]:.3f} "
                  f"(se {cell.mcse[name]:.3f})")
    path = write_cell_csv(cells, out_dir / "simulate_cells.csv")
    print(f"wrote {path}")
    return 0


def _cmd_witness(opts: dict) -> int:
    out_dir = opts["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = _seed_streams(int(opts["seed"]), ("data", "tune", "locations"))
    if opts.get("input"):
        if opts.get("y_col") is None:
            raise InputError("--y-col is required with --input")
        ds = ingest_csv(opts["input"], y_col=opts["y_col"],
                        x_cols=_split_cols(opts.get("x_cols")))
        eps = fit_ols(ds.X, ds.Y).residuals
        X = ds.X
    else:
        dgp_id = str(opts.get("dgp") or "")
        if not dgp_id.startswith("fig1"):
            raise InputError("witness --dgp expects a fig1 DGP id")
        ds = generate(DgpSpec(id=dgp_id, n=int(opts["n"]), d=2, seed=seeds["data"]))
        eps = fig1_true_residuals(ds)[:, None]
        X = ds.X
    cfg = RunConfig(statistics=(), seed=int(opts["seed"]),
                    gamma=opts["gamma"], lam=opts["lam"], output_dir=out_dir)
    gamma, lam, _ = _resolve_kernel(X, eps, cfg, seeds["tune"])
    ctx = kernel_context(KernelConfig(gamma=gamma), X, lam)
    if X.shape[1] == 2:
        grid = None  # dense heatmap lattice
    else:
        # no lattice beyond d = 2: evaluate at locations sampled from the
        # fitted covariate distribution and export a flat table
        locs = sample_locations(fit_location_sampler(X), 500, seeds["locations"])
        grid = locs.points
    field = witness_field(eps, ctx, grid=grid)
    path = witness_grid_export(field, out_dir / "witness_grid.csv")
    print(f"wrote {path} (gamma={gamma:.6g}, lambda={lam:.6g})")
    return 0


def _cmd_tune(opts: dict) -> int:
    out_dir = opts["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    ds = ingest_csv(opts["input"], y_col=opts["y_col"],
                    x_cols=_split_cols(opts.get("x_cols")))
    eps = fit_ols(ds.X, ds.Y).residuals
    seeds = _seed_streams(int(opts["seed"]), ("tune",))
    grid = default_grid(ds.X, seed=seeds["tune"])
    gamma, lam, table = tune(ds.X, eps, grid)
    path = out_dir / "cv_table.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma", "lambda", "fold", "sse", "n_holdout"])
        for row in cv_table_rows(table):
            writer.writerow([format(row[0], ".17g"), format(row[1], ".17g"),
                             row[2], format(row[3], ".17g"), row[4]])
    print(f"selected gamma={gamma:.6g} lambda={lam:.6g}; wrote {path}")
    return 0


def _cmd_power_vs_j(opts: dict) -> int:
    out_dir = opts["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    J_values = [int(j) for j in str(opts["J_values"]).split(",") if j.strip()]
    spec = ExperimentSpec(
        dgp=DgpSpec(id=str(opts["dgp"]), n=int(opts["n"]), d=int(opts["d"])),
        statistics=("rand1", "rand2"),
        R=int(opts["R"]), B=int(opts["B"]), J=J_values[0],
        level=float(opts["level"]), master_seed=int(opts["seed"]),
    )
    rows = run_power_vs_J(spec, J_values, workers=int(opts["workers"]))
    path = write_power_vs_j_csv(rows, out_dir / "power_vs_j.csv")
    for J, name, rate, se in rows:
        print(f"J={J:2d} {name:6s} power = {rate:.3f} (se {se:.3f})")
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "witness": _cmd_witness,
    "tune": _cmd_tune,
    "power-vs-j": _cmd_power_vs_j,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args)
        return _COMMANDS[args.command](opts)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except KrrCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
