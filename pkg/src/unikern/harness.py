"""Experiment harness: synthetic data, CSV ingestion, grid runs, reports.

Datasets carry X as features x samples; CSV files on disk are the
transpose (one sample per row). A run executes one solver over the
Cartesian product of hyperparameter grids, records one line per grid
point in a fixed key order, and summarizes best and average values per
metric. Reports are deterministic for a fixed config and seed except for
a single timestamp line.
"""

import csv
import itertools
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import kernels, metrics, solvers
from .errors import DataError, FactorizationError, SolverError

REPORT_FIELDS = (
    "grid_index",
    "solver",
    "kernel",
    "alpha",
    "beta",
    "gamma",
    "mu",
    "clusters",
    "max_outer",
    "tol",
    "seed",
    "iterations",
    "converged",
    "residual",
    "accuracy",
    "nmi",
    "purity",
    "warnings",
    "error",
)

GRID_KEYS = ("alpha", "beta", "gamma", "mu")


@dataclass
class Dataset:
    """X is features x samples; truth labels are optional."""

    X: np.ndarray
    truth: np.ndarray | None = None
    name: str = "dataset"

    @property
    def n(self):
        return self.X.shape[1]

    @property
    def m(self):
        return self.X.shape[0]


def gen_blobs(c, per_cluster, dim, separation, noise_sigma=1.0, seed=0):
    """Gaussian blobs with centers at mutual distance >= separation * sigma.

    Centers are rescaled so the minimal pairwise center distance equals
    separation * noise_sigma exactly; separation 0 therefore collapses all
    clusters onto one point.
    """
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((c, dim))
    dmin = 0.0
    while True:
        diff = centers[:, None, :] - centers[None, :, :]
        d = np.sqrt((diff**2).sum(axis=2))
        dmin = d[~np.eye(c, dtype=bool)].min() if c > 1 else 1.0
        if dmin > 0:
            break
        centers = rng.standard_normal((c, dim))
    if c > 1:
        centers *= separation * noise_sigma / dmin
    labels = np.repeat(np.arange(c), per_cluster)
    pts = centers[labels] + noise_sigma * rng.standard_normal(
        (labels.size, dim)
    )
    return Dataset(
        X=pts.T, truth=labels, name=f"blobs_c{c}x{per_cluster}_d{dim}"
    )


def gen_rings(n_per_ring, radii, noise_sigma=0.0, seed=0):
    """Concentric 2-d rings, angles sampled uniformly; truth = ring index."""
    rng = np.random.default_rng(seed)
    chunks, labels = [], []
    for k, r in enumerate(radii):
        theta = rng.uniform(0.0, 2.0 * np.pi, n_per_ring)
        pts = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
        pts += noise_sigma * rng.standard_normal(pts.shape)
        chunks.append(pts)
        labels.append(np.full(n_per_ring, k))
    X = np.vstack(chunks).T
    return Dataset(
        X=X, truth=np.concatenate(labels), name=f"rings_{len(radii)}"
    )


def load_csv(features_path, labels_path=None, name=None):
    """Read a samples-by-features CSV (optional header) and optional labels.

    A non-numeric first line is treated as a header and skipped. Ragged
    rows and non-numeric cells are rejected with their 1-based line
    number. The in-memory X is the transpose: features x samples.
    """
    rows = []
    width = None
    with open(features_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [cell.strip() for cell in line.split(",")]
            try:
                values = [float(cell) for cell in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                bad = next(
                    cell for cell in cells if not _is_number(cell)
                )
                raise DataError(
                    f"{features_path}:{lineno}: non-numeric cell {bad!r}"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataError(
                    f"{features_path}:{lineno}: ragged row with "
                    f"{len(values)} cells, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise DataError(f"{features_path}: no data rows")
    X = np.asarray(rows, dtype=np.float64).T
    if not np.isfinite(X).all():
        raise DataError(f"{features_path}: non-finite values present")

    truth = None
    if labels_path is not None:
        truth = load_labels(labels_path)
        if truth.size != X.shape[1]:
            raise DataError(
                f"label count mismatch: {labels_path} has {truth.size} "
                f"labels but {features_path} has {X.shape[1]} samples"
            )
    return Dataset(
        X=X, truth=truth, name=name or Path(features_path).stem
    )


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_labels(path):
    """One integer label per line."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-integer label {line!r}"
                ) from None
    if not out:
        raise DataError(f"{path}: no labels")
    return np.asarray(out, dtype=np.int64)


def write_dataset(ds, out_dir):
    """Write features.csv (one sample per row) and labels.txt if present."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fpath = out / "features.csv"
    with open(fpath, "w", encoding="utf-8") as fh:
        for col in ds.X.T:
            fh.write(",".join(repr(v) for v in col) + "\n")
    lpath = None
    if ds.truth is not None:
        lpath = out / "labels.txt"
        with open(lpath, "w", encoding="utf-8") as fh:
            for v in ds.truth:
                fh.write(f"{int(v)}\n")
    return fpath, lpath


@dataclass
class RunConfig:
    """One harness invocation: solver, kernel choice, params, grids."""

    solver: str  # scsk | scmk | tsep
    params: solvers.HyperParams
    kernel_specs: list = field(default_factory=lambda: [kernels.linear()])
    use_bank: bool = False  # standard 12-kernel bank (scmk)
    grid: dict = field(default_factory=dict)  # subset of GRID_KEYS -> lists

    def validate(self):
        if self.solver not in ("scsk", "scmk", "tsep"):
            raise ValueError(f"unknown solver {self.solver!r}")
        for key, values in self.grid.items():
            if key not in GRID_KEYS:
                raise ValueError(f"unknown grid key {key!r}")
            if not values:
                raise ValueError(f"grid list for {key!r} is empty")
        if self.solver in ("scsk", "tsep") and not self.use_bank:
            if len(self.kernel_specs) != 1:
                raise ValueError(
                    f"{self.solver} needs exactly one kernel spec"
                )


@dataclass
class Report:
    records: list
    summary: dict
    name: str

    def text(self):
        """Deterministic report body (no timestamp)."""
        lines = [f"# unikern run report: {self.name}"]
        summary = " ".join(f"{k}={v}" for k, v in self.summary.items())
        lines.append(f"summary {summary}")
        for rec in self.records:
            body = " ".join(f"{k}={_fmt(rec[k])}" for k in REPORT_FIELDS)
            lines.append(f"record {body}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _grid_points(config):
    lists = [config.grid.get(k, [getattr(config.params, k)]) for k in GRID_KEYS]
    return list(itertools.product(*lists))


def _solve_one(config, kernel_obj, point):
    params = replace(
        config.params, **dict(zip(GRID_KEYS, (float(v) for v in point)))
    )
    if config.solver == "scsk":
        return solvers.scsk(kernel_obj, params)
    if config.solver == "scmk":
        return solvers.scmk(kernel_obj, params)
    return solvers.tsep(kernel_obj, params)


def run(dataset, config):
    """Execute the configured solver over the grid and collect a report.

    Solver failures at single grid points are recorded in that record's
    error field; the sweep continues.
    """
    config.validate()
    if config.solver == "scmk":
        if config.use_bank:
            kernel_obj = kernels.standard_bank(dataset.X)
            kernel_label = "bank12"
        else:
            kernel_obj = kernels.bank_from_specs(
                dataset.X, config.kernel_specs
            )
            kernel_label = "+".join(s.label() for s in config.kernel_specs)
    else:
        spec = config.kernel_specs[0]
        kernel_obj = kernels.normalize_kernel(
            kernels.repair_psd(kernels.build_kernel(dataset.X, spec))
        )
        kernel_label = spec.label()

    records = []
    for gi, point in enumerate(_grid_points(config)):
        rec = {
            "grid_index": gi,
            "solver": config.solver,
            "kernel": kernel_label,
            "alpha": float(point[0]),
            "beta": float(point[1]),
            "gamma": float(point[2]),
            "mu": float(point[3]),
            "clusters": config.params.c,
            "max_outer": config.params.max_outer,
            "tol": config.params.tol,
            "seed": config.params.seed,
            "iterations": None,
            "converged": None,
            "residual": None,
            "accuracy": None,
            "nmi": None,
            "purity": None,
            "warnings": 0,
            "error": None,
        }
        try:
            result = _solve_one(config, kernel_obj, point)
        except (FactorizationError, SolverError, ValueError) as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
            records.append(rec)
            continue
        rec["iterations"] = result.iterations
        rec["converged"] = result.converged
        rec["residual"] = float(result.residual_trace[-1])
        rec["warnings"] = len(result.warnings)
        if dataset.truth is not None:
            rec["accuracy"] = metrics.accuracy(result.labels, dataset.truth)
            rec["nmi"] = metrics.nmi(result.labels, dataset.truth)
            rec["purity"] = metrics.purity(result.labels, dataset.truth)
        records.append(rec)

    summary = {"records": len(records)}
    summary["failed"] = sum(1 for r in records if r["error"] is not None)
    for key in ("accuracy", "nmi", "purity"):
        vals = [r[key] for r in records if r[key] is not None]
        summary[f"best_{key}"] = _fmt(max(vals)) if vals else ""
        summary[f"avg_{key}"] = _fmt(sum(vals) / len(vals)) if vals else ""
    return Report(records=records, summary=summary, name=dataset.name)


def write_report(report, out_dir):
    """Write report.txt (timestamp on its own line) and records.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat()
    rpath = out / "report.txt"
    body = report.text()
    head, _, rest = body.partition("\n")
    with open(rpath, "w", encoding="utf-8") as fh:
        fh.write(head + "\n")
        fh.write(f"# generated: {stamp}\n")
        fh.write(rest)
    cpath = out / "records.csv"
    with open(cpath, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_FIELDS)
        for rec in report.records:
            writer.writerow([_fmt(rec[k]) for k in REPORT_FIELDS])
    return rpath, cpath
