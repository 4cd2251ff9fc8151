"""Command-line front end.

Every subcommand writes into an output directory (``--out``) and leaves a
``manifest.json`` there recording the arguments, seed, library versions and a
digest of each output file; ``replay`` re-runs a manifest and checks the
digests.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .data import (
    DataError, MultiViewDataset, ScalingParams, binary_view, load_class_labels, load_multiview_csv,
    minmax_scale, one_vs_one_pairs, write_labels, write_matrix, _read_matrix,
)
from .eval import (
    PRESET_GRID, RULES, accuracy, average_ranks, cross_validate, cross_validate_wltsvm, friedman_p_value,
    friedman_statistic, grid_search, nemenyi_cd,
)
from .eval.stats import Q_ALPHA_005
from .graphs import GraphError, build_graphs
from .kernels import KernelSpec
from .model import ModelFormatError, fit, load_model, save_model, solve_direction
from .params import Hyperparameters
from .qp.dual import AssemblyError, SingularMatrixError, design_matrices
from .qp.solver import QpError

log = logging.getLogger("mpwtsvm")

DEFAULT_SEED = 20230
MANIFEST = "manifest.json"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_DATA = 4
EXIT_OUTPUT_EXISTS = 5
EXIT_MODEL_FORMAT = 6
EXIT_SOLVER = 7
EXIT_FIT = 8
EXIT_REPLAY_MISMATCH = 9


class UsageError(Exception):
    pass


class OutputExistsError(Exception):
    pass


class ReplayMismatch(Exception):
    pass


ERROR_CODES = (
    (UsageError, EXIT_USAGE),
    (FileNotFoundError, EXIT_MISSING_FILE),
    (DataError, EXIT_DATA),
    (OutputExistsError, EXIT_OUTPUT_EXISTS),
    (ModelFormatError, EXIT_MODEL_FORMAT),
    (QpError, EXIT_SOLVER),
    (SingularMatrixError, EXIT_FIT),
    (AssemblyError, EXIT_FIT),
    (GraphError, EXIT_FIT),
    (ReplayMismatch, EXIT_REPLAY_MISMATCH),
)


# --- argument types ---------------------------------------------------------

def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _int(text: str) -> int:
    """Integer that may be written in scientific notation, e.g. 1e3."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _float_list(text: str) -> list[float]:
    return [_float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [_int(t) for t in text.split(",") if t.strip()]


# --- output handling --------------------------------------------------------

class Outputs:
    """Output directory that refuses to overwrite without --force."""

    def __init__(self, directory, force: bool):
        self.dir = Path(directory)
        self.force = force
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        if p.exists() and not self.force:
            raise OutputExistsError(f"{p} exists; pass --force to overwrite")
        return p

    def claim(self, *names: str) -> None:
        """Check every planned output up front so a run never half-overwrites a directory."""
        for name in names:
            self.path(name)
        self.dir.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str) -> Path:
        p = self.path(name)
        self.dir.mkdir(parents=True, exist_ok=True)
        p.write_text(content)
        self.written.append(name)
        return p

    def done(self, name: str) -> Path:
        self.written.append(name)
        return self.dir / name


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "mpwtsvm": own}


def _write_manifest(out: Outputs, args, argv: list[str]) -> None:
    recorded = {k: v for k, v in vars(args).items() if k not in ("func", "out", "force")}
    doc = {
        "command": args.command,
        "argv": argv,
        "arguments": recorded,
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "outputs": {name: _digest(out.dir / name) for name in sorted(set(out.written))},
    }
    (out.dir / MANIFEST).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


# --- shared argument groups -------------------------------------------------

def _add_data(p, labels_required=True):
    p.add_argument("--view-a", required=True, help="CSV of view-A features, one sample per row")
    p.add_argument("--view-b", required=True, help="CSV of view-B features")
    p.add_argument("--labels", required=labels_required, help="one +1/-1 label per line")


def _add_out(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _add_hyper(p):
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--penalty", type=_float, help="set all six penalties at once")
    for name in ("c-a", "c-b", "c", "c-a2", "c-b2", "c-2"):
        g.add_argument(f"--{name}", type=_float)
    g.add_argument("--gamma", type=_float, default=1.0)
    g.add_argument("--gamma2", type=_float, help="trade-off of the negative problem (default: --gamma)")
    g.add_argument("--k", type=_int, default=5, help="neighbors in the KNN graphs")
    g.add_argument("--kernel", choices=("none", "linear", "rbf"), default="none",
                   help="none = linear formulation on raw features")
    g.add_argument("--sigma", type=_float, default=1.0, help="RBF width")
    g.add_argument("--sigma-b", type=_float, help="independent RBF width for view B")
    g.add_argument("--eps-reg", type=_float, default=1e-6)
    g.add_argument("--convexify", action="store_true", help="shift the slack blocks so H is PSD")
    g.add_argument("--tol", type=_float, default=1e-7, help="KKT residual tolerance")
    g.add_argument("--max-iter", type=_int)
    g.add_argument("--no-prune", action="store_true", help="keep constraints whose indicator is 0")


def _kernel(args) -> KernelSpec | None:
    if args.kernel == "none":
        return None
    return KernelSpec(args.kernel, args.sigma)


def _hyper(args) -> Hyperparameters:
    pen = {}
    for name in ("c_a", "c_b", "c", "c_a2", "c_b2", "c_2"):
        v = getattr(args, name)
        pen[name] = v if v is not None else (args.penalty if args.penalty is not None else 1.0)
    kernel = _kernel(args)
    kernel_b = None
    if args.sigma_b is not None:
        if kernel is None or kernel.kind != "rbf":
            raise UsageError("--sigma-b needs --kernel rbf")
        kernel_b = KernelSpec("rbf", args.sigma_b)
    try:
        return Hyperparameters(
            **pen, gamma=args.gamma, gamma2=args.gamma2, k=args.k, eps_reg=args.eps_reg, kernel=kernel,
            kernel_b=kernel_b, convexify=args.convexify, tol=args.tol, max_iter=args.max_iter,
            prune=not args.no_prune,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args) -> MultiViewDataset:
    return load_multiview_csv(args.view_a, args.view_b, args.labels)


# --- subcommands ------------------------------------------------------------

def _read_views(args) -> tuple[np.ndarray, np.ndarray]:
    xa, xb = _read_matrix(args.view_a), _read_matrix(args.view_b)
    if xa.shape[0] != xb.shape[0]:
        raise DataError("row-count mismatch between views")
    return xa, xb


def cmd_scale(args, out: Outputs) -> None:
    if args.labels:
        _load(args)  # validates the label file against the views
    xa, xb = _read_views(args)
    if args.params:
        scaling = ScalingParams.from_dict(json.loads(Path(args.params).read_text()))
    else:
        _, scaling = minmax_scale(MultiViewDataset(xa, xb, np.ones(xa.shape[0])))
    out.claim("view_a.csv", "view_b.csv", "scaling.json")
    write_matrix(out.done("view_a.csv"), scaling.transform_view(xa, "A"))
    write_matrix(out.done("view_b.csv"), scaling.transform_view(xb, "B"))
    out.text("scaling.json", json.dumps(scaling.to_dict(), indent=1, sort_keys=True) + "\n")


def _dump_qp(out: Outputs, ds, params) -> None:
    graphs = build_graphs(ds, params.k)
    designs, _ = design_matrices(ds, params.kernel_for("A"), params.kernel_for("B"))
    for direction in ("positive", "negative"):
        asm, _, _ = solve_direction(ds, graphs, params, direction, designs)
        for name in ("H", "p", "A", "b"):
            fname = f"qp_{direction}_{name}.csv"
            write_matrix(out.path(fname), np.atleast_2d(getattr(asm.qp, name)))
            out.done(fname)


def cmd_train(args, out: Outputs) -> None:
    ds = _load(args)
    params = _hyper(args)
    out.claim("model.json")
    if args.no_scale:
        scaled, scaling = ds, None
    else:
        scaled, scaling = minmax_scale(ds)
    model = fit(scaled, params, scaling)
    save_model(model, out.path("model.json"))
    out.done("model.json")
    if args.dump_qp:
        _dump_qp(out, scaled, params)
    train_acc = accuracy(model.predict_combined(ds.view_a, ds.view_b), ds.labels)
    print(f"trained model.json (training accuracy, combined rule: {train_acc:.4f})")


def cmd_predict(args, out: Outputs) -> None:
    model = load_model(args.model)
    xa, xb = _read_views(args)
    try:
        pred = model.predict_all(xa, xb)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out.claim("predictions.csv")
    if args.all_rules:
        rows = [list(RULES)] + [[f"{int(pred[r][i]):+d}" for r in RULES] for i in range(xa.shape[0])]
        out.text("predictions.csv", _csv_text(rows))
    else:
        write_labels(out.done("predictions.csv"), pred[args.rule])
    if args.labels:
        truth = _load(args).labels
        for r in RULES:
            print(f"accuracy {r}: {accuracy(pred[r], truth):.4f}")


def _cv_rows(cv) -> list:
    rows = [["fold", "n_test", "acc_A", "acc_B", "acc_combined"]]
    for i, (f, n) in enumerate(zip(cv.folds, cv.test_sizes)):
        rows.append([i, n] + [float(f[r]) for r in RULES])
    rows.append(["mean", sum(cv.test_sizes)] + [cv.mean[r] for r in RULES])
    rows.append(["std", sum(cv.test_sizes)] + [cv.std[r] for r in RULES])
    return rows


def cmd_cv(args, out: Outputs) -> None:
    ds = _load(args)
    params = _hyper(args)
    out.claim("cv.csv")
    cv = cross_validate(ds, params, args.folds, args.seed)
    out.text("cv.csv", _csv_text(_cv_rows(cv)))
    print(f"mean accuracy  A {cv.mean['A']:.4f}  B {cv.mean['B']:.4f}  combined {cv.mean['combined']:.4f}"
          f"  (best rule on validation folds: {cv.best_rule})")


def _grid_from(args) -> dict:
    grid = {
        "penalty": args.penalty_grid or PRESET_GRID["penalty"],
        "gamma": args.gamma_grid or PRESET_GRID["gamma"],
    }
    if args.kernel == "rbf":
        grid["sigma"] = args.sigma_grid or PRESET_GRID["sigma"]
    elif args.sigma_grid:
        raise UsageError("--sigma-grid needs --kernel rbf")
    grid["k"] = args.k_grid or PRESET_GRID["k"]
    return grid


def cmd_grid(args, out: Outputs) -> None:
    ds = _load(args)
    grid = _grid_from(args)
    kernel = None if args.kernel == "none" else KernelSpec(args.kernel)
    base = Hyperparameters(kernel=kernel, eps_reg=args.eps_reg, convexify=args.convexify, tol=args.tol)
    out.claim("grid.csv", "best.json", "model.json")
    t0 = time.perf_counter()
    result = grid_search(ds, grid, args.folds, args.seed, base, jobs=args.jobs)
    keys = list(grid)
    rows = [["index"] + keys + ["mean_A", "mean_B", "mean_combined", "std_combined", "error"]]
    for r in result.records:
        vals = [float(r.point[k]) if k != "k" else int(r.point[k]) for k in keys]
        if r.cv is None:
            rows.append([r.index] + vals + ["", "", "", "", r.error])
        else:
            rows.append([r.index] + vals + [r.cv.mean["A"], r.cv.mean["B"], r.cv.mean["combined"],
                                            r.cv.std["combined"], ""])
    out.text("grid.csv", _csv_text(rows))
    best = {"index": result.best_index, "point": result.best_point, "params": result.best_params.to_dict(),
            "cv": result.best.cv.to_dict()}
    out.text("best.json", json.dumps(best, indent=1, sort_keys=True) + "\n")
    scaled, scaling = minmax_scale(ds)
    save_model(fit(scaled, result.best_params, scaling), out.path("model.json"))
    out.done("model.json")
    print(f"best grid point #{result.best_index}: {result.best_point}  mean combined accuracy "
          f"{result.best.cv.mean['combined']:.4f}  ({time.perf_counter() - t0:.1f} s)")


BENCH_ALGORITHMS = ("MPWTSVM", "WLTSVM-A", "WLTSVM-B", "WLTSVM-AB")


def _bench_tasks(args):
    """(task name, binary dataset) pairs; one-vs-one over integer classes with --multiclass."""
    if not args.multiclass:
        yield "task", _load(args)
        return
    xa, xb = _read_matrix(args.view_a), _read_matrix(args.view_b)
    labels = load_class_labels(args.labels)
    if not (xa.shape[0] == xb.shape[0] == labels.shape[0]):
        raise DataError("row-count mismatch")
    for a, b, idx in one_vs_one_pairs(labels):
        yield f"{a}v{b}", MultiViewDataset(xa[idx], xb[idx], binary_view(labels[idx], a, b))


def _bench_unit(unit):
    name, ds, params, folds, seed = unit
    timings, results = {}, {}
    t = time.perf_counter()
    results["MPWTSVM"] = cross_validate(ds, params, folds, seed)
    timings["MPWTSVM"] = time.perf_counter() - t
    for view in ("A", "B", "AB"):
        t = time.perf_counter()
        results[f"WLTSVM-{view}"] = cross_validate_wltsvm(
            ds, view, params.c_a, params.k, params.kernel, folds, seed, eps_reg=params.eps_reg, tol=params.tol,
        )
        timings[f"WLTSVM-{view}"] = time.perf_counter() - t
    return name, results, timings


def cmd_bench(args, out: Outputs) -> None:
    params = _hyper(args)
    if args.sigma_b is not None:
        raise UsageError("bench uses one kernel for every algorithm; drop --sigma-b")
    out.claim("bench.csv", "accuracy.csv", "timing.csv")
    units = [(name, ds, params, args.folds, args.seed) for name, ds in _bench_tasks(args)]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = list(pool.map(_bench_unit, units))
    else:
        done = [_bench_unit(u) for u in units]
    rows = [["task", "algorithm", "rule", "fold", "accuracy"]]
    acc_rows = [["task"] + list(BENCH_ALGORITHMS)]
    time_rows = [["task"] + list(BENCH_ALGORITHMS)]
    for name, results, timings in done:
        mp = results["MPWTSVM"]
        for rule in RULES:
            for i, f in enumerate(mp.folds):
                rows.append([name, "MPWTSVM", rule, i, float(f[rule])])
            rows.append([name, "MPWTSVM", rule, "mean", mp.mean[rule]])
        for alg in BENCH_ALGORITHMS[1:]:
            for i, f in enumerate(results[alg].folds):
                rows.append([name, alg, "single", i, float(f["single"])])
            rows.append([name, alg, "single", "mean", results[alg].mean["single"]])
        # the multi-view rule is chosen on the validation folds, as for every other setting
        acc_rows.append([name, mp.mean[mp.best_rule]] + [results[a].mean["single"] for a in BENCH_ALGORITHMS[1:]])
        time_rows.append([name] + [timings[a] for a in BENCH_ALGORITHMS])
    out.text("bench.csv", _csv_text(rows))
    out.text("accuracy.csv", _csv_text(acc_rows))
    out.text("timing.csv", _csv_text(time_rows))
    means = np.array([r[1:] for r in acc_rows[1:]], dtype=float).mean(axis=0)
    for alg, m in zip(BENCH_ALGORITHMS, means):
        print(f"{alg:10s} mean accuracy {m:.4f}")


def _read_table(path) -> tuple[list[str], np.ndarray]:
    """Header of algorithm names (optionally led by a label column) and numeric rows."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: needs a header row and at least one data row")
    header, body = rows[0], rows[1:]

    def numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    skip = 0 if all(numeric(c) for c in body[0]) else 1
    names = header[skip:]
    try:
        values = np.array([[float(c) for c in r[skip:]] for r in body], dtype=float)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell") from None
    if values.ndim != 2 or values.shape[1] != len(names):
        raise DataError(f"{path}: ragged rows")
    return names, values


def cmd_stats(args, out: Outputs) -> None:
    if (args.accuracy is None) == (args.ranks is None):
        raise UsageError("give exactly one of --accuracy or --ranks")
    out.claim("stats.csv", "stats.txt")
    if args.accuracy:
        names, acc = _read_table(args.accuracy)
        try:
            table = average_ranks(acc)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        avg, n = table.average, table.n_datasets
    else:
        if args.datasets is None:
            raise UsageError("--ranks needs --datasets")
        names, values = _read_table(args.ranks)
        if values.shape[0] != 1:
            raise DataError("rank file must hold exactly one row of average ranks")
        avg, n = values[0], args.datasets
    k = len(names)
    if k < 2:
        raise DataError("need at least two algorithms")
    q = args.q if args.q is not None else Q_ALPHA_005.get(k)
    if q is None:
        raise UsageError(f"no built-in q_alpha for k={k}; pass --q")
    chi2_f = friedman_statistic(avg, n, k)
    p_value = friedman_p_value(chi2_f, k)
    cd = nemenyi_cd(k, n, q)
    rows = [["algorithm", "average_rank"]] + [[a, float(r)] for a, r in zip(names, avg)]
    rows += [["N", n], ["k", k], ["chi2_F", chi2_f], ["p_value", p_value], ["q_alpha", float(q)], ["CD", cd]]
    out.text("stats.csv", _csv_text(rows))
    best = float(np.min(avg))
    lines = [f"Friedman chi2_F = {chi2_f:.4f} (k={k}, N={n}, p = {p_value:.3g})",
             f"Nemenyi CD = {cd:.4f} (q_alpha = {q})"]
    for a, r in sorted(zip(names, avg), key=lambda t: t[1]):
        mark = "" if r - best <= cd else "  differs significantly from the best"
        lines.append(f"  {a:12s} {r:.3f}{mark}")
    text = "\n".join(lines) + "\n"
    out.text("stats.txt", text)
    sys.stdout.write(text)


def cmd_replay(args, out: Outputs) -> None:
    doc = json.loads(Path(args.manifest).read_text()) if Path(args.manifest).is_file() else None
    if doc is None:
        raise FileNotFoundError(f"no such manifest: {args.manifest}")
    argv = list(doc["argv"])
    # redirect the outputs, keep every other argument
    for i, tok in enumerate(argv):
        if tok == "--out" and i + 1 < len(argv):
            argv[i + 1] = str(out.dir)
        elif tok.startswith("--out="):
            argv[i] = f"--out={out.dir}"
    if "--force" not in argv and args.force:
        argv.append("--force")
    code = main(argv)
    if code != EXIT_OK:
        raise ReplayMismatch(f"replayed run exited with status {code}")
    mismatched = [
        name for name, digest in doc["outputs"].items()
        if name not in ("timing.csv",) and _digest(out.dir / name) != digest
    ]
    if mismatched:
        raise ReplayMismatch(f"outputs differ from the manifest: {', '.join(mismatched)}")
    print(f"replay reproduced {len(doc['outputs'])} output file(s)")


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpwtsvm", description="Multi-view weighted twin SVM toolkit",
                                     allow_abbrev=False)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log solver progress and fallbacks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scale", help="min-max scale both views", allow_abbrev=False, parents=[common])
    _add_data(p, labels_required=False)
    p.add_argument("--params", help="apply a saved scaling.json instead of fitting one")
    _add_out(p)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("train", help="fit a model on the full data", allow_abbrev=False, parents=[common])
    _add_data(p)
    _add_hyper(p)
    p.add_argument("--no-scale", action="store_true", help="data is already scaled")
    p.add_argument("--dump-qp", action="store_true", help="also write H, p, A, b of both duals as CSV")
    _add_out(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label samples with a saved model", allow_abbrev=False, parents=[common])
    _add_data(p, labels_required=False)
    p.add_argument("--model", required=True)
    p.add_argument("--rule", choices=RULES, default="combined")
    p.add_argument("--all-rules", action="store_true", help="write all three decision rules")
    _add_out(p)
    p.set_defaults(func=cmd_predict)

    for name, func, help_ in (("cv", cmd_cv, "stratified k-fold cross-validation"),
                              ("bench", cmd_bench, "MPWTSVM against single-view WLTSVM")):
        p = sub.add_parser(name, help=help_, allow_abbrev=False, parents=[common])
        _add_data(p)
        _add_hyper(p)
        p.add_argument("--folds", type=_int, default=5)
        p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
        if name == "bench":
            p.add_argument("--multiclass", action="store_true",
                           help="labels are integer classes; run one task per class pair")
            p.add_argument("--jobs", type=_int, default=1)
        _add_out(p)
        p.set_defaults(func=func)

    p = sub.add_parser("grid", help="grid search with cross-validation", allow_abbrev=False, parents=[common])
    _add_data(p)
    p.add_argument("--penalty-grid", type=_float_list, help="comma list (default 1e-3..1e3)")
    p.add_argument("--gamma-grid", type=_float_list)
    p.add_argument("--sigma-grid", type=_float_list)
    p.add_argument("--k-grid", type=_int_list, help="comma list (default 3,5,7,9,11)")
    p.add_argument("--kernel", choices=("none", "linear", "rbf"), default="rbf")
    p.add_argument("--eps-reg", type=_float, default=1e-6)
    p.add_argument("--convexify", action="store_true")
    p.add_argument("--tol", type=_float, default=1e-7)
    p.add_argument("--folds", type=_int, default=5)
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=_int, default=1)
    _add_out(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("stats", help="Friedman and Nemenyi tests", allow_abbrev=False, parents=[common])
    p.add_argument("--accuracy", help="CSV: header of algorithm names, one row per dataset")
    p.add_argument("--ranks", help="CSV: header of algorithm names, one row of average ranks")
    p.add_argument("--datasets", type=_int, help="number of datasets behind --ranks")
    p.add_argument("--q", type=_float, help="q_alpha (default: alpha=0.05 table)")
    _add_out(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replay", help="re-run a manifest and verify its outputs", allow_abbrev=False, parents=[common])
    p.add_argument("--manifest", required=True)
    _add_out(p)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    out = Outputs(args.out, args.force)
    try:
        args.func(args, out)
        if args.command != "replay":
            _write_manifest(out, args, argv)
    except Exception as exc:
        for cls, code in ERROR_CODES:
            if isinstance(exc, cls):
                print(f"mpwtsvm {args.command}: error: {exc}", file=sys.stderr)
                return code
        print(f"mpwtsvm {args.command}: unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
