"""Command-line front end.

Every run writes its outputs and a ``manifest.json`` into ``--out``.  Exit
codes: 0 success, 2 comparison failure, 3 input error, 4 numerical accuracy.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from rmtzeta import __version__

SCHEMA_VERSION = 1
EXIT_OK, EXIT_COMPARE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_TOLERANCE = {"spacing": 0.03, "lowest": 0.05, "pair-correlation": 0.05}
ZEROS_PAIR_TOLERANCE = 0.25  # zeros at desk height: loose by necessity


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _grid(text: str) -> np.ndarray:
    lo, hi, step = (float(v) for v in text.split(":"))
    return np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmtzeta", description="Random-matrix and zeta-zero statistics.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="rmtzeta-out", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads (wall time only)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample Haar eigenangles to CSV")
    s.add_argument("--class", dest="group", required=True)
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--count", type=int, required=True)

    s = sub.add_parser("predict", help="analytic density curve and atoms")
    s.add_argument("--statistic", required=True,
                   choices=["one-level", "pair-correlation", "spacing", "lowest", "gap"])
    s.add_argument("--symmetry", default="U")
    s.add_argument("--grid", type=_grid, default="0:3:0.01", help="start:stop:step")

    s = sub.add_parser("stats", help="empirical histogram from angles or zeros")
    _source_args(s)
    s.add_argument("--statistic", required=True, choices=["spacing", "pair-correlation", "lowest"])
    s.add_argument("--bins", type=_grid, default="0:5:0.1", help="start:stop:step")

    s = sub.add_parser("compare", help="empirical statistic vs prediction, JSON report")
    _source_args(s)
    s.add_argument("--statistic", required=True, choices=["spacing", "pair-correlation", "lowest"])
    s.add_argument("--symmetry", default=None, help="defaults to the source's class")
    s.add_argument("--tolerance", type=float, default=None)

    s = sub.add_parser("moments", help="characteristic-polynomial moment table")
    s.add_argument("--class", dest="group", default="U", choices=["U", "USp", "SO-even"])
    s.add_argument("--dims", type=_int_range, default="1-20", help="e.g. 1-20 or 2,4,6")
    s.add_argument("--s", type=_float_list, default="1", help="comma-separated exponents")
    s.add_argument("--mc-count", type=int, default=0, help="Monte Carlo samples (0: none)")

    s = sub.add_parser("arith", help="arithmetic factors and conjecture tables")
    s.add_argument("--family", default="zeta", choices=["zeta", "quadratic", "hecke"])
    s.add_argument("--k", type=_int_range, default="1-4")
    s.add_argument("--prime-cutoff", type=lambda v: int(float(v)), default=100_000)
    s.add_argument("--X", type=_float_list, default="1000,1000000", help="conductor/height values")

    s = sub.add_parser("zeros", help="zeta zeros up to height T")
    s.add_argument("--T", type=float, required=True)
    return p


def _source_args(s):
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--angles", help="angle CSV written by 'sample'")
    g.add_argument("--sample", help="CLASS:DIM:COUNT sampled on the fly with --seed")
    g.add_argument("--zeros", help="zero file, one ordinate per line")
    g.add_argument("--zeros-T", type=float, help="compute zeros up to T")
    s.add_argument("--zeros-mode", default="density", choices=["log", "density"])


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _versions() -> dict:
    import scipy

    from rmtzeta._accel import HAVE_NUMBA, USE_NUMBA
    numba_version = None
    if HAVE_NUMBA:
        import numba
        numba_version = numba.__version__
    return {"rmtzeta": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba_version,
            "numba_enabled": USE_NUMBA}


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else repr(v) for v in row) + "\n")


def _load_source(args):
    """Unfolded samples, a class label and the symmetry type of the source."""
    from rmtzeta import ensembles, statistics, zeta

    if args.angles or args.sample:
        if args.angles:
            cls, _, batch = ensembles.read_angle_csv(args.angles)
        else:
            try:
                group, dim, count = args.sample.split(":")
                cls = ensembles.SymmetryClass.parse(group, int(dim))
                count = int(count)
            except ValueError as exc:
                raise InputError(f"bad --sample {args.sample!r}: {exc}") from None
            batch = ensembles.sample_angle_batch(cls, args.seed, count, threads=args.threads)
        return statistics.unfold_batch(batch), cls.label, cls.symmetry_label
    if args.zeros:
        zl = zeta.load_zeros(args.zeros)
    else:
        zl = zeta.find_zeros(args.zeros_T)
    label = f"zeros({zl.height_range[0]:g},{zl.height_range[1]:g};{args.zeros_mode})"
    return [statistics.unfold_zeros(zl, args.zeros_mode)], label, "U"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_sample(args, out: Path) -> list[Path]:
    from rmtzeta import ensembles

    cls = ensembles.SymmetryClass.parse(args.group, args.dim)
    batch = ensembles.sample_angle_batch(cls, args.seed, args.count, threads=args.threads)
    path = out / "angles.csv"
    ensembles.write_angle_csv(path, batch, cls, args.seed)
    return [path]


def cmd_predict(args, out: Path) -> list[Path]:
    from rmtzeta import kernels

    curve = kernels.predict_curve(args.statistic, args.symmetry, args.grid)
    csv, atoms = out / "curve.csv", out / "atoms.json"
    curve.write(csv, atoms)
    return [csv, atoms]


def cmd_stats(args, out: Path) -> list[Path]:
    from rmtzeta import statistics

    samples, _, _ = _load_source(args)
    if args.statistic == "spacing":
        hist = statistics.empirical_spacings(samples, args.bins)
    elif args.statistic == "lowest":
        hist = statistics.jth_lowest(samples, 1, args.bins)
    else:
        hist = statistics.pair_correlation_histogram(samples, args.bins)
    path = out / f"{args.statistic}.csv"
    hist.write(path)
    return [path]


def _pair_sup_deviation(samples, edges):
    from scipy import integrate

    from rmtzeta import kernels, statistics

    hist = statistics.pair_correlation_histogram(samples, edges)
    expected = np.array([integrate.quad(kernels.pair_correlation_density, a, b)[0] / (b - a)
                         for a, b in zip(edges[:-1], edges[1:])])
    return float(np.max(np.abs(hist.density - expected)))


def compare_statistic(samples, statistic: str, symmetry: str, coarse: bool = False) -> float:
    from rmtzeta import kernels, statistics

    if statistic == "spacing":
        return statistics.ks_distance(statistics.pooled_spacings(samples), kernels.spacing_cdf)
    if statistic == "lowest":
        lab = kernels.normalize_symmetry(symmetry)
        if lab in ("O", "O-"):
            raise InputError(f"no lowest-zero prediction for {lab}")
        return statistics.ks_distance(statistics.jth_lowest_values(samples, 1),
                                      lambda x: kernels.lowest_cdf_interp(lab, x))
    if statistic == "pair-correlation":
        # a single zero list has few pairs per bin, so it gets wider bins
        edges = (np.linspace(0.5, 3.0, 6) if coarse
                 else np.round(np.arange(0.05, 3.0 + 1e-9, 0.1), 10))
        return _pair_sup_deviation(samples, edges)
    raise InputError(f"unknown statistic {statistic!r}")


def cmd_compare(args, out: Path) -> tuple[list[Path], bool]:
    samples, label, symmetry = _load_source(args)
    is_zeros = label.startswith("zeros")
    if is_zeros and args.statistic in ("spacing", "lowest") and len(samples[0]) < 2:
        raise InputError("zero list too short")
    if is_zeros and args.statistic == "lowest":
        raise InputError("lowest-point statistic needs a family of samples, not one zero list")
    symmetry = args.symmetry or symmetry
    distance = compare_statistic(samples, args.statistic, symmetry, coarse=is_zeros)
    tol = args.tolerance
    if tol is None:
        tol = (ZEROS_PAIR_TOLERANCE if is_zeros and args.statistic == "pair-correlation"
               else DEFAULT_TOLERANCE[args.statistic])
    report = {"schema_version": SCHEMA_VERSION, "statistic": args.statistic, "class": label,
              "symmetry": symmetry, "n_samples": len(samples), "distance": distance,
              "tolerance": tol, "pass": bool(distance < tol)}
    path = out / "report.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    return [path], report["pass"]


def cmd_moments(args, out: Path) -> list[Path]:
    from rmtzeta import ensembles, moments

    header = ["class", "dim", "s", "closed_form"]
    if args.mc_count:
        header += ["mc_mean", "mc_stderr"]
    rows = []
    for dim in args.dims:
        cls = ensembles.SymmetryClass.parse(args.group, dim)
        for s in args.s:
            row = [cls.group.value, dim, s, moments.closed_form_moment(cls, s)]
            if args.mc_count:
                row += list(moments.mc_moment(cls, s, count=args.mc_count, seed=args.seed,
                                              threads=args.threads))
            rows.append(row)
    path = out / "moments.csv"
    _write_csv(path, header, rows)
    return [path]


def cmd_arith(args, out: Path) -> list[Path]:
    from rmtzeta import arithmetic

    fam = arithmetic.FAMILIES[args.family]
    rows, table = [], []
    for k in args.k:
        res = arithmetic.arithmetic_factor(args.family, k, args.prime_cutoff)
        rows.append([args.family, k, res.value, res.tail_bound, res.prime_cutoff])
        for X in args.X:
            table.append([k, X, fam.rhs(k, X, args.prime_cutoff)])
    a_path, c_path = out / "arith.csv", out / "conjecture.csv"
    _write_csv(a_path, ["family", "k", "a_k", "tail_bound", "P"], rows)
    _write_csv(c_path, ["k", "X", "rhs_value"], table)
    return [a_path, c_path]


def cmd_zeros(args, out: Path) -> list[Path]:
    from rmtzeta import zeta

    zl = zeta.find_zeros(args.T)
    for flag in zl.flags:
        print(f"warning: {flag}", file=sys.stderr)
    path = out / "zeros.txt"
    zeta.save_zeros(zl, path)
    return [path]


COMMANDS = {"sample": cmd_sample, "predict": cmd_predict, "stats": cmd_stats,
            "compare": cmd_compare, "moments": cmd_moments, "arith": cmd_arith,
            "zeros": cmd_zeros}


def _params(args) -> dict:
    out = {}
    for key, val in vars(args).items():
        if isinstance(val, np.ndarray):
            val = val.tolist()
        out[key] = val
    return out


def run(argv: list[str]) -> int:
    from rmtzeta.ensembles import EigenSolverError
    from rmtzeta.kernels import NumericalAccuracyError

    args = build_parser().parse_args(argv)
    out = Path(args.out)
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command](args, out)
    except (NumericalAccuracyError, EigenSolverError) as exc:
        print(f"numerical accuracy failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    passed = True
    if isinstance(result, tuple):
        result, passed = result
    manifest = {"subcommand": args.command, "argv": list(argv), "params": _params(args),
                "seed": args.seed, "versions": _versions(),
                "outputs": [p.name for p in result],
                "wall_time_s": time.perf_counter() - start}
    if args.command == "arith":
        manifest["note"] = ("quadratic-family rows use log D; the equivalent "
                            "log(D^(1/2)) coefficients differ by 2^(k(k+1)/2)")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if not passed:
        print(f"comparison failed: {args.statistic} distance above tolerance", file=sys.stderr)
        return EXIT_COMPARE
    return EXIT_OK


def replay(manifest_path, out=None) -> int:
    """Rerun the command recorded in a manifest, optionally into another directory."""
    manifest = json.loads(Path(manifest_path).read_text())
    argv = list(manifest["argv"])
    if out is not None:
        argv = _replace_out(argv, str(out))
    return run(argv)


def _replace_out(argv, out):
    res, skip = [], False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        res.append(tok)
    return ["--out", out] + res


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
