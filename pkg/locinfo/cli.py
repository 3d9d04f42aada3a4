"""
Command-line front end

    bounds sweep --family {werner|isotropic} --d INT --from R --to R --step R [--out PATH] [--format csv|json]
    bounds figure --id {1,2,3,4,7,8} [--out PATH] [--format csv|json]
    bounds sdp-check --state NAME|--file PATH (--rate R | --K R) [--mixed --ks R] [--tol R] [--copies N]
    bounds report --state NAME|--file PATH [--out PATH]

Exit codes: 0 success, 1 usage/validation error, 2 solver non-convergence.
State names: singlet, max_entangled[:d], product_pure[:d], max_mixed[:d],
werner:d:beta, isotropic:d:lam.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .bounds_engine import (
    BoundReport,
    RateParams,
    best_dual_bound,
    compute_bound_report,
    dual_bank,
    family_bound_report,
)
from .config import (
    BOUNDS_THREADS,
    DUAL_BANK_SIZE,
    FIGURE_GRID_STEP,
    FIGURE_IDS,
    FLOAT_FORMAT,
    RANDOM_SEED,
    STATE_FILE_HERMITIAN_TOL,
    STATE_FILE_PSD_TOL,
    STATE_FILE_TRACE_TOL,
    SWEEP_COLUMNS,
)
from .entanglement_measures import measure_point
from .errors import LocinfoError, ParameterRangeError, StateFileError
from .operator_core import BipartiteDims, hermiticity_gap, hermitize, tensor_power
from .sdp_solver import (
    SdpProblem,
    SdpResiduals,
    SdpResult,
    SolverOptions,
    commutant_reduce_lp,
    solve,
)
from .state_families import (
    FAMILIES,
    StateSpec,
    build_state,
    family_range,
    is_twirl_invariant,
    parse_state_name,
)
from .utils import format_seconds, load_json, parameter_grid, save_json, setup_logger, to_jsonable


logger = setup_logger("locinfo.cli", "cli.log")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

# figure id -> (family, dimensions, curve columns)
FIGURES: Dict[int, Any] = {
    1: ("werner", (3,), ["I", "B1", "B2", "rP"]),
    2: ("werner", (3, 4, 5), ["B2", "rP"]),
    3: ("isotropic", (3,), ["I", "B1", "B2", "rP"]),
    4: ("isotropic", (3, 4, 5), ["B2", "rP"]),
    7: ("werner", (5,), ["deltaB", "deltaP", "ER", "EF"]),
    8: ("isotropic", (3,), ["deltaB", "deltaP", "ER", "EF", "g_raw"]),
}

_KEY_COLUMNS = ["family", "d", "param"]


@dataclass
class SweepConfig:
    family: str
    d: int
    param_from: float
    param_to: float
    param_step: float
    columns: Optional[List[str]] = None
    fmt: str = "csv"
    out: Optional[Path] = None
    threads: Optional[int] = None
    progress: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterRangeError(f"unknown family '{self.family}', expected one of {FAMILIES}")
        if int(self.d) != self.d or self.d < 2:
            raise ParameterRangeError(f"--d must be an integer >= 2, got {self.d}")
        if not self.param_step > 0:
            raise ParameterRangeError(f"--step must be positive, got {self.param_step}")
        if self.param_from > self.param_to:
            raise ParameterRangeError(f"--from {self.param_from} exceeds --to {self.param_to}")
        lo, hi = family_range(self.family, self.d)
        if self.param_from < lo - 1e-12 or self.param_to > hi + 1e-12:
            raise ParameterRangeError(
                f"{self.family} parameter range for d={self.d} is [{lo:.12g}, {hi:.12g}], "
                f"got [{self.param_from}, {self.param_to}]")
        if self.fmt not in ("csv", "json"):
            raise ParameterRangeError(f"--format must be csv or json, got {self.fmt}")
        if self.columns:
            unknown = [c for c in self.columns if c not in SWEEP_COLUMNS]
            if unknown:
                raise ParameterRangeError(f"unknown column(s) {unknown}, expected from {SWEEP_COLUMNS}")

    def grid(self) -> List[float]:
        return parameter_grid(self.param_from, self.param_to, self.param_step)

    def output_columns(self) -> List[str]:
        if not self.columns:
            return list(SWEEP_COLUMNS)
        return _KEY_COLUMNS + [c for c in self.columns if c not in _KEY_COLUMNS]


@dataclass
class SdpCheckReport:
    state: str
    K: float
    variant: str
    Ks: float
    copies: int
    primal: float
    dual: float
    gap: float
    residuals: SdpResiduals
    iterations: int
    converged: bool
    feasible: bool
    passed: bool
    oracle: Optional[float] = None
    oracle_symmetry: Optional[str] = None
    message: str = ""
    notes: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if not self.converged:
            return EXIT_NOT_CONVERGED
        return EXIT_OK if self.passed else EXIT_USAGE


# --- sweeps and figures ---

def _clean(value: Optional[float]) -> float:
    """None -> NaN (empty CSV field); -0.0 -> 0.0."""
    if value is None:
        return float("nan")
    return float(value) + 0.0


def sweep_row(family: str, d: int, param: float) -> Dict[str, Any]:
    report = family_bound_report(family, d, param)
    row = {
        "family": family,
        "d": d,
        "param": _clean(param),
        "I": _clean(report.info_content),
        "B1": _clean(report.b1),
        "B2": _clean(report.b2),
        "rP": _clean(report.r_protocol),
        "deltaB": _clean(report.delta_b),
        "deltaP": _clean(report.delta_p),
        "ER": _clean(report.er),
        "EF": _clean(report.ef),
    }
    if family == "isotropic":
        row["g_raw"] = _clean(measure_point(family, d, param).g_raw)
    return row


def _evaluate_rows(points: Sequence[tuple], threads: Optional[int], progress: bool) -> List[Dict[str, Any]]:
    workers = threads or BOUNDS_THREADS or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        rows = executor.map(lambda point: sweep_row(*point), points)
        return list(tqdm(rows, total=len(points), disable=not progress,
                         desc="grid points", file=sys.stderr))


def run_sweep(config: SweepConfig) -> pd.DataFrame:
    """One row per grid point, assembled in grid order."""
    grid = config.grid()
    logger.info(f"Sweep {config.family} d={config.d}: {len(grid)} point(s) "
                f"over [{config.param_from}, {config.param_to}] step {config.param_step}")
    start = time.time()
    rows = _evaluate_rows([(config.family, config.d, p) for p in grid], config.threads, config.progress)
    df = pd.DataFrame(rows)[config.output_columns()]
    logger.info(f"Sweep finished in {format_seconds(time.time() - start)}")
    return df


def _figure_grid(family: str, d: int, step: float) -> List[float]:
    lo, hi = family_range(family, d)
    grid = parameter_grid(lo, hi, step)
    if hi - grid[-1] > 1e-12:
        grid.append(hi)
    return grid


def run_figure(figure_id: int, step: float = FIGURE_GRID_STEP,
               threads: Optional[int] = None, progress: bool = False) -> pd.DataFrame:
    """Curve data for one figure, in long format keyed by family, d, param."""
    if figure_id not in FIGURES:
        raise ParameterRangeError(f"unknown figure id {figure_id}, valid ids: {list(FIGURE_IDS)}")
    family, dimensions, curves = FIGURES[figure_id]
    points = [(family, d, p) for d in dimensions for p in _figure_grid(family, d, step)]
    logger.info(f"Figure {figure_id}: {family} d={list(dimensions)}, {len(points)} point(s), curves {curves}")
    rows = _evaluate_rows(points, threads, progress)
    return pd.DataFrame(rows)[_KEY_COLUMNS + curves]


def format_table(df: pd.DataFrame, fmt: str = "csv") -> str:
    """CSV with CRLF line ends and 12 significant digits, or a JSON array of row objects."""
    if fmt == "csv":
        return df.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\r\n")
    records = []
    for record in df.to_dict(orient="records"):
        records.append({k: float(FLOAT_FORMAT % v) if isinstance(v, float) and np.isfinite(v) else v
                        for k, v in record.items()})
    return json.dumps(to_jsonable(records), indent=2) + "\n"


def write_output(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"Wrote {out}")


# --- state files ---

def state_file_payload(matrix: np.ndarray, dims: BipartiteDims) -> Dict[str, Any]:
    M = np.asarray(matrix, dtype=complex)
    return {"dims": [dims.dA, dims.dB], "matrix_real": M.real.tolist(), "matrix_imag": M.imag.tolist()}


def load_state_file(path: Path) -> StateSpec:
    """
    Load an explicit state from JSON {"dims": [dA, dB], "matrix_real": [[..]], "matrix_imag": [[..]]}.

    Raises:
        StateFileError: kind "parse", "hermiticity", "positivity" or "trace"
    """
    path = Path(path)
    try:
        data = load_json(path)
    except (OSError, json.JSONDecodeError) as e:
        raise StateFileError(f"cannot read state file {path}: {e}", "parse", str(path)) from e

    try:
        dA, dB = (int(x) for x in data["dims"])
        dims = BipartiteDims(dA, dB)
        real = np.asarray(data["matrix_real"], dtype=float)
        imag = np.asarray(data.get("matrix_imag", np.zeros_like(real)), dtype=float)
        M = real + 1j * imag
    except (KeyError, TypeError, ValueError) as e:
        raise StateFileError(f"state file {path} does not match the schema: {e}", "parse", str(path)) from e
    if M.shape != (dims.dim, dims.dim):
        raise StateFileError(f"state file {path}: matrix shape {M.shape} does not match dims {dA}x{dB}",
                             "parse", str(path))

    gap = hermiticity_gap(M)
    if gap > STATE_FILE_HERMITIAN_TOL:
        raise StateFileError(f"state file {path}: matrix is not Hermitian (deviation {gap:.3e})",
                             "hermiticity", str(path))
    M = hermitize(M)
    w, v = np.linalg.eigh(M)
    if w[0] < -STATE_FILE_PSD_TOL:
        raise StateFileError(f"state file {path}: matrix is not positive semidefinite "
                             f"(min eigenvalue {w[0]:.3e})", "positivity", str(path))
    trace = float(np.real(np.trace(M)))
    if abs(trace - 1.0) > STATE_FILE_TRACE_TOL:
        raise StateFileError(f"state file {path}: trace is {trace:.12g}, expected 1", "trace", str(path))

    # tolerated noise is removed before the state enters the library
    w = np.clip(w, 0.0, None)
    M = hermitize((v * (w / w.sum())) @ v.conj().T)
    logger.info(f"Loaded {dA}x{dB} state from {path}")
    return StateSpec("explicit", dims=dims, matrix=M, label=f"file:{path.name}")


# --- sdp-check and report ---

def run_sdp_check(spec: StateSpec, rate: Optional[float] = None, K: Optional[float] = None,
                  mixed: bool = False, Ks: float = 1.0, tol: float = 1e-6, copies: int = 1,
                  opts: Optional[SolverOptions] = None, bank_size: int = DUAL_BANK_SIZE) -> SdpCheckReport:
    """
    Solve the primal fidelity SDP for ρ^{⊗copies} and certify it against the
    dual bound over a bank of D and, for twirl-invariant ρ, the commutant LP.

    With --mixed the rate is the local rate r_l and K_s fixes r_s = log2 K_s / n.
    """
    if (rate is None) == (K is None):
        raise ParameterRangeError("give exactly one of rate or K")
    rho = build_state(spec)
    rho_n, dims_n = tensor_power(rho, spec.dims, copies)
    if K is None:
        r_s = float(np.log2(Ks)) / copies if mixed else 0.0
        K = RateParams(n=copies, r=rate, dims=spec.dims, r_s=r_s).K
    variant = "mixed" if mixed else "local_only"
    problem = SdpProblem(rho=rho_n, K=K, dims=dims_n, variant=variant, Ks=Ks if mixed else 1.0)

    logger.info("=" * 60)
    logger.info(f"SDP check: {spec.describe()} copies={copies} K={K:.9g} variant={variant}")
    logger.info("=" * 60)

    result: SdpResult = solve(problem, opts)
    bank = dual_bank(rho_n, size=bank_size, rng=np.random.default_rng(RANDOM_SEED))
    dual, best_index = best_dual_bound(rho_n, K, dims_n, bank, Ks=problem.Ks if mixed else None)

    oracle, symmetry = None, None
    for candidate in ("uu", "uustar"):
        if is_twirl_invariant(rho_n, candidate, dims_n):
            oracle, symmetry = commutant_reduce_lp(problem, candidate).value, candidate
            break

    feasible = result.residuals.worst() <= (opts or SolverOptions()).feasibility_tol
    passed = feasible and result.value <= dual + tol
    if oracle is not None:
        passed = passed and abs(result.value - oracle) <= tol
    notes = [f"best dual from bank entry {best_index} ({'D = rho' if best_index == 0 else 'random'})"]
    report = SdpCheckReport(
        state=spec.describe(), K=K, variant=variant, Ks=problem.Ks, copies=copies,
        primal=result.value, dual=dual, gap=dual - result.value, residuals=result.residuals,
        iterations=result.iterations, converged=result.converged, feasible=feasible, passed=passed,
        oracle=oracle, oracle_symmetry=symmetry, message=result.message, notes=notes,
    )
    log = logger.info if passed else logger.warning
    log(f"primal {report.primal:.6f}, dual {report.dual:.6f}, gap {report.gap:.3e}, "
        f"oracle {'n/a' if oracle is None else f'{oracle:.6f}'}")
    return report


def format_sdp_check(report: SdpCheckReport) -> str:
    lines = [
        f"state       {report.state}",
        f"variant     {report.variant} (K = {report.K:.9g}, K_s = {report.Ks:.9g}, copies = {report.copies})",
        f"primal      {report.primal:.6f}",
        f"dual        {report.dual:.6f}",
        f"gap         {report.gap:.3e}",
        f"oracle      {'n/a' if report.oracle is None else f'{report.oracle:.6f} ({report.oracle_symmetry})'}",
        f"residuals   psd {report.residuals.psd_gap:.2e}  cap {report.residuals.cap_gap:.2e}  "
        f"pt {report.residuals.pt_gap:.2e}  trace {report.residuals.trace_gap:.2e}",
        f"iterations  {report.iterations}",
        f"converged   {'yes' if report.converged else 'no'} ({report.message})",
        f"result      {'PASS' if report.passed else 'FAIL'}",
    ]
    return "\n".join(lines) + "\n"


def report(spec: StateSpec) -> Dict[str, Any]:
    """BoundReport of one state as a JSON-ready dict."""
    result: BoundReport = compute_bound_report(spec)
    payload = to_jsonable(result)
    payload["dims"] = [result.dims.dA, result.dims.dB]
    return payload


# --- argument parsing ---

class BoundsArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for non-convergence here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_state_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--state", help="named state, e.g. singlet, max_entangled:3, werner:3:-0.5")
    source.add_argument("--file", type=Path, help="JSON state file")


def build_parser() -> argparse.ArgumentParser:
    parser = BoundsArgumentParser(
        prog="bounds",
        description="Bounds on localisable information and information deficit of bipartite states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="tabulate all bounds over a family parameter grid")
    sweep.add_argument("--family", required=True, choices=FAMILIES)
    sweep.add_argument("--d", required=True, type=int)
    sweep.add_argument("--from", dest="param_from", required=True, type=float)
    sweep.add_argument("--to", dest="param_to", required=True, type=float)
    sweep.add_argument("--step", dest="param_step", required=True, type=float)
    sweep.add_argument("--columns", help="comma-separated subset of " + ",".join(SWEEP_COLUMNS))
    sweep.add_argument("--out", type=Path)
    sweep.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    sweep.add_argument("--threads", type=int)
    sweep.add_argument("--progress", action="store_true")

    figure = sub.add_parser("figure", help="emit the curve data of one figure")
    figure.add_argument("--id", dest="figure_id", required=True, type=int, choices=FIGURE_IDS)
    figure.add_argument("--step", type=float, default=FIGURE_GRID_STEP)
    figure.add_argument("--out", type=Path)
    figure.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    figure.add_argument("--progress", action="store_true")

    sdp = sub.add_parser("sdp-check", help="solve the primal SDP and certify it against the dual bound")
    _add_state_source(sdp)
    budget = sdp.add_mutually_exclusive_group(required=True)
    budget.add_argument("--rate", type=float)
    budget.add_argument("--K", dest="K", type=float)
    sdp.add_argument("--mixed", action="store_true")
    sdp.add_argument("--ks", type=float, default=1.0)
    sdp.add_argument("--tol", type=float, default=1e-6)
    sdp.add_argument("--copies", type=int, default=1, choices=[1, 2])
    sdp.add_argument("--bank-size", type=int, default=DUAL_BANK_SIZE)
    sdp.add_argument("--max-iterations", type=int)
    sdp.add_argument("--json", action="store_true", help="print the report as JSON")

    rep = sub.add_parser("report", help="print the BoundReport of one state as JSON")
    _add_state_source(rep)
    rep.add_argument("--out", type=Path, help="write the report to a JSON file instead of stdout")
    return parser


def _resolve_state(args: argparse.Namespace) -> StateSpec:
    if args.file is not None:
        return load_state_file(args.file)
    return parse_state_name(args.state)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.time()
    try:
        if args.command == "sweep":
            columns = [c.strip() for c in args.columns.split(",")] if args.columns else None
            config = SweepConfig(args.family, args.d, args.param_from, args.param_to, args.param_step,
                                 columns=columns, fmt=args.fmt, out=args.out,
                                 threads=args.threads, progress=args.progress)
            write_output(format_table(run_sweep(config), config.fmt), config.out)
            code = EXIT_OK
        elif args.command == "figure":
            df = run_figure(args.figure_id, step=args.step, progress=args.progress)
            write_output(format_table(df, args.fmt), args.out)
            code = EXIT_OK
        elif args.command == "sdp-check":
            opts = SolverOptions()
            if args.max_iterations:
                opts.max_iterations = args.max_iterations
            check = run_sdp_check(_resolve_state(args), rate=args.rate, K=args.K, mixed=args.mixed,
                                  Ks=args.ks, tol=args.tol, copies=args.copies, opts=opts,
                                  bank_size=args.bank_size)
            if args.json:
                write_output(json.dumps(to_jsonable(check), indent=2) + "\n", None)
            else:
                write_output(format_sdp_check(check), None)
            code = check.exit_code
        else:
            payload = report(_resolve_state(args))
            if args.out is not None:
                save_json(payload, args.out)
                logger.info(f"Wrote {args.out}")
            else:
                write_output(json.dumps(payload, indent=2) + "\n", None)
            code = EXIT_OK
    except LocinfoError as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"bounds {args.command}: error: {e}\n")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Error in {args.command}: {e}", exc_info=True)
        return EXIT_USAGE

    logger.info(f"{args.command} completed in {format_seconds(time.time() - start)} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
