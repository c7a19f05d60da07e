"""Command-line experiment harness.

Subcommands reproduce the library's headline data sets and run the
verification suite:

- ``xi-grid``:   swap probability of xi(x, y) over a parameter grid, SDP
  against the closed form;
- ``sample``:    random-state survey (one CSV row per state: probability,
  entanglement measures, solver diagnostics) plus gnuplot-ready bound
  curves;
- ``eps-sweep``: the approximate-swap probability of xi(x, 1/4) across a
  list of tolerances;
- ``swap-prob``: one state from a matrix text file, reported in full;
- ``verify``:    the acceptance suite with per-criterion timing.

All randomness flows from one 64-bit master seed through per-sample derived
streams, so identical configurations produce byte-identical CSVs and
``--jobs`` only changes wall time, never content.  Numbers are serialized
with 12 significant digits.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields
from multiprocessing import Pool

import numpy as np

from .measures import concurrence, local_purity_gap, negativity, purity
from .sdpcore import STATUS_OPTIMAL
from .states import (
    DensityMatrix,
    RandomStateSpec,
    derive_stream_seed,
    random_density,
    xi_state,
)
from .swapopt import (
    analytic_p_xi,
    approx_swap_probability,
    exact_swap_probability,
    lower_bound_curve,
    upper_bound_curve,
)
from .linops import read_matrix

DEFAULT_SAMPLES = 500
DEFAULT_RANKS = (2, 3, 4)
DEFAULT_SEED = 0
DEFAULT_TOL = 1e-8
DEFAULT_EPS_LIST = (0.001, 0.01, 0.05, 0.1)
DEFAULT_GRID_STEP = 0.1

EXIT_OK = 0
EXIT_CRITERION_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_TROUBLE = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """One CLI invocation's worth of settings."""

    command: str
    samples: int = DEFAULT_SAMPLES
    ranks: tuple[int, ...] = DEFAULT_RANKS
    master_seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    eps_list: tuple[float, ...] = DEFAULT_EPS_LIST
    grid_step: float = DEFAULT_GRID_STEP
    jobs: int = 1
    out_path: str = ""
    state_path: str = ""

    def __post_init__(self) -> None:
        if self.command not in ("xi-grid", "sample", "eps-sweep", "swap-prob", "verify"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if not self.ranks or any(r not in (2, 3, 4) for r in self.ranks):
            raise ValueError(f"ranks must be a nonempty subset of 2,3,4, got {self.ranks}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master seed must be a 64-bit unsigned integer")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.eps_list or any(not 0.0 <= e <= 1.0 for e in self.eps_list):
            raise ValueError(f"eps values must lie in [0, 1], got {self.eps_list}")
        if not 0.0 < self.grid_step < 1.0:
            raise ValueError(f"grid step must lie in (0, 1), got {self.grid_step}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


@dataclass(frozen=True)
class SampleRecord:
    """One random state's row: probability, measures, solver diagnostics."""

    sample_id: int
    rank: int
    seed: int
    p: float
    concurrence: float
    negativity: float
    purity: float
    delta_p: float
    status: str
    duality_gap: float
    iterations: int
    wall_time_ms: float


# Wall time is machine noise, so it stays out of the CSV to keep identical
# configurations byte-identical; it still feeds the verify timing report.
CSV_FIELDS = tuple(f.name for f in fields(SampleRecord) if f.name != "wall_time_ms")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _cell(value) -> str:
    text = _fmt(value)
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _write_csv(path: str, header: tuple[str, ...], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _grid(start: float, stop: float, step: float) -> list[float]:
    """start, start+step, ... with the exact stop value always included."""
    vals = []
    k = 0
    while True:
        v = start + k * step
        if v >= stop - 1e-12:
            break
        vals.append(round(v, 12))
        k += 1
    vals.append(stop)
    return vals


def sample_id_for(rank: int, index: int, samples: int) -> int:
    """Global sample id: rank-major, stable whether or not all ranks run."""
    return (rank - 2) * samples + index


def evaluate_sample(task: tuple[int, int, int, float]) -> SampleRecord:
    """Solve one random state end to end (top-level so worker pools can use it)."""
    rank, sample_id, master_seed, tol = task
    seed = derive_stream_seed(master_seed, sample_id)
    rho = random_density(RandomStateSpec(rank=rank, seed=seed))
    t0 = time.perf_counter()
    res = exact_swap_probability(rho, tol=tol)
    ms = 1e3 * (time.perf_counter() - t0)
    return SampleRecord(
        sample_id=sample_id,
        rank=rank,
        seed=seed,
        p=res.probability,
        concurrence=concurrence(rho),
        negativity=negativity(rho),
        purity=purity(rho),
        delta_p=local_purity_gap(rho),
        status=res.status,
        duality_gap=res.duality_gap,
        iterations=res.iterations,
        wall_time_ms=ms,
    )


def run_sample_batch(cfg: ExperimentConfig) -> list[SampleRecord]:
    """All requested (rank, index) samples, ordered by sample_id."""
    tasks = [(rank, sample_id_for(rank, j, cfg.samples), cfg.master_seed, cfg.tol)
             for rank in sorted(cfg.ranks) for j in range(cfg.samples)]
    if cfg.jobs > 1:
        with Pool(cfg.jobs) as pool:
            records = pool.map(evaluate_sample, tasks, chunksize=8)
    else:
        records = [evaluate_sample(t) for t in tasks]
    return sorted(records, key=lambda r: r.sample_id)


def _write_bound_curves(out_path: str) -> None:
    """Gnuplot-ready companions to a sample CSV: the two bound curves."""
    stem = out_path[:-4] if out_path.endswith(".csv") else out_path
    xs = np.linspace(0.0, 1.0, 1001)
    with open(stem + "_lower_bound.dat", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# concurrence p_lower\n")
        for c in xs:
            fh.write(f"{c:.12g} {lower_bound_curve(float(c)):.12g}\n")
    # 491 points = 0.001 spacing; the curve's domain is [0, 1/2) so it stops
    # short of the pole at 0.5.
    with open(stem + "_upper_bound.dat", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# delta_p p_upper\n")
        for dp in np.linspace(0.0, 0.49, 491):
            fh.write(f"{dp:.12g} {upper_bound_curve(float(dp)):.12g}\n")


def cmd_sample(cfg: ExperimentConfig) -> list[SampleRecord]:
    records = run_sample_batch(cfg)
    out = cfg.out_path or "samples.csv"
    _write_csv(out, CSV_FIELDS,
               ([getattr(r, f) for f in CSV_FIELDS] for r in records))
    _write_bound_curves(out)
    return records


def cmd_xi_grid(cfg: ExperimentConfig) -> list[tuple]:
    vals = _grid(0.0, 1.0, cfg.grid_step)
    rows = []
    for x in vals:
        for y in vals:
            p_sdp = exact_swap_probability(xi_state(x, y), tol=cfg.tol).probability
            p_ref = analytic_p_xi(x, y)
            rows.append((x, y, p_sdp, p_ref, abs(p_sdp - p_ref)))
    out = cfg.out_path or "xi_grid.csv"
    _write_csv(out, ("x", "y", "p_sdp", "p_analytic", "abs_diff"), rows)
    return rows


def cmd_eps_sweep(cfg: ExperimentConfig) -> list[tuple]:
    xs = _grid(0.5, 1.0, cfg.grid_step)
    rows = []
    for eps in cfg.eps_list:
        for x in xs:
            p = approx_swap_probability(xi_state(x, 0.25), eps, tol=cfg.tol).probability
            rows.append((eps, x, p))
    out = cfg.out_path or "eps_sweep.csv"
    _write_csv(out, ("eps", "x", "p"), rows)
    return rows


def cmd_swap_prob(cfg: ExperimentConfig) -> int:
    if not cfg.state_path:
        print("error: swap-prob requires --state FILE", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        m = read_matrix(cfg.state_path)
        rho = DensityMatrix(m)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    res = exact_swap_probability(rho, tol=cfg.tol)
    print(f"p {_fmt(res.probability)}")
    print(f"concurrence {_fmt(concurrence(rho))}")
    print(f"negativity {_fmt(negativity(rho))}")
    print(f"purity {_fmt(purity(rho))}")
    print(f"delta_p {_fmt(local_purity_gap(rho))}")
    print(f"status {res.status}")
    print(f"duality_gap {_fmt(res.duality_gap)}")
    print(f"iterations {res.iterations}")
    return EXIT_OK if res.status == STATUS_OPTIMAL else EXIT_SOLVER_TROUBLE


def cmd_verify(cfg: ExperimentConfig) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(cfg)
    failures = 0
    for r in results:
        verdict = "PASS" if r.ok else "FAIL"
        print(f"criterion {r.number:2d}: {verdict} ({r.seconds:.1f} s)  {r.detail}")
        failures += 0 if r.ok else 1
    total = sum(r.seconds for r in results)
    print(f"{len(results) - failures}/{len(results)} criteria passed in {total:.1f} s")
    return EXIT_CRITERION_FAILURE if failures else EXIT_OK


def _parse_ranks(text: str) -> tuple[int, ...]:
    try:
        ranks = tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad ranks list {text!r}") from exc
    return ranks


def _parse_eps_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pptswap",
        description="Optimal two-qubit swap probability experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("xi-grid", "SDP vs closed form for xi(x, y) over a grid"),
        ("sample", "random-state survey CSV plus bound-curve files"),
        ("eps-sweep", "approximate swap probability across tolerances"),
        ("swap-prob", "one state from a matrix text file"),
        ("verify", "run the acceptance suite"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                       help="samples per rank (default %(default)s)")
        p.add_argument("--ranks", type=_parse_ranks, default=DEFAULT_RANKS,
                       metavar="2,3,4", help="comma-separated ranks (default 2,3,4)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="64-bit master seed (default %(default)s)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="solver tolerance (default %(default)s)")
        p.add_argument("--eps-list", type=_parse_eps_list, default=DEFAULT_EPS_LIST,
                       metavar="R[,R...]", help="tolerances for eps-sweep")
        p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP,
                       help="grid spacing (default %(default)s)")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes (default %(default)s)")
        p.add_argument("--out", default="", help="output CSV path")
        p.add_argument("--state", default="", help="state matrix file (swap-prob)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig(
            command=args.command,
            samples=args.samples,
            ranks=tuple(args.ranks),
            master_seed=args.seed,
            tol=args.tol,
            eps_list=tuple(args.eps_list),
            grid_step=args.grid_step,
            jobs=args.jobs,
            out_path=args.out,
            state_path=args.state,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        if cfg.command == "xi-grid":
            cmd_xi_grid(cfg)
            return EXIT_OK
        if cfg.command == "sample":
            cmd_sample(cfg)
            return EXIT_OK
        if cfg.command == "eps-sweep":
            cmd_eps_sweep(cfg)
            return EXIT_OK
        if cfg.command == "swap-prob":
            return cmd_swap_prob(cfg)
        return cmd_verify(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
