"""Command-line surface for reproducible experiments.

Every subcommand validates its inputs before computing, writes CSV
artifacts atomically (never partial files), and stamps each CSV with a
comment line carrying a hash of the effective configuration, so identical
configurations produce byte-identical artifacts.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 resource
limit, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baseline, circuits, cvrp, optimize, partitions, qwoa
from .errors import ResourceLimitError, ValidationError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4

OUT_DIR_ENV = "QWOA_CVRP_OUT"


@dataclass(frozen=True)
class ExperimentConfig:
    """Effective configuration of one subcommand invocation.

    Checked before any computation (paths must resolve, caps must be
    positive) and hashed into every CSV artifact it produces.
    """

    command: str
    instance_path: str | None = None
    depths: tuple[int, ...] = ()
    seed: int = 0
    restarts: int = 0
    budget: int = 0
    trials: int = 0
    threads: int = 1
    size_cap: int = cvrp.DEFAULT_SIZE_CAP
    extras: tuple[tuple[str, str], ...] = ()

    def check(self) -> "ExperimentConfig":
        if self.instance_path is not None and not Path(self.instance_path).is_file():
            raise ValidationError(f"instance file not found: {self.instance_path}")
        if self.size_cap < 1:
            raise ValidationError("size cap must be positive")
        if self.threads < 1:
            raise ValidationError("thread count must be positive")
        return self

    def as_dict(self) -> dict:
        data = {
            k: list(v) if isinstance(v, tuple) else v
            for k, v in dataclasses.asdict(self).items()
            if k != "extras" and v not in (None, ())
        }
        data.update(dict(self.extras))
        return data


def _config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def write_csv(path: Path, header: str, rows, config: dict) -> None:
    lines = [f"# config={_config_hash(config)}", header]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _fmt(cell) -> str:
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_instance(args) -> cvrp.CvrpInstance:
    if not args.instance:
        raise ValidationError("--instance is required for this subcommand")
    return cvrp.load_instance(args.instance)


def _parse_depths(text: str) -> list[int]:
    depths: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if "-" in piece[1:]:
            lo, hi = piece.split("-", 1)
            depths.extend(range(int(lo), int(hi) + 1))
        else:
            depths.append(int(piece))
    if not depths or depths != sorted(depths) or len(set(depths)) != len(depths):
        raise ValidationError(f"depth list must be strictly ascending, got {text!r}")
    return depths


def _parse_floats(text: str) -> list[float]:
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"expected a JSON array of numbers: {exc}") from exc
    if not isinstance(values, list):
        raise ValidationError("expected a JSON array of numbers")
    return [float(v) for v in values]


def cmd_gen(args) -> int:
    inst = cvrp.generate_random_instance(args.n, args.seed)
    out = _out_dir(args) / f"instance_n{args.n}_seed{args.seed}.json"
    cvrp.save_instance(inst, out)
    print(out)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        inst = _load_instance(args)
    except ValidationError as exc:
        print(f"invalid: {exc}")
        return EXIT_VALIDATION
    violation = cvrp.validate(inst)
    if violation is not None:
        print(f"invalid: {violation}")
        return EXIT_VALIDATION
    print(f"ok: n={inst.n}, capacity={inst.capacity}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    partitions.cardinality(args.n)  # validates n
    config = ExperimentConfig(
        command="enumerate", extras=(("n", str(args.n)),)
    ).check().as_dict()
    if args.out:
        rows = (
            (i, partitions.format_solution(p))
            for i, p in enumerate(partitions.enumerate_partitions(args.n))
        )
        path = _out_dir(args) / f"partitions_n{args.n}.csv"
        write_csv(path, "index,solution", rows, config)
        print(path)
    else:
        for p in partitions.enumerate_partitions(args.n):
            print(partitions.format_solution(p))
    return EXIT_OK


def cmd_index(args) -> int:
    print(partitions.index(partitions.parse_solution(args.solution)))
    return EXIT_OK


def cmd_unindex(args) -> int:
    print(partitions.format_solution(partitions.unindex(args.n, args.index)))
    return EXIT_OK


def cmd_cost(args) -> int:
    inst = _load_instance(args)
    value = cvrp.cost(inst, partitions.parse_solution(args.solution))
    print(int(value) if value.is_integer() else value)
    return EXIT_OK


def cmd_qualities(args) -> int:
    config = ExperimentConfig(
        command="qualities",
        instance_path=args.instance,
        threads=args.threads,
        size_cap=args.size_cap,
    ).check().as_dict()
    inst = _load_instance(args)
    table = cvrp.build_quality_table(
        inst, size_cap=args.size_cap, workers=args.threads
    )
    path = _out_dir(args) / "qualities.csv"
    write_csv(
        path,
        "index,quality",
        ((i, float(q)) for i, q in enumerate(table.qualities)),
        config,
    )
    print(path)
    print(
        f"solutions={table.size} distinct={table.distinct_values.size} "
        f"min={table.min_quality} mean={table.mean_quality}"
    )
    return EXIT_OK


def cmd_optimum(args) -> int:
    inst = _load_instance(args)
    best, argmin = cvrp.brute_force_optimum(inst, size_cap=args.size_cap)
    print(f"optimum={best}")
    for i in argmin:
        print(f"{i}\t{partitions.format_solution(partitions.unindex(inst.n, i))}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = ExperimentConfig(
        command="simulate",
        instance_path=args.instance,
        size_cap=args.size_cap,
        extras=(("gammas", args.gammas), ("times", args.times)),
    ).check().as_dict()
    inst = _load_instance(args)
    params = qwoa.VariationalParams.from_arrays(
        _parse_floats(args.gammas), _parse_floats(args.times)
    )
    table = cvrp.build_quality_table(inst, size_cap=args.size_cap)
    state = qwoa.evolve(table, params)
    out = _out_dir(args)
    dist_path = out / "distribution.csv"
    write_csv(
        dist_path,
        "quality,probability",
        qwoa.quality_distribution(state, table),
        config,
    )
    amp_path = out / "amplification.csv"
    write_csv(
        amp_path,
        "index,amplification",
        ((i, float(a)) for i, a in enumerate(qwoa.amplification(state))),
        config,
    )
    print(dist_path)
    print(amp_path)
    print(f"expectation={qwoa.expectation(state, table)}")
    return EXIT_OK


def _optimizer_config(args, cmd: str) -> ExperimentConfig:
    return ExperimentConfig(
        command=cmd,
        instance_path=args.instance,
        depths=tuple(_parse_depths(args.r)),
        seed=args.seed,
        restarts=args.restarts,
        budget=args.budget,
        size_cap=args.size_cap,
    ).check()


def _run_sweep(config: ExperimentConfig, table):
    return optimize.convergence_sweep(
        table,
        list(config.depths),
        restarts=config.restarts,
        seed=config.seed,
        budget=config.budget,
    )


def cmd_optimize(args) -> int:
    experiment = _optimizer_config(args, "optimize")
    inst = _load_instance(args)
    table = cvrp.build_quality_table(inst, size_cap=args.size_cap)
    runs = _run_sweep(experiment, table)
    config = experiment.as_dict()
    out = _out_dir(args)
    conv_path = out / "convergence.csv"
    write_csv(
        conv_path,
        "r,best_objective,evaluations,restart_index",
        (
            (run.depth, run.best_objective, run.evaluations, run.restart_index)
            for run in runs
        ),
        config,
    )
    par_path = out / "parameters.csv"
    write_csv(
        par_path,
        "r,j,gamma_j,t_j",
        (
            (run.depth, j + 1, g, t)
            for run in runs
            for j, (g, t) in enumerate(zip(run.best_params.gammas, run.best_params.times))
        ),
        config,
    )
    print(conv_path)
    print(par_path)
    return EXIT_OK


def cmd_baseline(args) -> int:
    experiment = ExperimentConfig(
        command="baseline",
        instance_path=args.instance,
        depths=tuple(_parse_depths(args.r)),
        seed=args.seed,
        trials=args.trials,
        size_cap=args.size_cap,
    ).check()
    config = experiment.as_dict()
    inst = _load_instance(args)
    table = cvrp.build_quality_table(inst, size_cap=args.size_cap)
    rows = []
    for r in experiment.depths:
        samples = 2 * r
        exact = baseline.expected_best_of(table, samples)
        if args.trials:
            estimate, stderr = baseline.monte_carlo_best_of(
                table, samples, args.trials, seed=args.seed
            )
            rows.append((r, samples, exact, estimate, stderr))
        else:
            rows.append((r, samples, exact))
    header = "r,samples,expected_best"
    if args.trials:
        header += ",mc_estimate,mc_stderr"
    path = _out_dir(args) / "baseline.csv"
    write_csv(path, header, rows, config)
    print(path)
    return EXIT_OK


def cmd_compare(args) -> int:
    experiment = _optimizer_config(args, "compare")
    inst = _load_instance(args)
    table = cvrp.build_quality_table(inst, size_cap=args.size_cap)
    runs = _run_sweep(experiment, table)
    records = baseline.compare(table, runs)
    config = experiment.as_dict()
    out = _out_dir(args)
    cmp_path = out / "comparison.csv"
    write_csv(
        cmp_path,
        "r,qwoa_expectation,classical_expected_best,target",
        (
            (rec.r, rec.qwoa_expectation, rec.classical_expected_best, rec.target)
            for rec in records
        ),
        config,
    )
    fit_rows = []
    for curve in ("qwoa", "classical"):
        try:
            fit = baseline.fit_power_law(records, curve)
            fit_rows.append((fit.curve, fit.alpha, fit.r_min, fit.r_max, fit.residual))
        except ValidationError as exc:
            print(f"fit skipped for {curve}: {exc}", file=sys.stderr)
    fit_path = out / "fits.csv"
    write_csv(fit_path, "curve,alpha,r_min,r_max,residual", fit_rows, config)
    print(cmp_path)
    print(fit_path)
    return EXIT_OK


def cmd_verify_circuit(args) -> int:
    config = ExperimentConfig(
        command="verify-circuit",
        extras=(("m_values", args.m_values), ("t_values", args.t_values or "default")),
    ).check().as_dict()
    m_values = [int(v) for v in args.m_values.split(",")]
    t_values = _parse_floats(args.t_values) if args.t_values else None
    rows = []
    for m in m_values:
        ts = t_values if t_values is not None else [0.1, 0.7, 2.0 * np.pi / m]
        for t in ts:
            rep = circuits.verify(m, t)
            rows.append(
                (rep.m_solutions, float(rep.t), rep.residual, rep.leakage, rep.ancilla_residual)
            )
    path = _out_dir(args) / "circuit_verification.csv"
    write_csv(path, "M,t,residual,leakage,ancilla_residual", rows, config)
    print(path)
    worst = max(row[2] for row in rows)
    print(f"worst residual={worst:.3e}")
    return EXIT_OK


def _read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    lines = [
        line for line in path.read_text().splitlines() if not line.startswith("#")
    ]
    if not lines:
        raise ValidationError(f"{path}: empty CSV")
    names = lines[0].split(",")
    columns = {name: [] for name in names}
    for line in lines[1:]:
        for name, cell in zip(names, line.split(",")):
            columns[name].append(float(cell))
    return {name: np.asarray(vals) for name, vals in columns.items()}


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(args.csv)
    if not path.exists():
        raise ValidationError(f"no such CSV file: {path}")
    data = _read_csv_columns(path)
    kind = args.kind
    needed = {
        "distribution": ("quality", "probability"),
        "amplification": ("index", "amplification"),
        "convergence": ("r", "qwoa_expectation", "classical_expected_best", "target"),
    }.get(kind, ())
    missing = [name for name in needed if name not in data]
    if missing:
        raise ValidationError(f"{path} lacks columns {missing} needed for {kind!r}")
    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "distribution":
        ax.bar(data["quality"], data["probability"], width=1.0)
        ax.set_xlabel("quality")
        ax.set_ylabel("probability")
    elif kind == "amplification":
        ax.scatter(data["index"], data["amplification"], s=2)
        ax.set_xlabel("solution index")
        ax.set_ylabel("amplification")
    elif kind == "convergence":
        ax.plot(data["r"], data["qwoa_expectation"], marker="o", label="ansatz")
        ax.plot(
            data["r"], data["classical_expected_best"], marker="s", label="classical"
        )
        ax.axhline(float(np.atleast_1d(data["target"])[0]), ls="--", color="gray", label="optimum")
        ax.set_xlabel("depth r")
        ax.set_ylabel("expected quality")
        ax.legend()
    else:
        raise ValidationError(f"unknown plot kind {kind!r}")
    out = _out_dir(args) / f"{kind}.svg"
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwoa-cvrp",
        description="Solution-space analysis and walk-ansatz simulation for capacitated vehicle routing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=False, out=True):
        if instance:
            p.add_argument("--instance", help="instance JSON file")
        if out:
            p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
        p.add_argument("--size-cap", type=int, default=cvrp.DEFAULT_SIZE_CAP,
                       help="largest solution space to materialise")

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check instance invariants")
    common(p, instance=True, out=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enumerate", help="list all solutions in index order")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("index", help="index of a solution literal")
    p.add_argument("--solution", required=True, help='e.g. "[[1,2],[3]]"')
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("unindex", help="solution at a given index")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--index", type=int, required=True)
    p.set_defaults(func=cmd_unindex)

    p = sub.add_parser("cost", help="cost of a solution on an instance")
    p.add_argument("--solution", required=True)
    common(p, instance=True, out=False)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("qualities", help="cost of every solution, as CSV")
    p.add_argument("--threads", type=int, default=1)
    common(p, instance=True)
    p.set_defaults(func=cmd_qualities)

    p = sub.add_parser("optimum", help="brute-force global optimum")
    common(p, instance=True, out=False)
    p.set_defaults(func=cmd_optimum)

    p = sub.add_parser("simulate", help="evolve the ansatz with given parameters")
    p.add_argument("--gammas", required=True, help="JSON array of phase angles")
    p.add_argument("--times", required=True, help="JSON array of walk times")
    common(p, instance=True)
    p.set_defaults(func=cmd_simulate)

    def optimizer_flags(p):
        p.add_argument("--r", required=True, help="depth list, e.g. 1-10 or 1,2,5")
        p.add_argument("--restarts", type=int, default=optimize.DEFAULT_RESTARTS)
        p.add_argument("--budget", type=int, default=optimize.DEFAULT_BUDGET)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("optimize", help="variational sweep over depths")
    optimizer_flags(p)
    common(p, instance=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("baseline", help="expected best of 2r classical samples")
    p.add_argument("--r", required=True, help="depth list, e.g. 1-10")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0 = exact only)")
    p.add_argument("--seed", type=int, default=0)
    common(p, instance=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("compare", help="ansatz vs classical sampling at equal effort")
    optimizer_flags(p)
    common(p, instance=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-circuit", help="walk-circuit residuals as CSV")
    p.add_argument("--m-values", default="3,4,5,6,7,12", help="comma-separated solution counts")
    p.add_argument("--t-values", default=None, help="JSON array of walk times")
    common(p)
    p.set_defaults(func=cmd_verify_circuit)

    p = sub.add_parser("plot", help="render a CSV artifact as SVG")
    p.add_argument("--kind", required=True, choices=["distribution", "amplification", "convergence"])
    p.add_argument("--csv", required=True)
    common(p)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
