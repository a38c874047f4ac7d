"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 exact solve refused for
size, 1 anything else.  JSON output is deterministic: the same config and
seed give byte-identical reports.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import asymptotic, io, partition, quantum
from .channels import (
    ClassicalChannel,
    ProductChannel,
    erasure_epsilon_threshold,
    erasure_max_mergeable_differences,
    erasure_sequence_fidelity,
    make_erasure,
    make_generalized_erasure,
    product_reverse_fidelity,
    reverse_fidelity,
)
from .errors import ExactSolverCapError, ValidationError

ERASURE_THRESHOLD_NOTE = (
    "epsilon thresholds come from the closed form 1 - eta**(2*differences); "
    "for eta = 0.5 with one differing position this gives 0.75, and the value "
    "0.85 sometimes quoted for that case disagrees with the closed form and is "
    "flagged here rather than reproduced"
)


@dataclass(frozen=True)
class RunConfig:
    """Parsed and range-checked invocation of one subcommand."""

    command: str
    format: str = "table"
    out: str | None = None
    channel_path: str | None = None
    epsilon: float | None = None
    solver: str = "auto"
    x: str | None = None
    xhat: str | None = None
    xs: tuple[str, ...] = ()
    xhats: tuple[str, ...] = ()
    r: int | None = None
    eta: float | None = None
    etas: tuple[float, ...] = ()
    label_blocks: tuple[tuple[str, ...], ...] = ()
    index_blocks: tuple[tuple[int, ...], ...] = ()
    k_max: int | None = None
    k: int | None = None
    alphabet_size: int | None = None
    max_sequences: int = 10
    max_differences: int = 5
    dim: int | None = None
    kraus_path: str | None = None
    seed: int = 0
    probes: int = 1000


def _parse_int(raw: str, what: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{what} must be an integer, got {raw!r}") from None


def _parse_float(raw: str, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"{what} must be a number, got {raw!r}") from None


def _split_csv(raw: str) -> tuple[str, ...]:
    items = tuple(part.strip() for part in raw.split(",") if part.strip())
    if not items:
        raise ValidationError(f"expected a comma-separated list, got {raw!r}")
    return items


def _split_blocks(raw: str) -> tuple[tuple[str, ...], ...]:
    groups = [g for g in raw.split(";") if g.strip()]
    if not groups:
        raise ValidationError(f"expected semicolon-separated blocks, got {raw!r}")
    return tuple(_split_csv(g) for g in groups)


def _classical_channel(path: str) -> ClassicalChannel:
    channel = io.parse_channel_file(path)
    if not isinstance(channel, ClassicalChannel):
        raise ValidationError(
            f"{path} holds a Kraus channel; this command needs a classical channel"
        )
    return channel


def _rows_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells: list[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def _kv_table(pairs: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in pairs)


def _report_table(data: dict) -> str:
    pairs = [
        ("epsilon", data["epsilon"]),
        ("solver", data["solver"]),
        ("optimal", data["optimal"]),
        ("blocks", " | ".join("{" + ", ".join(b) + "}" for b in data["blocks"])),
        ("representatives", ", ".join(data["representatives"])),
        ("compressibility", data["compressibility"]),
        ("certificates", ", ".join(str(c) for c in data["certificates"])),
    ]
    return _kv_table(pairs)


# ---------------------------------------------------------------------------
# command payloads: (json_data, table_text)
# ---------------------------------------------------------------------------

def _cmd_compress(cfg: RunConfig):
    channel = _classical_channel(cfg.channel_path)
    report = partition.compress(channel, cfg.epsilon, solver=cfg.solver)
    data = report.to_json_dict()
    return data, _report_table(data)


def _cmd_fidelity(cfg: RunConfig):
    channel = _classical_channel(cfg.channel_path)
    value = reverse_fidelity(channel, cfg.x, cfg.xhat)
    data = {"x": cfg.x, "xhat": cfg.xhat, "reverse_fidelity": value}
    return data, _kv_table(list(data.items()))


def _cmd_product(cfg: RunConfig):
    channel = _classical_channel(cfg.channel_path)
    if len(cfg.xs) != len(cfg.xhats):
        raise ValidationError(
            f"sequences have different lengths {len(cfg.xs)} and {len(cfg.xhats)}"
        )
    prod = ProductChannel(channel, len(cfg.xs))
    value = product_reverse_fidelity(prod, cfg.xs, cfg.xhats)
    data = {"k": len(cfg.xs), "xs": list(cfg.xs), "xhats": list(cfg.xhats),
            "reverse_fidelity": value}
    table = _kv_table([("k", data["k"]), ("xs", ",".join(cfg.xs)),
                       ("xhats", ",".join(cfg.xhats)), ("reverse_fidelity", value)])
    return data, table


def _cmd_erasure(cfg: RunConfig):
    channel = make_erasure(cfg.r, cfg.eta)
    thresholds = [
        {"differences": s,
         "fidelity": erasure_sequence_fidelity(cfg.eta, s),
         "epsilon_threshold": erasure_epsilon_threshold(cfg.eta, s)}
        for s in range(cfg.max_differences + 1)
    ]
    data = {
        "r": cfg.r,
        "eta": cfg.eta,
        "channel": io.channel_to_data(channel),
        "thresholds": thresholds,
        "notes": [ERASURE_THRESHOLD_NOTE],
    }
    if cfg.epsilon is not None:
        data["epsilon"] = cfg.epsilon
        data["max_mergeable_differences"] = erasure_max_mergeable_differences(
            cfg.eta, cfg.epsilon, cfg.max_differences)
    rows = [[str(t["differences"]), repr(t["fidelity"]), repr(t["epsilon_threshold"])]
            for t in thresholds]
    table = _rows_table(["differences", "fidelity", "epsilon_threshold"], rows)
    if cfg.epsilon is not None:
        table += f"\nmax mergeable differences at epsilon={cfg.epsilon}: " \
                 f"{data['max_mergeable_differences']}"
    table += "\nnote: " + ERASURE_THRESHOLD_NOTE
    return data, table


def _cmd_gen_erasure(cfg: RunConfig):
    channel = make_generalized_erasure(cfg.label_blocks, list(cfg.etas))
    data = {
        "blocks": [list(b) for b in cfg.label_blocks],
        "etas": list(cfg.etas),
        "channel": io.channel_to_data(channel),
    }
    lines = [f"generalized erasure on {channel.num_inputs} inputs, "
             f"{len(cfg.label_blocks)} blocks"]
    if cfg.epsilon is not None:
        report = partition.compress(channel, cfg.epsilon, solver=cfg.solver)
        data["report"] = report.to_json_dict()
        lines.append(_report_table(data["report"]))
    if cfg.k_max is not None:
        sizes = [len(b) for b in cfg.label_blocks]
        data["gamma_bound"] = [
            {"k": k, "bound": asymptotic.generalized_erasure_gamma_bound(sizes, k)}
            for k in range(1, cfg.k_max + 1)
        ]
        rows = [[str(e["k"]), repr(e["bound"])] for e in data["gamma_bound"]]
        lines.append(_rows_table(["k", "gamma_bound"], rows))
    return data, "\n".join(lines)


def _cmd_conjecture(cfg: RunConfig):
    rows = asymptotic.conjecture_report(cfg.alphabet_size, cfg.k,
                                        max_sequences=cfg.max_sequences)
    data = {
        "alphabet_size": cfg.alphabet_size,
        "k": cfg.k,
        "rows": [r.to_json_dict() for r in rows],
    }
    table = _rows_table(
        ["s", "minimum", "bound", "equal"],
        [[str(r.s), str(r.minimum), str(r.bound), str(r.equal)] for r in rows],
    )
    return data, table


def _cmd_asymptotic(cfg: RunConfig):
    channel = _classical_channel(cfg.channel_path)
    sweep = asymptotic.delta_estimate(channel, cfg.epsilon, cfg.k_max, solver=cfg.solver)
    data = sweep.to_json_data()
    table = _rows_table(
        ["k", "gamma", "method", "blocks"],
        [[str(r.k), repr(r.gamma), r.method, str(r.block_count)] for r in sweep.results],
    )
    table += f"\nobserved trend: {sweep.trend} (finite-k evidence, not a limit)"
    return data, table


def _cmd_quantum_compress(cfg: RunConfig):
    if cfg.kraus_path is not None:
        channel = io.parse_kraus_file(cfg.kraus_path)
        kernel_dim, _ = quantum.vector_kernel(channel)
        gamma = quantum.quantum_compressibility(channel, channel.in_dim)
        data = {"in_dim": channel.in_dim, "out_dim": channel.out_dim,
                "kernel_dim": kernel_dim, "compressibility": gamma}
        return data, _kv_table(list(data.items()))
    blocks = tuple(tuple(int(i) for i in b) for b in cfg.index_blocks)
    part = partition.Partition(blocks)
    graining = quantum.make_coarse_graining(part, cfg.dim, embed_dim=cfg.dim)
    gamma = quantum.quantum_compressibility(graining, cfg.dim)
    data = {"dim": cfg.dim, "blocks": [list(b) for b in part.blocks],
            "kernel_dim": graining.kernel_dim, "compressibility": gamma}
    pairs = [("dim", cfg.dim),
             ("blocks", " | ".join("{" + ", ".join(str(i) for i in b) + "}" for b in part.blocks)),
             ("kernel_dim", graining.kernel_dim), ("compressibility", gamma)]
    return data, _kv_table(pairs)


def _cmd_quantum_verify(cfg: RunConfig):
    verdict = quantum.verify_erasure_theorem(cfg.dim, cfg.eta, cfg.epsilon,
                                             seed=cfg.seed, n_random=cfg.probes)
    data = io.verdict_to_data(verdict)
    pairs = [
        ("dim", verdict.dim), ("eta", verdict.eta), ("epsilon", verdict.epsilon),
        ("threshold eta^2", verdict.threshold),
        ("compressible", verdict.compressible), ("gamma", verdict.gamma),
        ("min_fidelity", verdict.min_fidelity),
        ("probes", verdict.probe_count), ("seed", verdict.seed),
    ]
    table = _kv_table(pairs)
    if verdict.rejections:
        rows = [[r.kind, str(r.kernel_dim), repr(r.witness_fidelity)]
                for r in verdict.rejections]
        table += "\n" + _rows_table(["compressor", "kernel_dim", "witness_fidelity"], rows)
    return data, table


_COMMANDS = {
    "compress": _cmd_compress,
    "fidelity": _cmd_fidelity,
    "product": _cmd_product,
    "erasure": _cmd_erasure,
    "gen-erasure": _cmd_gen_erasure,
    "conjecture": _cmd_conjecture,
    "asymptotic": _cmd_asymptotic,
    "quantum-compress": _cmd_quantum_compress,
    "quantum-verify": _cmd_quantum_verify,
}


def run(config: RunConfig) -> int:
    """Execute one configured command, writing its report; returns 0."""
    data, table = _COMMANDS[config.command](config)
    text = io.dump_json(data) if config.format == "json" else table + "\n"
    if config.out is None:
        sys.stdout.write(text)
    else:
        Path(config.out).write_text(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revcomp",
        description="Reverse compression of classical and quantum channels.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")
    common.add_argument("--out", default=None, help="write the report to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", parents=[common],
                       help="smallest indistinguishability partition of a channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--solver", choices=("auto", "exact", "greedy"), default="auto")

    p = sub.add_parser("fidelity", parents=[common],
                       help="reverse fidelity of two inputs of a channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--xhat", required=True)

    p = sub.add_parser("product", parents=[common],
                       help="reverse fidelity of two input sequences, computed letterwise")
    p.add_argument("--channel", required=True)
    p.add_argument("--xs", required=True, help="comma-separated input symbols")
    p.add_argument("--xhats", required=True, help="comma-separated input symbols")

    p = sub.add_parser("erasure", parents=[common],
                       help="erasure channel with its merge thresholds")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--max-differences", type=int, default=5)

    p = sub.add_parser("gen-erasure", parents=[common],
                       help="generalized erasure channel, optional compression and bounds")
    p.add_argument("--blocks", required=True,
                   help="semicolon-separated blocks of comma-separated labels")
    p.add_argument("--etas", required=True, help="comma-separated erasure probabilities")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--solver", choices=("auto", "exact", "greedy"), default="auto")
    p.add_argument("--k-max", type=int, default=None)

    p = sub.add_parser("conjecture", parents=[common],
                       help="exhaustive check of sequence-partition minima against the "
                            "prefix-grouping count")
    p.add_argument("--alphabet-size", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-sequences", type=int, default=10)

    p = sub.add_parser("asymptotic", parents=[common],
                       help="compressibility sweep over k channel uses")
    p.add_argument("--channel", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--solver", choices=("auto", "exact", "greedy", "closed_form"),
                   default="auto")

    p = sub.add_parser("quantum-compress", parents=[common],
                       help="vectorial kernel and compressibility of a compressor")
    p.add_argument("--kraus", default=None, help="Kraus channel JSON file")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--blocks", default=None,
                   help="semicolon-separated blocks of comma-separated indices")

    p = sub.add_parser("quantum-verify", parents=[common],
                       help="erasure compressibility criterion with evidence")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probes", type=int, default=1000)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    kwargs: dict = {"command": args.command, "format": args.format, "out": args.out}
    if args.command in ("compress", "fidelity", "product", "asymptotic"):
        kwargs["channel_path"] = args.channel
    if hasattr(args, "epsilon"):
        kwargs["epsilon"] = args.epsilon
    if hasattr(args, "solver"):
        kwargs["solver"] = args.solver
    if args.command == "fidelity":
        kwargs.update(x=args.x, xhat=args.xhat)
    if args.command == "product":
        kwargs.update(xs=_split_csv(args.xs), xhats=_split_csv(args.xhats))
    if args.command == "erasure":
        if args.max_differences < 0:
            raise ValidationError(f"--max-differences must be >= 0, got {args.max_differences}")
        kwargs.update(r=args.r, eta=args.eta, max_differences=args.max_differences)
    if args.command == "gen-erasure":
        etas = tuple(_parse_float(e, "--etas entry") for e in _split_csv(args.etas))
        kwargs.update(label_blocks=_split_blocks(args.blocks), etas=etas, k_max=args.k_max)
    if args.command == "conjecture":
        kwargs.update(alphabet_size=args.alphabet_size, k=args.k,
                      max_sequences=args.max_sequences)
    if args.command == "asymptotic":
        kwargs["k_max"] = args.k_max
    if args.command == "quantum-compress":
        if (args.kraus is None) == (args.dim is None or args.blocks is None):
            raise ValidationError(
                "quantum-compress needs either --kraus, or both --dim and --blocks"
            )
        kwargs["kraus_path"] = args.kraus
        if args.dim is not None:
            kwargs["dim"] = args.dim
        if args.blocks is not None:
            kwargs["index_blocks"] = tuple(
                tuple(_parse_int(i, "--blocks entry") for i in b)
                for b in _split_blocks(args.blocks)
            )
    if args.command == "quantum-verify":
        if args.probes < 0:
            raise ValidationError(f"--probes must be >= 0, got {args.probes}")
        kwargs.update(dim=args.dim, eta=args.eta, epsilon=args.epsilon,
                      seed=args.seed, probes=args.probes)
    return RunConfig(**kwargs)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return run(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExactSolverCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
