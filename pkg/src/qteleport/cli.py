"""Command-line harness.

Every subcommand is a pure function of its arguments and ``--seed``: trial
``t`` draws from its own counter-based stream ``(seed, t)``.

Exit codes: 0 success, 1 input error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import experiments, infotheory, teleport, transcript
from .qcore import bloch_vector, density_from_state
from .rng import trial_rng
from .transcript import fmt_float

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 1, 2
FORMATS = ("structured-text", "csv")
DEFAULT_SPEC_NS = (4, 64, 1024, 16384)


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    mode: str = "collapse"
    trials: int = 1
    chi: teleport.UnknownState | None = None
    out: str | None = None
    format: str = "structured-text"
    resource: str = "psi-"

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("--trials must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("--seed must be a 64-bit unsigned integer")
        if self.format not in FORMATS:
            raise InputError(f"--format must be one of {FORMATS}")

    def chi_for(self, rng: np.random.Generator) -> teleport.UnknownState:
        return self.chi if self.chi is not None else teleport.UnknownState.random(rng)


def parse_chi(text: str | None, normalize: bool = False) -> teleport.UnknownState | None:
    """``a_re,a_im,b_re,b_im`` (or ``a,b`` for real amplitudes) or ``random``."""
    if text is None or text == "random":
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse --chi {text!r}") from None
    if len(vals) == 2:
        alpha, beta = complex(vals[0]), complex(vals[1])
    elif len(vals) == 4:
        alpha, beta = complex(vals[0], vals[1]), complex(vals[2], vals[3])
    else:
        raise InputError("--chi takes a_re,a_im,b_re,b_im or a,b")
    try:
        if normalize:
            return teleport.UnknownState.normalized(alpha, beta)
        return teleport.UnknownState(alpha, beta)
    except ValueError as exc:
        raise InputError(f"invalid --chi: {exc} (use --normalize to rescale)") from None


def read_channel(text: str) -> np.ndarray:
    """Parse ``# channel n_in n_out`` followed by whitespace-separated rows."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InputError("channel file must start with '# channel n_in n_out'")
    head = lines[0].lstrip("#").split()
    if len(head) != 3 or head[0] != "channel":
        raise InputError("malformed header; expected '# channel n_in n_out'")
    try:
        n_in, n_out = int(head[1]), int(head[2])
        rows = [[float(x) for x in ln.split()] for ln in lines[1:] if not ln.startswith("#")]
    except ValueError as exc:
        raise InputError(f"malformed channel matrix: {exc}") from None
    if len(rows) != n_in or any(len(r) != n_out for r in rows):
        raise InputError(f"channel matrix is not {n_in} x {n_out}")
    try:
        return infotheory.as_channel(rows)
    except infotheory.ChannelError as exc:
        raise InputError(f"non-stochastic channel: {exc}") from None


def cmd_teleport(cfg: RunConfig) -> str:
    if cfg.mode not in teleport.MODES:
        raise InputError(f"--mode must be one of {teleport.MODES} for teleport")
    buf = io.StringIO()
    if cfg.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(transcript.SUMMARY_COLUMNS)
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        t = teleport.run_protocol(cfg.chi_for(rng), cfg.mode, rng, cfg.resource)
        if cfg.format == "csv":
            w.writerow(transcript.summary_row(t, trial))
        else:
            transcript.dump([t], buf, first_trial=trial)
    return buf.getvalue()


def cmd_specinfo(ns, seed: int = 0) -> str:
    if any(n < 1 for n in ns):
        raise InputError("every N must be at least 1")
    buf = io.StringIO()
    experiments.write_csv(experiments.spec_info_table(ns), buf)
    return buf.getvalue()


def cmd_holevo(cfg: RunConfig, members: int, povms: int) -> str:
    if members < 1 or povms < 1:
        raise InputError("--members and --povms must be at least 1")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "members", "chi_bits", "max_povm_mi_bits"])
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        ens = infotheory.random_qubit_ensemble(members, rng)
        mi = max(infotheory.povm_mutual_information(ens, infotheory.random_povm(2, 2 + k % 3, rng))
                 for k in range(povms))
        w.writerow([trial, members, fmt_float(infotheory.holevo_chi(ens)), fmt_float(mi)])
    return buf.getvalue()


def cmd_capacity(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        matrix = read_channel(fh.read())
    res = infotheory.channel_capacity(matrix)
    lines = [
        f"capacity_bits {res.capacity:.12g}",
        "input_dist " + " ".join(f"{p:.12g}" for p in res.input_dist),
        f"iterations {res.iterations}",
        f"converged {'true' if res.converged else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_coding_rate(cfg: RunConfig, p, block_len: int, blocks: int) -> str:
    try:
        h = infotheory.shannon_entropy(p)
        expected = infotheory.expected_coding_rate(p, block_len)
        empirical = infotheory.empirical_coding_rate(p, block_len, blocks, trial_rng(cfg.seed, 0))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["block_len", "blocks", "H_bits", "expected_rate", "empirical_rate", "upper_bound"])
    w.writerow([block_len, blocks, fmt_float(h), fmt_float(expected), fmt_float(empirical),
                fmt_float(h + 1.0 / block_len)])
    return buf.getvalue()


def cmd_bohm(cfg: RunConfig) -> str:
    buf = io.StringIO()
    if cfg.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "outcome", "probability", "spin_x", "spin_y", "spin_z", "active"])
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        rep = teleport.bohm_branch_analysis(cfg.chi_for(rng), rng, cfg.resource)
        if cfg.format == "csv":
            for b in rep.branches:
                w.writerow([trial, b.outcome, fmt_float(b.probability), *map(fmt_float, b.spin),
                            int(b.outcome == rep.active)])
        else:
            rec = {
                "trial": trial,
                "active": rep.active,
                "original_spin": [fmt_float(x) for x in rep.original_spin],
                "pre_spins": {k: [fmt_float(x) for x in v] for k, v in rep.pre_spins.items()},
                "branches": [{"outcome": b.outcome, "probability": fmt_float(b.probability),
                              "spin": [fmt_float(x) for x in b.spin]} for b in rep.branches],
                "final_spin": [fmt_float(x) for x in rep.final_spin],
            }
            buf.write(json.dumps(rec, separators=(",", ":")) + "\n")
    return buf.getvalue()


def cmd_ensemble(cfg: RunConfig) -> str:
    if cfg.mode not in teleport.ENSEMBLE_MODES:
        raise InputError(f"--mode must be one of {teleport.ENSEMBLE_MODES} for ensemble")
    rng = trial_rng(cfg.seed, 0)
    rep = teleport.run_ensemble(cfg.chi_for(rng), cfg.trials, rng, cfg.mode, cfg.resource)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["outcome", "count", "fraction", "bob_x", "bob_y", "bob_z", "corrected_fidelity"])
    for k in teleport.BELL_KINDS:
        row = [k, rep.counts[k], fmt_float(rep.fractions[k])]
        if rep.sub_ensembles is None:
            row += ["", "", "", ""]
        else:
            sub = rep.sub_ensembles[k]
            spin = bloch_vector(density_from_state(sub.bob_state))
            row += [*map(fmt_float, spin), fmt_float(sub.fidelity)]
        w.writerow(row)
    if rep.pooled is not None:
        w.writerow(["pooled", rep.m, fmt_float(1.0), *map(fmt_float, bloch_vector(rep.pooled)), ""])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS, default=None)

    state = _Parser(add_help=False)
    state.add_argument("--chi", default="random", help="a_re,a_im,b_re,b_im | a,b | random")
    state.add_argument("--normalize", action="store_true", help="rescale --chi to unit norm")
    state.add_argument("--resource", default="psi-", choices=teleport.BELL_KINDS)

    parser = _Parser(prog="qteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("teleport", parents=[common, state], help="run the protocol, write transcripts")
    p.add_argument("--mode", default="collapse", choices=teleport.MODES)

    p = sub.add_parser("specinfo", parents=[common], help="specification vs. accessible information sweep")
    p.add_argument("--n", type=int, nargs="+", default=list(DEFAULT_SPEC_NS))

    p = sub.add_parser("holevo", parents=[common], help="Holevo quantity of random qubit ensembles")
    p.add_argument("--members", type=int, default=1024)
    p.add_argument("--povms", type=int, default=20)

    p = sub.add_parser("capacity", parents=[common], help="capacity of a channel file")
    p.add_argument("channel_file")

    p = sub.add_parser("coding-rate", parents=[common], help="block prefix-code rate of an i.i.d. source")
    p.add_argument("--p", type=float, nargs="+", default=[0.9, 0.1])
    p.add_argument("--block-len", type=int, default=8)
    p.add_argument("--blocks", type=int, default=10_000)

    sub.add_parser("bohm", parents=[common, state], help="branch spin vectors and active branch")

    p = sub.add_parser("ensemble", parents=[common, state], help="sub-ensemble bookkeeping over many runs")
    p.add_argument("--mode", default="ensemble", choices=teleport.ENSEMBLE_MODES)
    return parser


def _run(args) -> str:
    default_fmt = "structured-text" if args.command in ("teleport", "bohm") else "csv"
    cfg_kwargs = dict(seed=args.seed, trials=args.trials, out=args.out,
                      format=args.format or default_fmt)
    if hasattr(args, "chi"):
        cfg_kwargs.update(chi=parse_chi(args.chi, args.normalize), resource=args.resource)
    if hasattr(args, "mode"):
        cfg_kwargs["mode"] = args.mode
    cfg = RunConfig(**cfg_kwargs)
    if args.command == "teleport":
        return cmd_teleport(cfg)
    if args.command == "specinfo":
        return cmd_specinfo(args.n, cfg.seed)
    if args.command == "holevo":
        return cmd_holevo(cfg, args.members, args.povms)
    if args.command == "capacity":
        return cmd_capacity(args.channel_file)
    if args.command == "coding-rate":
        return cmd_coding_rate(cfg, args.p, args.block_len, args.blocks)
    if args.command == "bohm":
        return cmd_bohm(cfg)
    return cmd_ensemble(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
