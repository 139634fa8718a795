"""Command-line interface: verification, sampling, noise sweeps, channel
inspection, and circuit export.

Data goes to stdout or the requested file; diagnostics go to stderr. Every
command is deterministic given its flags and seed.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bases, channels, circuitgen, noise, protocol
from .qcore import QuantumError, tensor

BELL_NAMES = ("Phi0", "Phi1", "Phi2", "Phi3")


def _parse_grid(text: str) -> list[float]:
    """'start:stop:count' (inclusive endpoints) or a single value."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise argparse.ArgumentTypeError("grid count must be >= 1")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(text)]


_CONFIG_TYPES = {
    "x": float, "y": float, "a": float, "b": float, "y_phase": float,
    "seed": int, "inputs": int, "kind": str, "strength": _parse_grid,
    "b2": _parse_grid, "y2": _parse_grid, "out": str, "jobs": int,
    "which": str, "i": int, "j": int,
}


def _read_config(path: str) -> dict[str, str]:
    config = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise QuantumError(f"config line must be key=value: {raw!r}")
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    try:
        config = _read_config(args.config)
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for key, raw in config.items():
        if key not in _CONFIG_TYPES:
            parser.error(f"unknown config key {key!r}")
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        try:
            setattr(args, key, _CONFIG_TYPES[key](raw))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"bad config value for {key}: {exc}")


def _require(parser, args, *keys):
    for key in keys:
        if getattr(args, key) is None:
            parser.error(f"--{key.replace('_', '-')} is required (flag or config)")


def _payload(args) -> protocol.ProtocolInputs:
    phase = args.y_phase or 0.0
    y = args.y * np.exp(1j * phase) if phase else args.y
    return protocol.ProtocolInputs(args.x, y, args.a, args.b)


def _selector_text(sel: protocol.BranchSelector) -> str:
    c = "+" if sel.controller_m == 0 else "-"
    return (f"mentor=({BELL_NAMES[sel.mentor_i]},{BELL_NAMES[sel.mentor_j]}) "
            f"alice={BELL_NAMES[sel.alice_k]} bob=xi{sel.bob_l} controller={c}")


def _amp_text(state) -> str:
    return "  ".join(f"|{bits}> {amp.real:+.6f}{amp.imag:+.6f}j"
                     for bits, amp in state.nonzero(tol=1e-9))


def _random_inputs(rng) -> protocol.ProtocolInputs:
    phases = rng.uniform(0, 2 * np.pi, size=2)
    t1, t2 = rng.uniform(0, np.pi / 2, size=2)
    x = np.cos(t1) * np.exp(1j * phases[0])
    y = np.sin(t1) * np.exp(1j * phases[1])
    return protocol.ProtocolInputs(x, y, float(np.cos(t2)), float(np.sin(t2)))


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = []

    dev1 = np.abs(channels.prepare_xi1().amps - channels.xi1_analytic().amps).max()
    dev2 = np.abs(channels.prepare_xi2().amps - channels.xi2_analytic().amps).max()
    ok = dev1 < 1e-12 and dev2 < 1e-12
    print(f"{'PASS' if ok else 'FAIL'} channel-prep max deviation {max(dev1, dev2):.3e}")
    if not ok:
        failures.append("channel-prep")

    tau = channels.combined_tau()
    recon = np.zeros_like(tau.amps)
    for i in range(4):
        for j in range(4):
            term = tensor(tensor(bases.bell_state(i), bases.bell_state(j)),
                          channels.m_state(i, j))
            recon = recon + 0.25 * term.amps
    dev = np.abs(recon - tau.amps).max()
    ok = dev < 1e-12
    print(f"{'PASS' if ok else 'FAIL'} combined-channel identity deviation {dev:.3e}")
    if not ok:
        failures.append("combined-identity")

    bad = protocol.table_cross_check(_random_inputs(rng))
    if bad:
        print("FAIL correction-tables mismatched selectors: "
              + ", ".join(str(s.key) for s in bad[:8]))
        failures.append("correction-tables")
    else:
        print("PASS correction-tables 256/256 entries confirmed by search")

    worst, worst_sel = 1.0, None
    for _ in range(args.inputs):
        inputs = _random_inputs(rng)
        for result in protocol.enumerate_branches(inputs):
            if result.probability == 0.0:
                continue
            low = min(result.fidelity_rsp, result.fidelity_tp)
            if low < worst:
                worst, worst_sel = low, result.selector
    ok = worst >= 1 - 1e-10
    line = (f"{'PASS' if ok else 'FAIL'} noiseless-determinism {args.inputs} inputs, "
            f"256/256 branches, min fidelity 1-{1 - worst:.3e}")
    if not ok and worst_sel is not None:
        line += f" at selector {worst_sel.key}"
    print(line)
    if not ok:
        failures.append("noiseless-determinism")

    return 0 if not failures else 1


def cmd_run(args, parser) -> int:
    _require(parser, args, "x", "y", "a", "b")
    inputs = _payload(args)
    sel, result = protocol.sample_run(inputs, args.seed)
    print(f"inputs: x={complex(inputs.x):.6f} y={complex(inputs.y):.6f} "
          f"a={inputs.a:.6f} b={inputs.b:.6f}")
    print(f"sampled branch: {_selector_text(sel)} (probability {result.probability:.6f})")
    print(f"corrections: alice={protocol.alice_correction(sel).name} "
          f"bob={protocol.bob_correction(sel).name}")
    print(f"prepared qubit:   {_amp_text(result.a2_state)}")
    print(f"teleported qubit: {_amp_text(result.b1_state)}")
    print(f"F_tp={result.fidelity_tp:.6f}, F_rsp={result.fidelity_rsp:.6f}")
    return 0


def cmd_sweep(args, parser) -> int:
    _require(parser, args, "kind", "strength", "b2", "y2")
    kind = noise.NoiseKind.parse(args.kind)
    grid = noise.SweepGrid(kind, tuple(args.strength), tuple(args.b2), tuple(args.y2))
    records = noise.sweep(grid, y_phase=args.y_phase or 0.0, jobs=args.jobs)
    text = noise.records_to_string(records, include_weighted=args.include_weighted)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for kind_name, dev in noise.sweep_summary(records).items():
        print(f"max |numeric - closed-form| for {kind_name}: {dev:.3e}", file=sys.stderr)
    return 0


def cmd_export_qasm(args, parser) -> int:
    _require(parser, args, "x", "y", "a", "b")
    inputs = _payload(args)
    circuit = circuitgen.build_protocol_circuit(inputs)
    doc = circuitgen.export_qasm(circuit)
    out = Path(args.out) if args.out else Path.cwd()
    path = out if out.suffix == ".qasm" else out / circuitgen.qasm_filename(inputs)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(doc.text, encoding="utf-8", newline="\n")
    print(f"wrote {path}", file=sys.stderr)
    for qubit, dist in sorted(circuitgen.simulate_marginals(circuit).items()):
        print(f"q{qubit}: P(0)={dist[0]:.4f}, P(1)={dist[1]:.4f}")
    return 0


def cmd_channels(args, parser) -> int:
    _require(parser, args, "which")
    if args.which == "xi1":
        state = channels.prepare_xi1()
    elif args.which == "xi2":
        state = channels.prepare_xi2()
    elif args.which == "tau":
        state = channels.combined_tau()
    elif args.which == "m":
        state = channels.m_state(args.i, args.j)
    else:
        raise QuantumError(f"unknown channel {args.which!r}; pick xi1, xi2, tau, or m")
    for bits, amp in state.nonzero(tol=1e-12):
        print(f"|{bits}>  {amp.real:+.6f}{amp.imag:+.6f}j")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhybrid",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the noiseless verification suites")
    p.add_argument("--inputs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(func=lambda a, _: cmd_verify(a))

    p = sub.add_parser("run", help="sample one protocol branch and print a transcript")
    for flag in ("--x", "--y", "--a", "--b"):
        p.add_argument(flag, type=float)
    p.add_argument("--y-phase", dest="y_phase", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="noise parameter sweep to CSV")
    p.add_argument("--kind", help="bitflip | phaseflip | phasedamping | depolarizing")
    p.add_argument("--strength", "--lambda", "--gamma", "--delta", "--tau",
                   dest="strength", type=_parse_grid,
                   help="grid start:stop:count (inclusive) or a single value")
    p.add_argument("--b2", type=_parse_grid)
    p.add_argument("--y2", type=_parse_grid)
    p.add_argument("--y-phase", dest="y_phase", type=float)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--jobs", type=int)
    p.add_argument("--include-weighted", dest="include_weighted",
                   action="store_true", default=False)
    p.add_argument("--config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-qasm", help="emit the protocol circuit as OpenQASM 3")
    for flag in ("--x", "--y", "--a", "--b"):
        p.add_argument(flag, type=float)
    p.add_argument("--y-phase", dest="y_phase", type=float)
    p.add_argument("--out", help="target file (.qasm) or directory")
    p.add_argument("--config")
    p.set_defaults(func=cmd_export_qasm)

    p = sub.add_parser("channels", help="dump nonzero amplitudes of a resource channel")
    p.add_argument("--which", help="xi1 | xi2 | tau | m")
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=cmd_channels)

    return parser


_FALLBACKS = {"inputs": 100, "seed": 0, "jobs": 1, "y_phase": 0.0}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    for key, value in _FALLBACKS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    try:
        return args.func(args, parser)
    except QuantumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
