"""Command-line interface tying the simulator into reproducible experiments.

Every subcommand is deterministic given its inputs and --seed (absent seed
means the fixed default 1790, not entropy).  Failures print one
machine-readable line ``ERROR <kind>: <message>`` on stderr and exit
nonzero.
"""

import argparse
import os
import sys as _sys

import numpy as np

from . import algorithms as ALG
from . import compiler as COMP
from . import engine as ENG
from . import gates as GT
from . import prep as PREP
from . import readout as RO
from . import states as ST
from .operators import phase_aligned_distance
from .pulses import frame_unitary, sequence_from_text, sequence_to_text
from .spin_system import load_system

DEFAULT_DWELL = 1.0 / 2048.0
DEFAULT_POINTS = 4096


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def _fmt(x):
    return f"{x:.12g}"


def _export_spectrum(path, spec):
    lines = ["freq_hz\treal\timag"]
    for f, a in zip(spec.frequencies, spec.amplitudes):
        lines.append(f"{_fmt(f)}\t{_fmt(a.real)}\t{_fmt(a.imag)}")
    _write(path, "\n".join(lines) + "\n")


def _export_fid(path, fid):
    lines = ["time_s\treal\timag"]
    for k, v in enumerate(fid.samples):
        lines.append(f"{_fmt(k * fid.dwell)}\t{_fmt(v.real)}\t{_fmt(v.imag)}")
    _write(path, "\n".join(lines) + "\n")


def _export_line_table(path, spec, verdict=None):
    lines = ["freq_hz\tintegral\tlabel"]
    for f, integral, label in spec.lines:
        lines.append(f"{_fmt(f)}\t{_fmt(integral)}\t{label}")
    if verdict is not None:
        lines.append(f"# verdict: {verdict}")
    _write(path, "\n".join(lines) + "\n")


def _parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.replace(",", " ").split():
        key, val = item.split("=", 1)
        out[key] = val
    return out


def cmd_simulate(args):
    system = load_system(args.system)
    seq = sequence_from_text(_read(args.sequence))
    if args.state:
        rho0 = ST.load_state(_read(args.state))
    else:
        rho0 = ST.thermal_deviation(system, [1.0] * system.n)
    options = ENG.SimOptions(
        relaxation=args.relax, capture="events" if args.trajectory else None
    )
    result = ENG.simulate(seq, rho0, system, options)
    if args.trajectory:
        _ensure_dir(args.trajectory)
        for idx, snap in enumerate(result.trajectory):
            _write(os.path.join(args.trajectory, f"event_{idx:04d}.dm"), ST.dump_state(snap))
    out_text = ST.dump_state(result.state)
    if args.out:
        _write(args.out, out_text)
    else:
        _sys.stdout.write(out_text)
    print("frame_report " + " ".join(f"{i}={_fmt(v)}" for i, v in enumerate(result.frame_phases)))
    return 0


def cmd_compile(args):
    system = load_system(args.system)
    circuit = GT.circuit_from_text(_read(args.circuit))
    seq = COMP.compile_circuit(circuit, system)
    text = sequence_to_text(seq)
    if args.out:
        _write(args.out, text)
    else:
        _sys.stdout.write(text)
    if args.verify:
        u_sim = ENG.sequence_propagator(seq, system)
        u_want = frame_unitary(seq.frame_phases, system.n) @ GT.circuit_unitary(circuit)
        err = phase_aligned_distance(u_sim, u_want)
        print(f"fidelity_error {err:.3e}")
        if err > 1e-8:
            raise RuntimeError(f"compiled sequence fails verification: error {err:.3e}")
    return 0


def cmd_prepare(args):
    system = load_system(args.system)
    outdir = _ensure_dir(args.output)
    if args.scheme == "temporal":
        scheme = PREP.temporal_average(system, args.target)
        print(f"scheme temporal experiments {scheme.experiments} "
              f"lower_bound {scheme.lower_bound} weight {_fmt(scheme.weight)}")
        residual = np.abs(
            scheme.combined.matrix - ST.effective_pure_target(system.n, args.target).matrix
        ).max()
        print(f"residual {residual:.3e}")
        if outdir:
            for idx, circ in enumerate(scheme.circuits):
                _write(os.path.join(outdir, f"experiment_{idx}.circ"), GT.circuit_to_text(circ))
            _write(os.path.join(outdir, "combined.dm"), ST.dump_state(scheme.combined))
    elif args.scheme == "spatial":
        seq, state = PREP.spatial_average(system)
        residual = np.abs(state.matrix - ST.effective_pure_target(2, 0).matrix).max()
        cost = PREP.prep_cost("spatial", system.n)
        print(f"scheme spatial experiments {cost['experiments']} "
              f"signal_scale {_fmt(cost['signal_scale'])}")
        print(f"residual {residual:.3e}")
        if outdir:
            _write(os.path.join(outdir, "prep.seq"), sequence_to_text(seq))
            _write(os.path.join(outdir, "prepared.dm"), ST.dump_state(state))
    elif args.scheme == "logical":
        circuit, state, desc = PREP.logical_label(system)
        cost = PREP.prep_cost("logical", system.n)
        print(f"scheme logical experiments {cost['experiments']} "
              f"signal_scale {_fmt(cost['signal_scale'])}")
        print(f"conditioned_block spin {desc['condition_spin']} value {desc['condition_value']} "
              f"subsystem {desc['subsystem_spins']}")
        if outdir:
            _write(os.path.join(outdir, "label.circ"), GT.circuit_to_text(circuit))
            _write(os.path.join(outdir, "rearranged.dm"), ST.dump_state(state))
    return 0


def _spectral_readout(rho_dev, system, spins, frame_phases, outdir, dwell, npoints, tag=""):
    """90y read-out pulse per spin, acquisition, spectra, decoded bits.

    With a frame report, the read-out pulse phase and the receiver phase
    are both referenced to the software rotating frame.
    """
    spectra = {}
    for spin in spins:
        phase = 90.0 + (frame_phases[spin] if frame_phases is not None else 0.0)
        pulse = ENG.hard_pulse_matrix((spin,), 90.0, phase, system.n)
        observed = rho_dev.evolve(pulse)
        fid = RO.acquire(observed, system, [spin], dwell, npoints, frame_phases=frame_phases)
        spec = RO.spectrum(fid, system)
        spectra[spin] = spec
        if outdir:
            _export_fid(os.path.join(outdir, f"fid{tag}_spin{spin}.tsv"), fid)
            _export_spectrum(os.path.join(outdir, f"spectrum{tag}_spin{spin}.tsv"), spec)
    verdicts = RO.decode_bits(spectra, system, dwell, npoints)
    if outdir:
        for spin, spec in spectra.items():
            _export_line_table(
                os.path.join(outdir, f"lines{tag}_spin{spin}.tsv"),
                spec,
                verdicts[spin]["verdict"],
            )
    return spectra, verdicts


def cmd_run(args):
    system = load_system(args.system)
    params = _parse_params(args.params)
    outdir = _ensure_dir(args.output)

    if args.algorithm == "shor":
        if "M" in params:
            problem = ALG.PeriodFindingProblem(
                int(params["M"]),
                int(params["a"]),
                int(params.get("n1", 2 * int(np.ceil(np.log2(int(params["M"])))))),
                int(params.get("n2", int(np.ceil(np.log2(int(params["M"])))))),
            )
            target = problem
            kw = {}
        else:
            table = [int(v) for v in params["f"].split(":")]
            target = table
            kw = {"n1": int(params["n1"]), "n2": int(params["n2"])}
        if args.pulse_level:
            raise COMP.CompileError(
                "period-finding oracles are general permutations and are not "
                "pulse-compilable; run without --pulse-level"
            )
        res = ALG.period_find(
            target, mode=args.mode, shots=args.shots, seed=args.seed, **kw
        )
        dist = res["distribution"]
        print("outcome_histogram " + " ".join(
            f"{k}:{_fmt(dist[k])}" for k in range(len(dist)) if dist[k] > 1e-12
        ))
        if args.mode == "sampled":
            print("counts " + " ".join(f"{k}:{v}" for k, v in sorted(res["counts"].items())))
        print(f"recovered_r {res['recovered_r']}")
        if "factors" in res:
            print(f"factors {res['factors']}")
        print(f"success_probability {_fmt(res['success_probability'])}")
        return 0

    if args.algorithm == "grover":
        marked = int(params.get("marked", 0))
        circuit = ALG.grover_2q(marked)
        rho = ST.effective_pure_target(2, 0)
        if args.pulse_level:
            seq = COMP.compile_circuit(circuit, system)
            result = ENG.simulate(seq, rho, system, ENG.SimOptions())
            final, frames = result.state, result.frame_phases
        else:
            final, frames = GT.apply_circuit(circuit, rho), None
        spectra, verdicts = _spectral_readout(
            final, system, range(2), frames, outdir, args.dwell, args.points
        )
        bits = "".join(str(verdicts[s]["bit"]) for s in range(2))
        print(f"decoded_bits {bits}")
        print(f"marked {marked}")
        ensemble = RO.measure(final.to_full(), range(2))
        print("outcome_histogram " + " ".join(
            f"{k}:{_fmt(p)}" for k, p in enumerate(ensemble["probabilities"]) if p > 1e-12
        ))
        return 0

    if args.algorithm == "dj":
        table = [int(v) for v in params["f"].split(":")]
        circuit = ALG.deutsch_jozsa(table)
        constant, register = ALG.dj_is_constant(table)
        if args.pulse_level:
            rho = ST.effective_pure_target(circuit.n, 0)
            seq = COMP.compile_circuit(circuit, system)
            result = ENG.simulate(seq, rho, system, ENG.SimOptions())
            final = result.state.to_full()
            ensemble = RO.measure(final, range(circuit.n - 1))
            register = ensemble["probabilities"]
            constant = bool(register[0] > 1 - 1e-9)
        print(f"constant {str(constant).lower()}")
        print("register_distribution " + " ".join(_fmt(p) for p in register))
        return 0

    raise ValueError(f"unknown algorithm {args.algorithm!r}")


def cmd_readout(args):
    system = load_system(args.system)
    rho = ST.load_state(_read(args.state))
    spins = [int(s) for s in args.spins.split(",")]
    frames = None
    if args.frame:
        frames = [float(v) for v in args.frame.split(",")]
    outdir = _ensure_dir(args.output)
    if args.no_readout_pulse:
        observed = rho
        spectra = {}
        for spin in spins:
            fid = RO.acquire(observed, system, [spin], args.dwell, args.points, frame_phases=frames)
            spec = RO.spectrum(fid, system)
            spectra[spin] = spec
            if outdir:
                _export_fid(os.path.join(outdir, f"fid_spin{spin}.tsv"), fid)
                _export_spectrum(os.path.join(outdir, f"spectrum_spin{spin}.tsv"), spec)
        verdicts = RO.decode_bits(spectra, system, args.dwell, args.points)
        if outdir:
            for spin, spec in spectra.items():
                _export_line_table(os.path.join(outdir, f"lines_spin{spin}.tsv"),
                                   spec, verdicts[spin]["verdict"])
    else:
        spectra, verdicts = _spectral_readout(
            rho, system, spins, frames, outdir, args.dwell, args.points
        )
    for spin in spins:
        v = verdicts[spin]
        print(f"spin {spin} verdict {v['verdict']} amplitude {_fmt(v['amplitude'])} "
              f"reference {_fmt(v['reference'])}")
    return 0


def cmd_tomography(args):
    system = load_system(args.system)
    circuit = GT.circuit_from_text(_read(args.circuit))
    rho = ST.effective_pure_target(system.n, 0)
    direct = GT.apply_circuit(circuit, rho)
    reconstructed, info = RO.tomography(lambda: GT.apply_circuit(circuit, rho), system.n)
    err = RO.tomography_error(reconstructed, direct)
    print(f"experiments {info['experiments']} bound {4**system.n} complete {info['complete']}")
    print(f"trace_distance {err:.3e}")
    if args.out:
        _write(args.out, ST.dump_state(reconstructed))
    return 0


def cmd_fft(args):
    values = []
    for raw in _read(args.input).splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [float(v) for v in line.split()]
        values.append(complex(parts[0], parts[1] if len(parts) > 1 else 0.0))
    out = GT.fft_reference(values, args.convention)
    text = "\n".join(f"{_fmt(v.real)} {_fmt(v.imag)}" for v in out) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        _sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nmrqc",
        description="Liquid-state NMR quantum computing simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve a state under a pulse sequence")
    p.add_argument("--system", required=True)
    p.add_argument("--sequence", required=True)
    p.add_argument("--state", help="initial state file (default: thermal deviation)")
    p.add_argument("--relax", action="store_true")
    p.add_argument("--trajectory", help="directory for per-event snapshots")
    p.add_argument("--out", help="write the final state here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compile", help="lower a circuit to a pulse sequence")
    p.add_argument("--system", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--verify", action="store_true",
                   help="check the propagator against the circuit unitary")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("prepare", help="effective pure state preparation")
    p.add_argument("--system", required=True)
    p.add_argument("--scheme", required=True, choices=["temporal", "spatial", "logical"])
    p.add_argument("--target", type=int, default=0)
    p.add_argument("--output", help="directory for circuits/sequences/states")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("run", help="run a quantum algorithm")
    p.add_argument("--system", required=True)
    p.add_argument("--algorithm", required=True, choices=["shor", "grover", "dj"])
    p.add_argument("--params", default="",
                   help="comma/space separated key=value pairs, e.g. M=15,a=7")
    p.add_argument("--mode", default="ensemble", choices=["ensemble", "sampled"])
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int, default=ALG.DEFAULT_SEED)
    p.add_argument("--pulse-level", action="store_true",
                   help="route through compile+simulate instead of apply_circuit")
    p.add_argument("--output", help="directory for spectra exports")
    p.add_argument("--dwell", type=float, default=DEFAULT_DWELL)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("readout", help="FID, spectrum, line table, bit verdicts")
    p.add_argument("--system", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--spins", required=True, help="comma-separated spin indices")
    p.add_argument("--dwell", type=float, default=DEFAULT_DWELL)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--frame", help="comma-separated per-spin frame report (deg)")
    p.add_argument("--no-readout-pulse", action="store_true",
                   help="acquire the state as-is (default applies a 90y pulse per spin)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_readout)

    p = sub.add_parser("tomography", help="reconstruct the state a circuit prepares")
    p.add_argument("--system", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--out", help="write the reconstructed state here")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("fft", help="reference discrete Fourier transform")
    p.add_argument("--convention", default="-", choices=["+", "-"])
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fft)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one machine-readable error line, nonzero exit
        print(f"ERROR {type(exc).__name__}: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
