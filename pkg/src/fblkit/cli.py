"""Command-line front end.

Exit codes: 0 success, 2 input/validation error, 3 unsupported mode or decoder
combination, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .asymptotics import AsymptoticParams, ErrorSpec, expected_rate_erasure, ordinary_logM
from .dmc_core import Channel, JointPmf, epsilon_dispersion, source_conditional_stats
from .errors import ArgumentError, FblkitError, NumericError, UnsupportedModeError, ValidationError
from .hyptest import dt_achievability_logM, mc_converse_logM
from .mtypes import TypeClassSpec
from .simulators import (
    CodeParams, DecoderSpec, SimConfig, erasure_design, list_design, simulate_arq, simulate_erasure,
    simulate_list, simulate_sw, sw_design, sw_undetected_bound,
)

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_NUMERIC = 0, 2, 3, 4
CSV_DIGITS = 9
HUMAN_DIGITS = 6


# ---------------------------------------------------------------- loading

def _parse_shorthand(spec: str, kinds: dict):
    name, _, value = spec.partition(":")
    if name not in kinds or not value:
        return None
    try:
        param = float(value)
    except ValueError:
        raise ValidationError(f"{spec!r}: parameter {value!r} is not a number") from None
    return kinds[name](param)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return data


def _matrix_field(data: dict, path: str, key: str) -> list:
    if key not in data:
        raise ValidationError(f"{path}: missing field {key!r}")
    rows = data[key]
    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{path}: field {key!r} must be a non-empty list of rows")
    width = None
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ValidationError(f"{path}: {key} row {i} must be a non-empty list")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"{path}: {key} row {i}, entry {j} is not a number")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(f"{path}: {key} row {i} has {len(row)} entries, row 0 has {width}")
    return rows


def _check_sizes(data: dict, path: str, rows: list, size_keys: tuple[str, str]):
    for key, actual in zip(size_keys, (len(rows), len(rows[0]))):
        if key in data and data[key] != actual:
            raise ValidationError(f"{path}: field {key!r} is {data[key]!r} but the matrix has {actual}")


def _wrap(path: str, key: str, build, rows):
    try:
        return build(rows)
    except ValidationError as exc:
        raise ValidationError(f"{path}: field {key!r}: {exc}") from None


def load_channel(spec: str) -> Channel:
    """``bsc:q``, ``bec:p`` or a JSON file {"input_size", "output_size", "matrix"} (rows = inputs)."""
    ch = _parse_shorthand(spec, {"bsc": Channel.bsc, "bec": Channel.bec})
    if ch is not None:
        return ch
    data = _load_json(spec)
    rows = _matrix_field(data, spec, "matrix")
    _check_sizes(data, spec, rows, ("input_size", "output_size"))
    return _wrap(spec, "matrix", Channel, rows)


def load_source(spec: str) -> JointPmf:
    """``dsbs:p`` or a JSON file {"x_size", "y_size", "matrix"} (rows = x, columns = y)."""
    src = _parse_shorthand(spec, {"dsbs": JointPmf.dsbs})
    if src is not None:
        return src
    data = _load_json(spec)
    rows = _matrix_field(data, spec, "matrix")
    _check_sizes(data, spec, rows, ("x_size", "y_size"))
    return _wrap(spec, "matrix", JointPmf, rows)


# ---------------------------------------------------------------- output

def _fmt(x, digits: int) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{digits}g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def make_manifest(command: str, args: dict, seed: int | None) -> dict:
    return {
        "command": command,
        "args": args,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v, CSV_DIGITS) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None, manifest: dict | None = None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if manifest is not None:
        with open(out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_json(manifest))


def _args_dict(ns: argparse.Namespace, drop=("func", "threads", "out")) -> dict:
    # thread count changes scheduling only, never results, so it stays out of the manifest
    return {k: v for k, v in sorted(vars(ns).items()) if k not in drop}


# ---------------------------------------------------------------- commands

def cmd_info(ns) -> int:
    if ns.source:
        pxy = load_source(ns.source)
        st = source_conditional_stats(pxy)
        payload = {"cond_entropy_bits": st.cond_entropy_bits, "cond_varentropy_bits2": st.cond_varentropy_bits2}
        if ns.json:
            sys.stdout.write(dump_json(payload))
        else:
            sys.stdout.write(f"H(X|Y) = {_fmt(st.cond_entropy_bits, HUMAN_DIGITS)} bits\n"
                             f"V(X|Y) = {_fmt(st.cond_varentropy_bits2, HUMAN_DIGITS)} bits^2\n")
        return EXIT_OK
    if not ns.channel:
        raise ArgumentError("info needs --channel or --source")
    w = load_channel(ns.channel)
    st = epsilon_dispersion(w, ns.eps, ns.tol)
    payload = {
        "capacity_bits": st.capacity_bits, "caid": st.caid.probs, "v_at_caid": st.v_at_caid,
        "eps": st.eps, "v_eps": st.v_eps, "v_min": st.v_min, "v_max": st.v_max,
        "gap": st.gap, "iterations": st.iterations,
    }
    if ns.json:
        sys.stdout.write(dump_json(payload))
        return EXIT_OK
    caid = ", ".join(_fmt(p, HUMAN_DIGITS) for p in st.caid.probs)
    sys.stdout.write(
        f"C       = {_fmt(st.capacity_bits, HUMAN_DIGITS)} bits/use\n"
        f"caid    = ({caid})\n"
        f"V(P*,W) = {_fmt(st.v_at_caid, HUMAN_DIGITS)} bits^2/use\n"
        f"V_eps   = {_fmt(st.v_eps, HUMAN_DIGITS)} bits^2/use (eps = {_fmt(st.eps, HUMAN_DIGITS)})\n"
        f"V_min   = {_fmt(st.v_min, HUMAN_DIGITS)}, V_max = {_fmt(st.v_max, HUMAN_DIGITS)}\n"
    )
    return EXIT_OK


def fig1_rows(q: float, n: int, eps_u: float, grid) -> list[list[float]]:
    """Rows (eps_e, ga_expected, ga_ordinary, dt_expected, mc_expected, dt_ordinary, mc_ordinary)."""
    grid = sorted(float(g) for g in grid)
    if not grid or any(not 0.0 < g < 1.0 for g in grid):
        raise ArgumentError("every eps_e grid point must lie in (0, 1)")
    if not 0.0 < eps_u < 1.0:
        raise ArgumentError(f"eps_u must lie in (0, 1), got {eps_u}")
    w = Channel.bsc(q)
    st = epsilon_dispersion(w, 0.25)  # the BSC has a unique caid, so V_eps is the same for all eps
    cap, v = st.capacity_bits, st.v_eps
    params = AsymptoticParams(n, cap, v)
    ga_ord = ordinary_logM(params, eps_u) / n
    dt_ord = dt_achievability_logM(n, q, eps_u).logM_bits / n
    mc_ord = mc_converse_logM(n, q, eps_u).logM_bits / n
    rows = []
    for eps_e in grid:
        eps_t = eps_u + eps_e
        if eps_t >= 1.0:
            raise ArgumentError(f"eps_u + eps_e = {eps_t} must stay below 1")
        err = ErrorSpec.from_undetected_erasure(eps_u, eps_e)
        ga_exp = expected_rate_erasure(params, err).r_erasure
        dt_exp = (1.0 - eps_e) * dt_achievability_logM(n, q, eps_t).logM_bits / n
        mc_exp = (1.0 - eps_e) * mc_converse_logM(n, q, eps_t).logM_bits / n
        rows.append([eps_e, ga_exp, ga_ord, dt_exp, mc_exp, dt_ord, mc_ord])
    return rows


FIG1_HEADER = ["eps_e", "ga_expected", "ga_ordinary", "dt_expected", "mc_expected", "dt_ordinary", "mc_ordinary"]


def cmd_fig1(ns) -> int:
    if ns.grid:
        try:
            grid = [float(g) for g in ns.grid.split(",")]
        except ValueError:
            raise ArgumentError(f"--grid must be comma-separated numbers, got {ns.grid!r}") from None
    else:
        if not (0 < ns.grid_min < ns.grid_max < 1) or ns.points < 1:
            raise ArgumentError("need 0 < grid-min < grid-max < 1 and points >= 1")
        grid = np.logspace(math.log10(ns.grid_min), math.log10(ns.grid_max), ns.points).tolist()
    rows = fig1_rows(ns.q, ns.n, ns.eps_u, grid)
    _emit(_csv_text(FIG1_HEADER, rows), ns.out, make_manifest("fig1", _args_dict(ns), None))
    return EXIT_OK


def _float_list(text: str, name: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise ArgumentError(f"--{name} must be comma-separated numbers, got {text!r}") from None


def cmd_bounds(ns) -> int:
    w = Channel.bsc(ns.q)
    st = epsilon_dispersion(w, 0.25)
    rows = []
    for n in sorted(int(v) for v in _float_list(ns.n, "n")):
        for eps in sorted(_float_list(ns.eps, "eps")):
            for bp in (dt_achievability_logM(n, ns.q, eps), mc_converse_logM(n, ns.q, eps)):
                rows.append([n, eps, bp.kind, bp.logM_bits])
            rows.append([n, eps, "gaussian", ordinary_logM(AsymptoticParams(n, st.capacity_bits, st.v_eps), eps)])
    _emit(_csv_text(["n", "eps", "kind", "logM_bits"], rows), ns.out, make_manifest("bounds", _args_dict(ns), None))
    return EXIT_OK


def _sim_config(ns) -> SimConfig:
    return SimConfig(ns.trials, ns.seed, ns.threads, ns.mode)


def _sim_erasure(ns):
    w = load_channel(ns.channel)
    caid = epsilon_dispersion(w, 0.25).caid
    if ns.gamma is None or ns.logM is None:
        if ns.target_eps_e is None:
            raise ArgumentError("give --target-eps-e or both --gamma and --logM")
        gamma, logM = erasure_design(caid, w, ns.n, ns.target_eps_e)
    gamma = ns.gamma if ns.gamma is not None else gamma
    logM = ns.logM if ns.logM is not None else logM
    dec = DecoderSpec(ns.decoder, gamma, ns.psi)
    code = CodeParams(ns.n, logM, 1, TypeClassSpec.nearest(caid.probs, ns.n))
    est = simulate_erasure(w, code, dec, _sim_config(ns))
    params = {"n": ns.n, "logM": logM, "gamma": gamma, "decoder": ns.decoder, "psi": ns.psi,
              "composition": list(code.composition.counts)}
    return est.to_dict(), params


def _sim_list(ns):
    w = load_channel(ns.channel)
    st = epsilon_dispersion(w, ns.eps)
    gamma, logM = list_design(st.v_eps, st.capacity_bits, ns.n, ns.eps, ns.L)
    gamma = ns.gamma if ns.gamma is not None else gamma
    logM = ns.logM if ns.logM is not None else logM
    est = simulate_list(w, st.caid, CodeParams(ns.n, logM, ns.L, st.caid), gamma, _sim_config(ns))
    return est.to_dict(), {"n": ns.n, "logM": logM, "gamma": gamma, "L": ns.L, "eps": ns.eps}


def _sim_sw(ns):
    pxy = load_source(ns.source)
    src = source_conditional_stats(pxy)
    gamma, logM = sw_design(src, pxy.x_size, pxy.y_size, ns.n, ns.eps_t)
    gamma = ns.gamma if ns.gamma is not None else gamma
    logM = ns.logM if ns.logM is not None else logM
    est = simulate_sw(pxy, ns.n, logM, gamma, _sim_config(ns))
    params = {"n": ns.n, "logM": logM, "gamma": gamma, "eps_t": ns.eps_t,
              "undetected_bound": sw_undetected_bound(ns.n, pxy.x_size, pxy.y_size, logM, gamma)}
    return est.to_dict(), params


def _sim_arq(ns):
    if ns.rate is None:
        w = load_channel(ns.channel)
        eps_t = ns.eps_u + ns.eps_e
        st = epsilon_dispersion(w, eps_t)
        rate = ordinary_logM(AsymptoticParams(ns.n, st.capacity_bits, st.v_eps), eps_t) / ns.n
    else:
        rate = ns.rate
    est = simulate_arq(rate, ns.eps_e, ns.eps_u, ns.b, _sim_config(ns), ns.delta)
    return est.to_dict(), {"rate": rate, "eps_e": ns.eps_e, "eps_u": ns.eps_u, "b": ns.b,
                           "delta": ns.delta, "n": ns.n}


SIM_KINDS = {"erasure": _sim_erasure, "list": _sim_list, "sw": _sim_sw, "arq": _sim_arq}


def cmd_sim(ns) -> int:
    estimates, params = SIM_KINDS[ns.kind](ns)
    payload = {
        "kind": ns.kind,
        "mode": ns.mode,
        "trials": ns.trials,
        "seed": ns.seed,
        "estimates": estimates,
        "params": params,
        "manifest": make_manifest(f"sim {ns.kind}", _args_dict(ns), ns.seed),
    }
    _emit(dump_json(payload), ns.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def _default_threads() -> int:
    raw = os.environ.get("FBLKIT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ArgumentError(f"FBLKIT_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ArgumentError(f"FBLKIT_THREADS must be a positive integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fblkit", description="Finite-blocklength erasure, list and Slepian-Wolf toolkit.")
    p.add_argument("--version", action="version", version=f"fblkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    info = sub.add_parser("info", help="capacity, dispersion and capacity-achieving input of a channel")
    info.add_argument("--channel", help="bsc:q, bec:p or JSON file with a 'matrix' field")
    info.add_argument("--source", help="dsbs:p or JSON file with a 'matrix' field")
    info.add_argument("--eps", type=float, default=0.1)
    info.add_argument("--tol", type=float, default=1e-9)
    info.add_argument("--json", action="store_true")
    info.set_defaults(func=cmd_info)

    fig = sub.add_parser("fig1", help="expected-rate vs ordinary-rate comparison on the BSC (CSV)")
    fig.add_argument("--q", type=float, default=0.11)
    fig.add_argument("--n", type=int, default=2000)
    fig.add_argument("--eps-u", type=float, default=1e-6)
    fig.add_argument("--grid-min", type=float, default=1e-6)
    fig.add_argument("--grid-max", type=float, default=1e-1)
    fig.add_argument("--points", type=int, default=50)
    fig.add_argument("--grid", help="explicit comma-separated eps_e values (overrides the log grid)")
    fig.add_argument("--out")
    fig.set_defaults(func=cmd_fig1)

    bnd = sub.add_parser("bounds", help="DT, meta-converse and Gaussian log M on the BSC (CSV)")
    bnd.add_argument("--q", type=float, default=0.11)
    bnd.add_argument("--n", default="2000", help="comma-separated blocklengths")
    bnd.add_argument("--eps", default="1e-3,1e-2,1e-1", help="comma-separated error probabilities")
    bnd.add_argument("--out")
    bnd.set_defaults(func=cmd_bounds)

    sim = sub.add_parser("sim", help="Monte Carlo simulation (JSON)")
    sim.add_argument("kind", choices=sorted(SIM_KINDS))
    sim.add_argument("--channel", default="bsc:0.11")
    sim.add_argument("--source", default="dsbs:0.11")
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--mode", choices=["exact_codebook", "decomposed"], default="decomposed")
    sim.add_argument("--gamma", type=float, help="override the designed threshold")
    sim.add_argument("--logM", type=float, help="override the designed log2 M")
    sim.add_argument("--decoder", default="emi_threshold",
                     choices=["emi_threshold", "forney_optimal", "forney_simple"])
    sim.add_argument("--psi", type=float, default=1.0)
    sim.add_argument("--target-eps-e", type=float, default=None)
    sim.add_argument("--eps", type=float, default=0.1, help="list: target P[true message not in list]")
    sim.add_argument("--L", type=int, default=33)
    sim.add_argument("--eps-t", type=float, default=0.1, help="sw: target total error")
    sim.add_argument("--eps-e", type=float, default=1e-2, help="arq: erasure probability")
    sim.add_argument("--eps-u", type=float, default=1e-6, help="arq: undetected error probability")
    sim.add_argument("--rate", type=float, default=None, help="arq: bits per use (default: Gaussian rate)")
    sim.add_argument("--b", type=int, default=100)
    sim.add_argument("--delta", type=float, default=None)
    sim.add_argument("--out")
    sim.set_defaults(func=cmd_sim)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if getattr(ns, "threads", 0) is None:
            ns.threads = _default_threads()
        return ns.func(ns)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    except UnsupportedModeError as exc:
        sys.stderr.write(f"fblkit: unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except NumericError as exc:
        sys.stderr.write(f"fblkit: numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValidationError, ArgumentError, FblkitError) as exc:
        sys.stderr.write(f"fblkit: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
