"""Command-line surface: analyze, nyquist, rootlocus, simulate, sweep.

A design is a single JSON document naming the plant, the controller, the
nonlinearity parameters, and the dominance rate; the subcommands run the
two-step workflow (dominance certificate, then instability tuning), simulate
the closed loop, and emit JSON reports, CSVs, and self-contained SVG plots.
Exit codes: 0 pass, 2 verdict failure, 1 error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import criterion, equilibria, sim
from ._svg import SvgFigure
from .errors import ConfigError, Divergence, XcposcError
from .netfun import (
    DcMotorPlant,
    LoopFunction,
    RcController,
    RlcController,
    make_dc_motor,
    make_loop,
    make_rc,
    make_rlc,
)
from .poly import RationalFunction
from .xcp import SectorNonlinearity

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


def golden_config_path(name: str) -> str:
    """Filesystem path of a packaged design config (design1, design2, design3, rc_design)."""
    ref = resources.files("xcposc") / "configs" / f"{name}.json"
    return str(ref)


# --- configuration -----------------------------------------------------------

_PLANT_KEYS = {
    "dc_motor": {"L_m", "R_m", "J_m", "b_m", "k_m"},
    "rational": {"numerator", "denominator"},
}
_CTRL_KEYS = {
    "rlc": {"R", "L", "C"},
    "rc": {"R", "C"},
    "rational": {"numerator", "denominator"},
}


def _require_number(block: dict, key: str, where: str, positive: bool = True) -> float:
    if key not in block:
        raise ConfigError(f"{where}: missing key '{key}'")
    v = block[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v}")
    return float(v)


def _require_coeffs(block: dict, key: str, where: str) -> list[float]:
    v = block.get(key)
    if not isinstance(v, list) or not v or not all(
        isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c) for c in v
    ):
        raise ConfigError(f"{where}.{key}: expected a non-empty list of finite numbers")
    return [float(c) for c in v]


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return normalize_config(cfg)


def normalize_config(cfg) -> dict:
    """Validate and return the config in canonical layout."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    allowed = {"plant", "controller", "xcp", "lambda", "sim", "sampling"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("plant", "controller", "xcp", "lambda"):
        if key not in cfg:
            raise ConfigError(f"missing required config key '{key}'")

    out: dict = {}
    for section, kinds in (("plant", _PLANT_KEYS), ("controller", _CTRL_KEYS)):
        block = cfg[section]
        if not isinstance(block, dict):
            raise ConfigError(f"{section} must be an object")
        kind = block.get("kind")
        if kind not in kinds:
            raise ConfigError(f"{section}.kind must be one of {sorted(kinds)}, got {kind!r}")
        extra = set(block) - kinds[kind] - {"kind"}
        if extra:
            raise ConfigError(f"unknown {section} keys for kind '{kind}': {sorted(extra)}")
        norm = {"kind": kind}
        if kind == "rational":
            norm["numerator"] = _require_coeffs(block, "numerator", section)
            norm["denominator"] = _require_coeffs(block, "denominator", section)
        else:
            for key in sorted(kinds[kind]):
                norm[key] = _require_number(block, key, section)
        out[section] = norm

    xcp_block = cfg["xcp"]
    if not isinstance(xcp_block, dict) or set(xcp_block) - {"k_n", "I"}:
        raise ConfigError("xcp must be an object with keys k_n and I")
    k_n = _require_number(xcp_block, "k_n", "xcp")
    if "I" not in xcp_block:
        raise ConfigError("xcp: missing key 'I'")
    tail = xcp_block["I"]
    if not isinstance(tail, (int, float)) or isinstance(tail, bool) or not math.isfinite(tail) \
            or tail < 0:
        raise ConfigError(f"xcp.I: expected a nonnegative finite number, got {tail!r}")
    out["xcp"] = {"k_n": k_n, "I": float(tail)}

    lam = cfg["lambda"]
    if not isinstance(lam, (int, float)) or isinstance(lam, bool) or not lam > 0:
        raise ConfigError(f"lambda must be a positive number, got {lam!r}")
    out["lambda"] = float(lam)

    if "sim" in cfg:
        block = cfg["sim"]
        if not isinstance(block, dict) or set(block) - {"dt", "t_end", "x0_perturbation"}:
            raise ConfigError("sim accepts only dt, t_end, x0_perturbation")
        norm = {}
        if "dt" in block:
            norm["dt"] = _require_number(block, "dt", "sim")
        if "t_end" in block:
            norm["t_end"] = _require_number(block, "t_end", "sim")
        if "x0_perturbation" in block:
            v = block["x0_perturbation"]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) \
                    or v < 0:
                raise ConfigError("sim.x0_perturbation must be a nonnegative number")
            norm["x0_perturbation"] = float(v)
        out["sim"] = norm

    if "sampling" in cfg:
        block = cfg["sampling"]
        if not isinstance(block, dict) or set(block) - {"omega_max", "base_points"}:
            raise ConfigError("sampling accepts only omega_max and base_points")
        norm = {}
        if "omega_max" in block:
            norm["omega_max"] = _require_number(block, "omega_max", "sampling")
        if "base_points" in block:
            v = block["base_points"]
            if not isinstance(v, int) or isinstance(v, bool) or v < 16:
                raise ConfigError("sampling.base_points must be an integer >= 16")
            norm["base_points"] = v
        out["sampling"] = norm
    return out


@dataclass
class Design:
    """Config materialized into toolkit objects."""

    plant_tf: RationalFunction
    controller_tf: RationalFunction
    motor: DcMotorPlant | None
    rlc: RlcController | None
    rc: RcController | None
    nl: SectorNonlinearity
    lam: float
    sim_block: dict | None
    sampling: dict

    def loop(self) -> LoopFunction:
        return make_loop(self.controller_tf, self.plant_tf)


def build_design(cfg: dict) -> Design:
    pblock = cfg["plant"]
    motor = None
    if pblock["kind"] == "dc_motor":
        motor = DcMotorPlant(
            L_m=pblock["L_m"], R_m=pblock["R_m"], J_m=pblock["J_m"],
            b_m=pblock["b_m"], k_m=pblock["k_m"],
        )
        plant_tf = make_dc_motor(motor)
    else:
        plant_tf = RationalFunction(pblock["numerator"], pblock["denominator"])

    cblock = cfg["controller"]
    rlc = rc = None
    if cblock["kind"] == "rlc":
        rlc = RlcController(R=cblock["R"], L=cblock["L"], C=cblock["C"])
        controller_tf = rlc.transfer_function()
    elif cblock["kind"] == "rc":
        rc = RcController(R=cblock["R"], C=cblock["C"])
        controller_tf = rc.transfer_function()
    else:
        controller_tf = RationalFunction(cblock["numerator"], cblock["denominator"])

    nl = SectorNonlinearity(k_n=cfg["xcp"]["k_n"], I=cfg["xcp"]["I"])
    return Design(
        plant_tf=plant_tf,
        controller_tf=controller_tf,
        motor=motor,
        rlc=rlc,
        rc=rc,
        nl=nl,
        lam=cfg["lambda"],
        sim_block=cfg.get("sim"),
        sampling=cfg.get("sampling", {}),
    )


# --- report assembly ---------------------------------------------------------

def _omega_guess(design: Design, loop: LoopFunction) -> float:
    if design.rlc is not None:
        return math.sqrt(1.0 / (design.rlc.L * design.rlc.C))
    if design.rc is not None:
        shifted = design.lam + max(p.real for p in design.plant_tf.poles().roots)
        if shifted > 1e-6:
            return shifted
    dominant = [p for p in loop.G.poles().all_roots() if p.real > -design.lam]
    if dominant:
        imag = max(abs(p.imag) for p in dominant)
        if imag > 1e-6:
            return imag
        return max(abs(p) for p in dominant)
    return 1.0


def run_simulation(design: Design, loop: LoopFunction) -> tuple[sim.OscillationMetrics, sim.Trajectory]:
    ss = sim.realize(loop.G)
    if design.motor is not None:
        ss = sim.augment_with_motor(ss, design.motor)
    block = design.sim_block or {}
    guess = _omega_guess(design, loop)
    dt = block.get("dt", sim.suggested_timestep(ss, guess))
    t_end = block.get("t_end", sim.suggested_horizon(guess))
    perturbation = block.get("x0_perturbation", 1e-3)
    x0 = np.zeros(ss.n)
    x0[0] = perturbation
    traj = sim.integrate(ss, design.nl, x0, dt, t_end)
    metrics = sim.measure(traj, initial_perturbation=max(perturbation, 1e-300))
    return metrics, traj


def _f(x):
    """JSON-safe float: non-finite becomes None."""
    x = float(x)
    return x if math.isfinite(x) else None


def _croot(z: complex):
    return [_f(z.real), _f(z.imag)]


def analyze_design(design: Design) -> dict:
    """Run the full workflow and assemble the DesignReport dictionary."""
    loop = design.loop()
    reasons: list[str] = []

    dom = criterion.check_theorem2(loop, design.nl, design.lam, **design.sampling)
    if not dom.overall:
        details = []
        if not dom.cond1_no_axis_zeros:
            details.append("zeros of G^-1 on the shifted contour")
        if dom.winding_rootcount != dom.required_encirclements:
            details.append(
                f"encirclements {dom.winding_rootcount} != required {dom.required_encirclements}"
            )
        if not dom.disk.passed:
            details.append(f"curve enters the disk (margin {dom.disk.margin:.4g})")
        reasons.append("not 2-dominant: " + "; ".join(details))

    rule = None
    rule_dict = None
    if design.rlc is not None:
        rule = criterion.check_theorem3_rlc(design.plant_tf, design.rlc, design.nl, design.lam)
        rule_dict = {
            "kind": "rlc",
            "cond1_no_axis_zeros": rule.cond1_no_axis_zeros,
            "cond2_no_unstable_plant_poles": rule.cond2_no_unstable_plant_poles,
            "cond3_max_real": _f(rule.cond3_max_real),
            "pass": rule.passed,
        }
        if not rule.passed:
            reasons.append("rlc design rule failed")
    elif design.rc is not None:
        rule = criterion.check_theorem4_rc(design.plant_tf, design.rc, design.nl, design.lam)
        rule_dict = {
            "kind": "rc",
            "cond1_no_axis_zeros": rule.cond1_no_axis_zeros,
            "cond2_single_dominant_plant_pole": rule.cond2_single_dominant_plant_pole,
            "cond3_max_real": _f(rule.cond3_max_real),
            "near_tie": rule.near_tie,
            "pass": rule.passed,
        }
        if not rule.passed:
            reasons.append("rc design rule failed")

    eq = equilibria.find_equilibria(loop, design.nl)
    origin = next(p for p in eq.points if p.dv == 0.0)
    if not eq.unique:
        reasons.append("multiple equilibria: K > 1/G(0)")
    if not origin.unstable:
        reasons.append(f"origin stable at K={design.nl.K:.4g}")

    window = equilibria.instability_window(loop, design.nl, lam=design.lam)

    metrics_dict = None
    sim_ok = True
    if design.sim_block is not None:
        try:
            metrics, _ = run_simulation(design, loop)
        except Divergence as exc:
            sim_ok = False
            reasons.append(f"simulation diverged at step {exc.step}")
            metrics_dict = {"classification": "diverged"}
        else:
            metrics_dict = metrics_to_dict(metrics)
            if metrics.classification != "limit_cycle":
                sim_ok = False
                reasons.append(f"simulation classification: {metrics.classification}")

    certified = (
        dom.overall
        and eq.unique
        and origin.unstable
        and (rule is None or rule.passed)
        and sim_ok
    )

    return {
        "dominance": {
            "lambda": _f(dom.lam),
            "cond1_no_axis_zeros": dom.cond1_no_axis_zeros,
            "offending_roots": [_croot(z) for z in dom.offending_roots],
            "cond2_encirclements": {
                "required": dom.required_encirclements,
                "winding_sampled": dom.winding_sampled,
                "winding_rootcount": dom.winding_rootcount,
                "q": dom.q,
                "r": dom.r,
            },
            "cond3_disk": {
                "K": _f(dom.disk.K),
                "margin": _f(dom.disk.margin),
                "worst_omega": _f(dom.disk.worst_omega),
                "pass": dom.disk.passed,
            },
            "overall": dom.overall,
        },
        "design_rule": rule_dict,
        "equilibria": {
            "count": len(eq.points),
            "unique": eq.unique,
            "K": _f(design.nl.K),
            "K_threshold": _f(eq.K_threshold),
            "points": [
                {"dv": _f(p.dv), "slope": _f(p.slope_at), "unstable": p.unstable}
                for p in eq.points
            ],
        },
        "instability": {
            "K_min_unstable": _f(window.K_min_unstable),
            "K_max_allowed": _f(window.K_max_allowed),
            "feasible": window.feasible,
            "has_slow_zero": window.has_slow_zero,
            "slow_zeros": [_f(z) for z in window.slow_zeros],
        },
        "simulation": metrics_dict,
        "verdict": {"oscillation_certified": certified, "reasons": reasons},
    }


def metrics_to_dict(m: sim.OscillationMetrics) -> dict:
    return {
        "frequency": _f(m.frequency),
        "amplitude": _f(m.amplitude),
        "period_jitter": _f(m.period_jitter),
        "converged": m.converged,
        "classification": m.classification,
        "half_wave_symmetric": m.half_wave_symmetric,
    }


# --- file helpers ------------------------------------------------------------

def _atomic_write(path: str, writer) -> None:
    """Write via a sibling temp file and rename, so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(obj: dict, compact: bool) -> None:
    if compact:
        print(json.dumps(obj, separators=(",", ":")))
    else:
        print(json.dumps(obj, indent=2))


# --- subcommands -------------------------------------------------------------

def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    if args.dump_config:
        _emit_json(cfg, args.json)
        return EXIT_OK
    design = build_design(cfg)
    report = analyze_design(design)
    _emit_json(report, args.json)
    return EXIT_OK if report["verdict"]["oscillation_certified"] else EXIT_FAIL


def _disk_points(K: float, n: int = 360):
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return theta, K / 2.0 + (K / 2.0) * np.exp(1j * theta)


def _cmd_nyquist(args) -> int:
    cfg = load_config(args.config)
    design = build_design(cfg)
    loop = design.loop()
    curve = criterion.sample_shifted(loop.G_inverse, design.lam, **design.sampling)
    criterion_path = args.out
    _atomic_write(criterion_path, lambda fh: _write_curve(fh, curve))

    theta, disk = _disk_points(design.nl.K)
    stem, ext = os.path.splitext(criterion_path)
    disk_path = f"{stem}_disk{ext or '.csv'}"
    _atomic_write(disk_path, lambda fh: _write_disk(fh, theta, disk))

    if args.svg:
        fig = SvgFigure()
        fig.set_title(
            f"shifted inverse loop, lambda={design.lam:g}, disk K={design.nl.K:.4g}"
        )
        fig.add_circle(design.nl.K / 2.0, 0.0, design.nl.K / 2.0)
        fig.add_polyline(zip(curve.values.real, curve.values.imag))
        _atomic_write(args.svg, lambda fh: fh.write(fig.render() + "\n"))
    return EXIT_OK


def _write_curve(fh, curve) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["omega", "re", "im"])
    for w, v in zip(curve.frequencies, curve.values):
        writer.writerow([repr(float(w)), repr(float(v.real)), repr(float(v.imag))])


def _write_disk(fh, theta, disk) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["theta", "re", "im"])
    for t, z in zip(theta, disk):
        writer.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])


def _cmd_rootlocus(args) -> int:
    cfg = load_config(args.config)
    design = build_design(cfg)
    loop = design.loop()
    g0 = loop.G(0.0).real
    if args.kmax is not None:
        kmax = args.kmax
    elif abs(g0) > 1e-12:
        kmax = 2.0 / g0
    else:
        kmax = 10.0 * max(design.nl.K, 1.0)
    steps = max(args.steps, 2)
    gains = np.concatenate([[0.0], np.geomspace(kmax * 1e-3, kmax, steps - 1)])
    branch = equilibria.root_locus(loop, gains)

    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["K", "re", "im"])
        for k, roots in zip(branch.gains, branch.roots_per_gain):
            for root in roots:
                writer.writerow([repr(float(k)), repr(root.real), repr(root.imag)])

    _atomic_write(args.out, write)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    design = build_design(cfg)
    if design.sim_block is None:
        design.sim_block = {}
    loop = design.loop()
    metrics, traj = run_simulation(design, loop)

    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        header = ["t", "dv", "di"]
        aux = traj.aux_states
        if aux is not None:
            header += ["motor_current", "motor_speed"]
        writer.writerow(header)
        times = traj.times
        for i in range(len(times)):
            row = [repr(float(times[i])), repr(float(traj.output_dv[i])),
                   repr(float(traj.input_di[i]))]
            if aux is not None:
                row += [repr(float(aux[i, 0])), repr(float(aux[i, 1]))]
            writer.writerow(row)

    if args.out:
        _atomic_write(args.out, write)
    _emit_json(metrics_to_dict(metrics), args.json)
    return EXIT_OK if metrics.classification == "limit_cycle" else EXIT_FAIL


def _set_leaf(cfg: dict, path: str, value: float) -> None:
    parts = path.split(".")
    node = cfg
    for key in parts[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown parameter path '{path}'")
        node = node[key]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node or not isinstance(
        node[leaf], (int, float)
    ) or isinstance(node[leaf], bool):
        raise ConfigError(f"parameter path '{path}' does not address a numeric leaf")
    node[leaf] = value


def _parse_range(spec: str) -> list[float]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("--range expects start:stop:step or a comma-separated list")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("--range step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(max(n, 0))]
    if not spec.strip():
        return []
    return [float(p) for p in spec.split(",") if p.strip()]


def _cmd_sweep(args) -> int:
    base = load_config(args.config)
    _set_leaf(copy.deepcopy(base), args.param, 1.0)  # validate the path up front
    values = _parse_range(args.range)

    rows = []
    for value in values:
        cfg = copy.deepcopy(base)
        _set_leaf(cfg, args.param, value)
        try:
            report = analyze_design(build_design(normalize_config(cfg)))
            verdict = report["verdict"]
            rule = report["design_rule"]
            simblk = report["simulation"]
            rows.append([
                args.param,
                repr(float(value)),
                verdict["oscillation_certified"],
                report["dominance"]["overall"],
                report["equilibria"]["unique"],
                not any(r.startswith("origin stable") for r in verdict["reasons"]),
                rule["pass"] if rule else "",
                simblk["classification"] if simblk else "",
                ";".join(verdict["reasons"]),
            ])
        except XcposcError as exc:
            rows.append([args.param, repr(float(value)), False, "", "", "", "", "",
                         f"error: {exc}"])

    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "param", "value", "oscillation_certified", "dominance", "unique",
            "origin_unstable", "design_rule", "simulation", "reasons",
        ])
        writer.writerows(rows)

    _atomic_write(args.out, write)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xcposc",
        description="Design and verify cross-coupled-pair oscillation controllers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="design config JSON path")
        p.add_argument("--json", action="store_true", help="compact single-line JSON output")

    p = sub.add_parser("analyze", help="run the certification workflow")
    add_common(p)
    p.add_argument("--dump-config", action="store_true",
                   help="echo the normalized config instead of analyzing")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("nyquist", help="export the shifted inverse-loop curve and disk")
    add_common(p)
    p.add_argument("--out", required=True, help="curve CSV path")
    p.add_argument("--svg", help="optional SVG plot path")
    p.set_defaults(func=_cmd_nyquist)

    p = sub.add_parser("rootlocus", help="export the positive-feedback root locus")
    add_common(p)
    p.add_argument("--out", required=True, help="locus CSV path")
    p.add_argument("--kmax", type=float, help="largest gain (default 2/G(0), or 10K when G(0)=0)")
    p.add_argument("--steps", type=int, default=60, help="number of gain samples")
    p.set_defaults(func=_cmd_rootlocus)

    p = sub.add_parser("simulate", help="integrate the closed loop and measure the cycle")
    add_common(p)
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="re-run analyze over a swept config parameter")
    add_common(p)
    p.add_argument("--param", required=True, help="dotted path of a numeric config leaf")
    p.add_argument("--range", required=True, help="start:stop:step or comma-separated values")
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Divergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except XcposcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
