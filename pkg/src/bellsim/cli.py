"""Command-line front end.

Every subcommand accepts the same flags; a flat JSON ``--config`` file may
set any of them (flags win).  ``BSA_SEED`` supplies the seed when
``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys

from . import experiments as ex
from .detection import SETTING_LABELS
from .source import BELL_KINDS, BellKind

EXPERIMENTS = ("bsa", "encoding", "theta-scan", "overlap-scan", "superposition", "calibrate")
INPUT_CHOICES = ("phi+", "phi-", "psi+", "psi-", "superposition")

CONFIG_KEYS = {
    "experiment": str,
    "input": str,
    "exact": bool,
    "shots": (int, float),
    "seed": int,
    "format": str,
    "out": str,
    "v": (int, float),
    "epsilon": (int, float),
    "dephasing": (int, float),
    "ancilla_dephasing": (int, float),
    "chi": (int, float),
    "order": int,
    "rotator_deg": (int, float),
    "duration_s": (int, float),
    "alpha": (int, float, list),
    "beta": (int, float, list),
    "angles_deg": list,
    "v_values": list,
    "target_hv": (int, float),
    "target_diag": (int, float),
}

DEFAULT_ANGLES = sorted(set(range(0, 91, 5)) | {22.5, 67.5})
DEFAULT_V = [round(i / 20, 2) for i in range(21)]


class ConfigError(ValueError):
    pass


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from err


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", choices=INPUT_CHOICES, help="input state (default: all four Bell states)")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=None, help="exact probabilities (default)")
    mode.add_argument("--shots", type=float, help="expected fourfold counts per input; enables sampling")
    common.add_argument("--seed", type=int, help="RNG seed (env BSA_SEED if absent)")
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--v", type=float, help="backward-pair wave-packet overlap in [0, 1]")
    common.add_argument("--epsilon", type=float, help="PBS extinction for both PBSs")
    common.add_argument("--dephasing", type=float, help="input-pair dephasing in [0, 1]")
    common.add_argument("--chi", type=float, help="pair amplitude")
    common.add_argument("--order", type=int, choices=(1, 2), help="emission expansion order")
    common.add_argument("--alpha", type=_complex, help="encoding amplitude of |H> (encoding)")
    common.add_argument("--beta", type=_complex, help="encoding amplitude of |V> (encoding)")

    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Linear-optical Bell-state analyzer simulator.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="{" + ",".join(EXPERIMENTS) + "}")
    helps = {
        "bsa": "setting probabilities / counts for each Bell input",
        "encoding": "heralded encoding of a mode-1 qubit onto (a, 4)",
        "theta-scan": "same-pair double-emission fourfold rate vs rotator angle",
        "overlap-scan": "fringe visibility vs wave-packet overlap",
        "superposition": "analyzer response to a phi+/phi- superposition",
        "calibrate": "fit imperfections to input correlation fidelities",
    }
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON in {path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key, value in data.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config: unknown key {key!r}")
        if isinstance(value, bool) and CONFIG_KEYS[key] is not bool:
            raise ConfigError(f"config: key {key!r} has wrong type")
        if not isinstance(value, CONFIG_KEYS[key]):
            raise ConfigError(f"config: key {key!r} has wrong type")
    return data


def _merge(args: argparse.Namespace) -> dict:
    opts = load_config(args.config) if args.config else {}
    if "experiment" in opts and opts["experiment"] != args.experiment:
        raise ConfigError(f"config: key 'experiment' is {opts['experiment']!r}, command is {args.experiment!r}")
    for key in ("input", "seed", "format", "out", "v", "epsilon", "dephasing", "chi", "order"):
        val = getattr(args, key)
        if val is not None:
            opts[key] = val
    if args.shots is not None:
        opts["shots"] = args.shots
        opts["exact"] = False
    elif args.exact:
        opts["exact"] = True
        opts.pop("shots", None)
    if args.alpha is not None:
        opts["alpha"] = args.alpha
    if args.beta is not None:
        opts["beta"] = args.beta
    if args.seed is None and "BSA_SEED" in os.environ:
        try:
            opts["seed"] = int(os.environ["BSA_SEED"])
        except ValueError as err:
            raise ConfigError("env: BSA_SEED must be an integer") from err
    opts.setdefault("format", "json")
    if opts["format"] not in ("json", "csv"):
        raise ConfigError(f"config: key 'format' must be json or csv, got {opts['format']!r}")
    if "input" in opts and opts["input"] not in INPUT_CHOICES:
        raise ConfigError(f"config: key 'input' must be one of {INPUT_CHOICES}")
    return opts


def _as_complex(value, key) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"config: key {key!r} must be [re, im]")
        return complex(value[0], value[1])
    return complex(value)


def circuit_from_options(opts: dict) -> ex.CircuitConfig:
    cfg = ex.CircuitConfig()
    try:
        spdc = dataclasses.replace(
            cfg.spdc,
            pair_amplitude=float(opts.get("chi", cfg.spdc.pair_amplitude)),
            order=int(opts.get("order", cfg.spdc.order)),
        )
        cfg = dataclasses.replace(cfg, spdc=spdc)
        if "rotator_deg" in opts:
            th = math.radians(opts["rotator_deg"])
            cfg = dataclasses.replace(cfg, rotator_angles=(("2", th), ("4", th)))
        cfg = cfg.with_imperfections(
            v=opts.get("v"),
            epsilon=opts.get("epsilon"),
            dephasing=opts.get("dephasing"),
            ancilla_dephasing=opts.get("ancilla_dephasing"),
        )
    except ValueError as err:
        raise ConfigError(f"config: {_guess_key(err)}: {err}") from err
    return cfg


def _guess_key(err: Exception) -> str:
    text = str(err)
    hints = {
        "backward_overlap": "v",
        "extinction": "epsilon",
        "dephasing": "dephasing",
        "order": "order",
        "pair amplitude": "chi",
    }
    for frag, key in hints.items():
        if frag in text:
            return f"key {key!r}"
    return "invalid value"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_bsa(opts, cfg) -> str:
    inp = opts.get("input")
    if inp == "superposition":
        return cmd_superposition(opts, cfg)
    inputs = [BellKind(inp)] if inp else list(BELL_KINDS)
    exact = opts.get("exact", True) or "shots" not in opts
    seed = opts.get("seed")
    if not exact and seed is None:
        seed = 0
    result = ex.run_bsa(
        cfg,
        exact=exact,
        shots=opts.get("shots"),
        seed=seed,
        inputs=inputs,
        duration_s=float(opts.get("duration_s", 1800.0)),
    )
    if opts["format"] == "csv":
        if result.counts is not None:
            return result.counts.to_csv()
        rows = [
            (inp, st, float(p))
            for inp, row in zip(result.inputs, result.probabilities)
            for st, p in zip(result.settings, row)
        ]
        return _csv(["input", "setting", "probability"], rows)
    return _json(result.to_json())


def cmd_encoding(opts, cfg) -> str:
    alpha = _as_complex(opts.get("alpha", 1 / math.sqrt(2)), "alpha")
    beta = _as_complex(opts.get("beta", 1 / math.sqrt(2)), "beta")
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm == 0:
        raise ConfigError("config: key 'alpha'/'beta' cannot both be zero")
    alpha, beta = alpha / norm, beta / norm
    state, fid = ex.run_encoding(alpha, beta, cfg)
    if opts["format"] == "csv":
        return _csv(
            ["alpha_re", "alpha_im", "beta_re", "beta_im", "fidelity"],
            [(alpha.real, alpha.imag, beta.real, beta.imag, fid)],
        )
    return _json(
        {"alpha": [alpha.real, alpha.imag], "beta": [beta.real, beta.imag], "fidelity": fid, "state": state.to_json()}
    )


def cmd_theta_scan(opts, cfg) -> str:
    if cfg.spdc.order != 2:
        raise ConfigError("config: key 'order' must be 2 for theta-scan (same-pair emission is second order)")
    angles = [float(a) for a in opts.get("angles_deg", DEFAULT_ANGLES)]
    points = ex.theta_scan(angles, cfg)
    if opts["format"] == "csv":
        return _csv(
            ["theta_deg", "spurious_prob", "cos2_fit_residual"],
            [(p.theta_deg, p.spurious_prob, p.cos2_fit_residual) for p in points],
        )
    return _json({"points": [dataclasses.asdict(p) for p in points]})


def cmd_overlap_scan(opts, cfg) -> str:
    vs = [float(v) for v in opts.get("v_values", DEFAULT_V)]
    rows = ex.overlap_scan(vs, cfg)
    for r in rows:
        r["closed_form"] = float(ex.overlap_visibility_closed_form(r["v"]))
    if opts["format"] == "csv":
        header = list(rows[0]) if rows else ["v"]
        return _csv(header, [[r[h] for h in header] for r in rows])
    return _json({"rows": rows})


def cmd_superposition(opts, cfg) -> str:
    alpha = _as_complex(opts.get("alpha", 1 / math.sqrt(2)), "alpha")
    beta = _as_complex(opts.get("beta", 1j / math.sqrt(2)), "beta")
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    row = ex.superposition_test(cfg, (alpha / norm, beta / norm))
    if opts["format"] == "csv":
        return _csv(["setting", "probability"], [(s, float(p)) for s, p in zip(SETTING_LABELS, row)])
    return _json({"settings": list(SETTING_LABELS), "probabilities": [float(p) for p in row]})


def cmd_calibrate(opts, cfg) -> str:
    try:
        cal = ex.calibrate_imperfections(
            float(opts.get("target_hv", 0.96)), float(opts.get("target_diag", 0.94)), base=cfg
        )
    except ex.CalibrationError as err:
        raise ConfigError(f"config: {err}") from err
    result = ex.run_bsa(cal.config, shots=opts.get("shots", 450.0))
    fields = {
        "v": cal.v,
        "epsilon": cal.epsilon,
        "dephasing": cal.dephasing,
        "hv_fidelity": cal.hv_fidelity,
        "diag_fidelity": cal.diag_fidelity,
        "average_fidelity": result.average_fidelity,
        "average_sigma": result.average_sigma,
    }
    if opts["format"] == "csv":
        return _csv(["parameter", "value"], list(fields.items()))
    return _json({**fields, "bsa": result.to_json()})


COMMANDS = {
    "bsa": cmd_bsa,
    "encoding": cmd_encoding,
    "theta-scan": cmd_theta_scan,
    "overlap-scan": cmd_overlap_scan,
    "superposition": cmd_superposition,
    "calibrate": cmd_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _merge(args)
        cfg = circuit_from_options(opts)
        text = COMMANDS[args.experiment](opts, cfg)
    except ConfigError as err:
        print(f"bellsim: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001
        print(f"bellsim: error: {err}", file=sys.stderr)
        return 1
    out = opts.get("out")
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        except OSError as err:
            print(f"bellsim: error: cannot write {out}: {err}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
