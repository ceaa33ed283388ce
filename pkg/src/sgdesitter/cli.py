"""Batch front end: ``sgds <group> <action> [flags]``.

Commands
--------
geom transform, prop eval, vertex corr, fock verify, bounds smatrix,
bounds field, estimate norm2, check all.

Configuration
-------------
An INI-style key-value file passed with ``--config``.  Every key can be
overridden on the command line, either through the dedicated flags
(``--beta2``, ``--alpha``, ``--hubble``, ``--seed``, ``--budget``,
``--out``, ``--format``) or generically with ``--set section.key=value``.
Flags win over file values.  Recognized sections and keys::

    [run]       beta2, alpha, hubble, seed, budget, out, format
    [geom]      a, b, c, tau, theta, inverse
    [prop]      tau1, theta1, tau2, theta2, ordering, epsilon
    [vertex]    gammas (comma list), points ("tau,theta; tau,theta"),
                ordering, epsilon, fock (bool), n_max
    [fock]      n_max, occ_max, total_max, tau, theta, width
    [estimate]  k, scheme
    [bounds]    k_max, target
    [g], [f], [h]  test functions: kind = indicator | tau_bump |
                tau_theta_bump | zero_mean_pair | zero, plus lo, hi,
                center, width, theta_center, theta_width, amp
    [tol]       name = value (also ``--tol name=value``)

``alpha = inf`` selects the alpha -> infinity limit for vertex correlators.

Output
------
JSON lines (appended, one record per line) or CSV, with floats written
to 17 significant digits.  The exit status is 1 when any record fails or
errors, 2 for an invalid configuration and 0 otherwise.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds, checks, estimator, fock, geometry, propagators, vertex
from .bounds import Coupling
from .modes import StateAlpha
from .propagators import Ordering
from .testfunctions import TestFunction

COMMANDS = {
    "geom": ["transform"],
    "prop": ["eval"],
    "vertex": ["corr"],
    "fock": ["verify"],
    "bounds": ["smatrix", "field"],
    "estimate": ["norm2"],
    "check": ["all"],
}

DEFAULTS = {
    "run": {"beta2": str(2 * np.pi), "alpha": "1.0", "hubble": "1.0", "seed": "0",
            "budget": "1000000", "out": "", "format": "json"},
    "geom": {"a": "0.3", "b": "0.2", "c": "-0.1", "tau": "1.2", "theta": "0.5", "inverse": "false"},
    "prop": {"tau1": "1.0", "theta1": "0.2", "tau2": "1.5", "theta2": "1.4", "ordering": "Wightman",
             "epsilon": ""},
    "vertex": {"gammas": "", "points": "1.2,0.4; 1.25,1.6", "ordering": "Wightman", "epsilon": "",
               "fock": "false", "n_max": "640"},
    "fock": {"n_max": "12", "occ_max": "4", "total_max": "6", "tau": "1.1", "theta": "0.7", "width": "0.15"},
    "estimate": {"k": "1", "scheme": "mc_substituted"},
    "bounds": {"k_max": "10", "target": "1e-6"},
    "g": {"kind": "indicator", "lo": str(np.pi / 4), "hi": str(3 * np.pi / 4)},
    "f": {"kind": "tau_theta_bump", "center": "1.5", "width": "0.5", "theta_center": "2.0",
          "theta_width": "1.2"},
    "h": {"kind": "zero_mean_pair"},
    "tol": {},
}


class ConfigError(ValueError):
    """Invalid configuration, carrying the offending field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)  # section -> {key: str}

    def get(self, section, key):
        try:
            return self.values[section][key]
        except KeyError:
            raise ConfigError(f"{section}.{key}", "missing") from None

    def number(self, section, key, kind=float):
        raw = self.get(section, key)
        try:
            return kind(float(raw)) if kind is int else kind(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"not a number: {raw!r}") from None

    def flag(self, section, key):
        raw = self.get(section, key).strip().lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(f"{section}.{key}", f"not a boolean: {raw!r}")

    @property
    def tol(self):
        out = {}
        for k, v in self.values.get("tol", {}).items():
            try:
                out[k] = float(v)
            except ValueError:
                raise ConfigError(f"tol.{k}", f"not a number: {v!r}") from None
        return out

    def tolerance(self, name, default):
        return self.tol.get(name, default)

    def coupling(self):
        b2 = self.number("run", "beta2")
        if not 0.0 < b2 < 4.0 * np.pi:
            raise ConfigError("run.beta2", "must lie in (0, 4 pi)")
        return Coupling(b2)

    def hubble(self):
        H = self.number("run", "hubble")
        if not H > 0:
            raise ConfigError("run.hubble", "must be positive")
        return H

    def alpha(self):
        raw = self.get("run", "alpha").strip().lower()
        if raw in ("inf", "infinity"):
            return None
        a = self.number("run", "alpha")
        if not a > 0:
            raise ConfigError("run.alpha", "must be positive or inf")
        return a

    def test_function(self, name):
        spec = dict(self.values.get(name, {}))
        kind = spec.get("kind", "indicator")
        try:
            if kind == "zero_mean_pair":
                tf = checks._zero_mean_h(self.hubble())
            else:
                params = {k: (v if k in ("kind", "coeffs") else float(v)) for k, v in spec.items()}
                tf = TestFunction.from_spec(params)
        except ValueError as exc:
            raise ConfigError(f"{name}.kind", str(exc)) from None
        lo, hi = tf.support
        if not tf.is_zero and not (0.0 < lo and hi < np.pi):
            raise ConfigError(f"{name}", "support must lie inside (0, pi)")
        return tf

    def validate(self):
        """Check the fields every command relies on before dispatch."""
        self.coupling()
        self.hubble()
        self.alpha()
        self.number("run", "seed", int)
        if self.number("run", "budget", int) <= 0:
            raise ConfigError("run.budget", "must be positive")
        if self.get("run", "format") not in ("json", "csv"):
            raise ConfigError("run.format", "must be json or csv")
        self.tol


# --- serialization -----------------------------------------------------------------

def _num(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    return json.dumps(str(obj))


CSV_FIELDS = ["quantity", "params", "value_re", "value_im", "error_est", "pass", "paper_ref"]


def to_csv(records, header=True):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_FIELDS)
    for r in records:
        row = []
        for key in CSV_FIELDS:
            v = r.get(key)
            if key == "params":
                row.append(dumps(v))
            elif v is None:
                row.append("")
            elif isinstance(v, (bool, np.bool_)):
                row.append("true" if v else "false")
            elif isinstance(v, (float, int, np.floating, np.integer)):
                row.append(_num(v))
            else:
                row.append(str(v))
        w.writerow(row)
    return buf.getvalue()


def to_jsonl(records):
    return "".join(dumps(r) + "\n" for r in records)


def write_report(records, cfg):
    fmt = cfg.get("run", "format")
    out = cfg.get("run", "out")
    if out:
        exists = os.path.exists(out) and os.path.getsize(out) > 0
        text = to_jsonl(records) if fmt == "json" else to_csv(records, header=not exists)
        with open(out, "a", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(to_jsonl(records) if fmt == "json" else to_csv(records))


# --- commands --------------------------------------------------------------------------

rec = checks.record


def _error_record(quantity, exc, ref):
    return rec(quantity, np.nan, False, ref=ref, message=f"{type(exc).__name__}: {exc}")


def _points(raw, path):
    pts = []
    for chunk in raw.split(";"):
        if not chunk.strip():
            continue
        try:
            t, h = (float(v) for v in chunk.split(","))
        except ValueError:
            raise ConfigError(path, f"bad point {chunk.strip()!r}") from None
        if not 0.0 < t < np.pi:
            raise ConfigError(path, f"tau = {t} outside (0, pi)")
        pts.append((t, h))
    return pts


def cmd_geom_transform(cfg):
    g = geometry.GroupParams(*(cfg.number("geom", k) for k in "abc"))
    tau, theta = cfg.number("geom", "tau"), cfg.number("geom", "theta")
    if not 0.0 < tau < np.pi:
        raise ConfigError("geom.tau", "must lie in (0, pi)")
    inv = cfg.flag("geom", "inverse")
    params = {"a": g.a, "b": g.b, "c": g.c, "tau": tau, "theta": theta, "inverse": inv, "s2": g.s2}
    t2, h2 = (float(v) for v in geometry.transform(g, tau, theta, inverse=inv))
    t3, h3 = (float(v) for v in geometry.transform(g, t2, h2, inverse=not inv))
    err = max(abs(t3 - tau), abs(float(geometry.wrap_difference(h3 - theta))))
    tol = cfg.tolerance("roundtrip", 1e-9)
    return [rec("tau_transformed", t2, ref="finite flows", **params),
            rec("theta_transformed", h2, ref="finite flows", **params),
            rec("roundtrip_error", err, err <= tol, ref="finite flows", tol=tol, **params)]


def cmd_prop_eval(cfg):
    alpha = cfg.alpha()
    if alpha is None:
        raise ConfigError("run.alpha", "two-point functions need a finite alpha")
    st = StateAlpha(alpha)
    p = (cfg.number("prop", "tau1"), cfg.number("prop", "theta1"))
    q = (cfg.number("prop", "tau2"), cfg.number("prop", "theta2"))
    for name, pt in (("prop.tau1", p), ("prop.tau2", q)):
        if not 0.0 < pt[0] < np.pi:
            raise ConfigError(name, "must lie in (0, pi)")
    try:
        ordering = Ordering(cfg.get("prop", "ordering"))
    except ValueError:
        raise ConfigError("prop.ordering", "Wightman, TimeOrdered or AntiTimeOrdered") from None
    eps_raw = cfg.get("prop", "epsilon").strip()
    eps = float(eps_raw) if eps_raw else None
    params = {"p": list(p), "q": list(q), "alpha": alpha, "ordering": ordering.value, "epsilon": eps}
    out = []
    try:
        val = complex(propagators.ordered_kernel(p, q, st, ordering, epsilon=eps))
        out.append(rec("two_point_function", val, ref="two-point function", **params))
        out.append(rec("commutator_kernel", float(propagators.commutator_kernel(p, q)),
                       ref="two-point function", p=list(p), q=list(q)))
        out.append(rec("causal_class", 0.0, ref="causal structure", p=list(p), q=list(q),
                       relation=geometry.causal_class(geometry.Point(*p), geometry.Point(*q)).value))
    except Exception as exc:  # noqa: BLE001 - reported as a failing record
        out.append(_error_record("two_point_function", exc, "two-point function"))
    return out


def cmd_vertex_corr(cfg):
    pts = _points(cfg.get("vertex", "points"), "vertex.points")
    raw = cfg.get("vertex", "gammas").strip()
    c = cfg.coupling()
    if raw:
        try:
            gammas = [float(v) for v in raw.split(",")]
        except ValueError:
            raise ConfigError("vertex.gammas", "comma separated numbers expected") from None
    else:
        gammas = [c.beta * (1 if i % 2 == 0 else -1) for i in range(len(pts))]
    if len(gammas) != len(pts):
        raise ConfigError("vertex.gammas", "need one charge per point")
    try:
        ordering = Ordering(cfg.get("vertex", "ordering"))
    except ValueError:
        raise ConfigError("vertex.ordering", "Wightman, TimeOrdered or AntiTimeOrdered") from None
    eps_raw = cfg.get("vertex", "epsilon").strip()
    eps = float(eps_raw) if eps_raw else None
    alpha = cfg.alpha()
    cfg_v = vertex.VertexConfiguration.build(gammas, pts, ordering, alpha)
    params = {"gammas": gammas, "points": [list(p) for p in pts], "ordering": ordering.value,
              "alpha": "inf" if alpha is None else alpha, "epsilon": eps}
    out = []
    try:
        val = complex(vertex.vertex_correlator(cfg_v, epsilon=eps))
        out.append(rec("vertex_correlator", val, ref="vertex correlators", **params))
    except Exception as exc:  # noqa: BLE001
        out.append(_error_record("vertex_correlator", exc, "vertex correlators"))
        return out
    if cfg.flag("vertex", "fock"):
        e = eps if eps is not None else 0.05
        n_max = cfg.number("vertex", "n_max", int)
        tr = fock.Truncation(n_max=n_max, occ_max=12, total_max=None, zero_occ_max=60)
        try:
            fv, tail = fock.truncated_vertex_expectation(cfg_v, tr, epsilon=e)
            ref = complex(vertex.vertex_correlator(cfg_v, epsilon=e))
            tol = cfg.tolerance("fock_oracle", 1e-4)
            out.append(rec("vertex_fock_oracle", fv, abs(fv - ref) <= tol, abs(fv - ref), "vertex correlators",
                           tail=tail, n_max=n_max, tol=tol, **dict(params, epsilon=e)))
        except Exception as exc:  # noqa: BLE001
            out.append(_error_record("vertex_fock_oracle", exc, "vertex correlators"))
    return out


def cmd_fock_verify(cfg):
    alpha = cfg.alpha()
    if alpha is None:
        raise ConfigError("run.alpha", "Fock checks need a finite alpha")
    st = StateAlpha(alpha)
    tm = cfg.get("fock", "total_max").strip().lower()
    tr = fock.Truncation(n_max=cfg.number("fock", "n_max", int), occ_max=cfg.number("fock", "occ_max", int),
                         total_max=None if tm in ("", "none") else int(float(tm)))
    p = (cfg.number("fock", "tau"), cfg.number("fock", "theta"))
    width = cfg.number("fock", "width")
    params = {"n_max": tr.n_max, "occ_max": tr.occ_max, "total_max": tr.total_max, "alpha": alpha}
    tol = cfg.tolerance("fock", 1e-10)
    out = []
    try:
        space = fock.FockSpace(tr)
        vac = space.vacuum()
        qr = float(np.linalg.norm(fock.noether_charge("rot", st, tr, space) @ vac))
        nb = float(np.linalg.norm(fock.noether_charge("boost1", st, tr, space) @ vac))
        target = 1.0 / (alpha * math.sqrt(8.0 * np.pi))
        rot = fock.charge_field_commutator_check("rot", st, tr, p, width=0.0, space=space)
        alg = fock.algebra_residual(st, tr, space)
        boost = fock.charge_field_commutator_check("boost1", st, tr, p, width=width, space=space)
        out += [rec("Qrot_vacuum_norm", qr, qr == 0.0, ref="Noether charges", dim=space.dim, **params),
                rec("Qboost1_vacuum_norm", nb, abs(nb - target) <= tol, abs(nb - target), "Noether charges",
                    target=target, **params),
                rec("rot_field_commutator", rot, rot <= tol, ref="Noether charges", point=list(p), **params),
                rec("charge_algebra_residual", alg, alg <= tol, ref="Noether charges", **params),
                rec("boost_field_commutator", boost, None, ref="Noether charges", point=list(p), width=width,
                    **params)]
    except Exception as exc:  # noqa: BLE001
        out.append(_error_record("fock_verify", exc, "Noether charges"))
    return out


def cmd_bounds_smatrix(cfg):
    c = cfg.coupling()
    H = cfg.hubble()
    g = cfg.test_function("g")
    k_max = cfg.number("bounds", "k_max", int)
    target = cfg.number("bounds", "target")
    base = {"beta2": c.beta2, "H": H, "g": g.describe()}
    Cg = bounds.smatrix_constant_C(g, c, H)
    out = [rec("C_g", Cg, math.isfinite(Cg), ref="S-matrix bound", **base)]
    for k in range(k_max + 1):
        out.append(rec("smatrix_order_bound", bounds.smatrix_order_bound(k, c, Cg), None,
                       ref="S-matrix bound", k=k, **base))
    tail, k_star, log_tail = bounds.tail_bound(0, c, Cg, target=target, return_log=True)
    out.append(rec("smatrix_tail_k_star", k_star, None, ref="S-matrix bound", target=target,
                   log_tail_at_0=log_tail, **base))
    return out


def cmd_bounds_field(cfg):
    c = cfg.coupling()
    H = cfg.hubble()
    g, f, h = (cfg.test_function(n) for n in "gfh")
    k_max = cfg.number("bounds", "k_max", int)
    target = cfg.number("bounds", "target")
    base = {"beta2": c.beta2, "H": H}
    Cg = bounds.smatrix_constant_C(g, c, H)
    C0, C1, C2 = bounds.ctilde_constants(f, h, c, H)
    cmax = max(C0, C1, C2)
    out = [rec("C_g", Cg, math.isfinite(Cg), ref="S-matrix bound", g=g.describe(), **base)]
    out += [rec(f"ctilde_C{i}", v, math.isfinite(v), ref="interacting field constants", **base)
            for i, v in enumerate((C0, C1, C2))]
    for k in range(k_max + 1):
        out.append(rec("field_order_bound", bounds.field_order_bound(k, c, Cg, cmax), None,
                       ref="interacting field bound", k=k, **base))
    tail, k_star, log_tail = bounds.field_tail_bound(0, c, Cg, cmax, target=target, return_log=True)
    out.append(rec("field_tail_k_star", k_star, None, ref="interacting field bound", target=target,
                   log_tail_at_0=log_tail, **base))
    return out


def cmd_estimate_norm2(cfg):
    c = cfg.coupling()
    H = cfg.hubble()
    g = cfg.test_function("g")
    k = cfg.number("estimate", "k", int)
    if k not in (1, 2):
        raise ConfigError("estimate.k", "must be 1 or 2")
    scheme = cfg.get("estimate", "scheme")
    if scheme not in estimator.SCHEMES:
        raise ConfigError("estimate.scheme", f"one of {', '.join(estimator.SCHEMES)}")
    seed, budget = cfg.number("run", "seed", int), cfg.number("run", "budget", int)
    est = estimator.smatrix_norm2_estimate(k, c, g, budget=budget, seed=seed, scheme=scheme, H=H)
    Cg = bounds.smatrix_constant_C(g, c, H)
    bound = math.factorial(k) ** (1 + c.beta2 / (4 * np.pi)) * Cg ** (2 * k)
    r = est.as_record("smatrix_norm2_estimate", {"k": k, "beta2": c.beta2, "H": H, "budget": budget})
    r["params"].update(upper99=est.upper99, bound=bound, note=est.note)
    r["pass"] = bool(est.upper99 <= bound and not est.flagged)
    return [r]


def cmd_check_all(cfg):
    budget = cfg.number("run", "budget", int)
    seed_raw = cfg.values.get("run", {}).get("seed_override")
    overrides = {}
    for key, val in cfg.tol.items():
        if "." not in key:
            raise ConfigError(f"tol.{key}", "check tolerances are named <check>.<argument>")
        name, arg = key.split(".", 1)
        fn = getattr(checks, f"check_{name}", None)
        if fn is None:
            raise ConfigError(f"tol.{key}", f"no check named {name!r}")
        overrides.setdefault(fn, {})[arg] = val

    def progress(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = checks.run_all(budget=budget, seed=None if seed_raw is None else int(seed_raw),
                             progress=progress, overrides=overrides)
    out = []
    for res in results:
        out.extend(res.records)
        out.append(rec("check_result", res.elapsed, res.passed, ref="acceptance suite", check=res.name,
                       summary=res.summary))
    return out


DISPATCH = {
    ("geom", "transform"): cmd_geom_transform,
    ("prop", "eval"): cmd_prop_eval,
    ("vertex", "corr"): cmd_vertex_corr,
    ("fock", "verify"): cmd_fock_verify,
    ("bounds", "smatrix"): cmd_bounds_smatrix,
    ("bounds", "field"): cmd_bounds_field,
    ("estimate", "norm2"): cmd_estimate_norm2,
    ("check", "all"): cmd_check_all,
}


# --- argument handling -----------------------------------------------------------------

def _common_flags(p):
    p.add_argument("--config", help="key-value configuration file")
    p.add_argument("--beta2", type=float)
    p.add_argument("--alpha", help="state parameter; 'inf' for the limit")
    p.add_argument("--hubble", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=float, help="estimator sample budget")
    p.add_argument("--out", help="append the report to this file")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any configuration key")


def build_parser():
    parser = argparse.ArgumentParser(prog="sgds", description="Sine-Gordon on 2D de Sitter: numerics and checks")
    groups = parser.add_subparsers(dest="group", required=True)
    for group, actions in COMMANDS.items():
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="action", required=True)
        for action in actions:
            _common_flags(sub.add_parser(action))
    return parser


def _pair(item, path):
    if "=" not in item:
        raise ConfigError(path, f"expected NAME=VALUE, got {item!r}")
    k, v = item.split("=", 1)
    return k.strip(), v.strip()


def load_config(args):
    values = {s: dict(kv) for s, kv in DEFAULTS.items()}
    if args.config:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(args.config, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError("config", str(exc)) from None
        for section in parser.sections():
            if section not in values:
                raise ConfigError(section, "unknown section")
            if section in ("g", "f", "h"):
                values[section] = {}  # a file test function replaces the default one
            values[section].update(parser[section])
    for item in args.set:
        key, val = _pair(item, "--set")
        if "." not in key:
            raise ConfigError(key, "use section.key")
        section, name = key.split(".", 1)
        if section not in values:
            raise ConfigError(section, "unknown section")
        values[section][name] = val
    flag_map = {"beta2": args.beta2, "alpha": args.alpha, "hubble": args.hubble, "seed": args.seed,
                "budget": args.budget, "out": args.out, "format": args.format}
    for key, val in flag_map.items():
        if val is not None:
            values["run"][key] = str(val)
    if args.seed is not None:
        values["run"]["seed_override"] = str(args.seed)
    for item in args.tol:
        k, v = _pair(item, "--tol")
        values["tol"][k] = v
    return RunConfig(f"{args.group} {args.action}", values)


def run(cfg):
    """Execute a validated configuration and return its records."""
    cfg.validate()
    group, action = cfg.command.split()
    return DISPATCH[(group, action)](cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        records = run(cfg)
    except ConfigError as exc:
        print(dumps({"error": "invalid configuration", "field": exc.path, "message": exc.message}),
              file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - a computation error is a failing record
        records = [_error_record(cfg.command.replace(" ", "_"), exc, "error")]
    write_report(records, cfg)
    failed = any(r.get("pass") is False for r in records)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
