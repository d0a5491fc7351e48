"""Command-line front end: ``neqcasimir --config scenario.json [--out path] [--threads N]``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (partial
results are still written, with ``status = "numerical_failure"``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .dynamics import BodySpec, ForceField, Scenario, find_levitation_points, force_profile, integrate_trajectory
from .forces import total_force
from .materials import (
    ALUMINIUM,
    GOLD,
    MIRROR_EPSILON,
    OSCILLATOR_PLATE,
    OSCILLATOR_SPHERE,
    SIC,
    ConstantPermittivity,
    Drude,
    LinearizedInsulator,
    MaterialError,
    SiCModel,
    TwoOscillator,
    ingest_tabulated,
)
from .radiation import blackbody_flux, plate_emission, sphere_emission, sphere_emission_approx
from .transfer import (
    ConfigError,
    SpherePlate,
    SphereSphere,
    TwoBodyConfig,
    sphere_plate_transfer_1refl,
    sphere_plate_transfer_asymptotic,
    sphere_sphere_transfer_1refl,
    sphere_sphere_transfer_dipole,
    sphere_sphere_transfer_exact,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

PRESETS = {
    "gold": GOLD,
    "aluminium": ALUMINIUM,
    "sic": SIC,
    "oscillator_plate": OSCILLATOR_PLATE,
    "oscillator_sphere": OSCILLATOR_SPHERE,
    "mirror": ConstantPermittivity(MIRROR_EPSILON),
    "vacuum": ConstantPermittivity(1.0),
}

DEFAULT_METHOD = {
    "radiate": "full",
    "transfer": "one_reflection",
    "force": "dipole",
    "levitate": "dipole",
    "trajectory": "dipole",
}


class NumericalFailure(Exception):
    def __init__(self, msg, rows):
        super().__init__(msg)
        self.rows = rows


def load_schema(name: str = "config") -> dict:
    text = resources.files("neqcasimir").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def validate_config(cfg: dict) -> None:
    """Schema check plus the cross-field invariants the schema cannot express."""
    jsonschema.validate(cfg, load_schema("config"))
    geo = cfg["geometry"]["type"]
    need = {"sphere": 1, "plate": 1, "sphere_sphere": 2, "sphere_plate": 2}[geo]
    if len(cfg["bodies"]) != need:
        raise ConfigError(f"geometry '{geo}' needs {need} bodies")
    cmd = cfg["command"]
    allowed = {
        "radiate": {"sphere", "plate"},
        "transfer": {"sphere_sphere", "sphere_plate"},
        "force": {"sphere_sphere", "sphere_plate"},
        "levitate": {"sphere_plate"},
        "trajectory": {"sphere_plate"},
    }[cmd]
    if geo not in allowed:
        raise ConfigError(f"command '{cmd}' does not support geometry '{geo}'")
    sweep = cfg.get("sweep")
    if sweep and sweep.get("scale") == "log" and min(sweep["start"], sweep["stop"]) <= 0:
        raise ConfigError("log sweep needs positive bounds")
    for i, b in enumerate(cfg["bodies"]):
        if b.get("R_inner", 0.0) >= b.get("R", math.inf):
            raise ConfigError(f"bodies[{i}]: R_inner must be below R")
    if cmd in ("levitate", "trajectory") and "density" not in cfg["bodies"][0]:
        raise ConfigError("bodies[0].density is required for dynamics")


def build_material(spec: dict | None, base: Path | None = None):
    if spec is None:
        return None
    (kind, val), = spec.items()
    if kind == "preset":
        return PRESETS[val]
    if kind == "drude":
        return Drude(val["omega_p"], val["omega_tau"])
    if kind == "sic":
        return SiCModel(val["eps_inf"], val["omega_lo"], val["omega_to"], val["gamma"])
    if kind == "two_oscillator":
        return TwoOscillator(val["C"], val["omega_res"], val["gamma"], val["D"], val["Omega_res"], val["Gamma"])
    if kind == "constant":
        return ConstantPermittivity(complex(val["re"], val.get("im", 0.0)))
    if kind == "linearized":
        return LinearizedInsulator(val["eps0"], val["lambda_in"])
    if kind == "tabulated":
        path = Path(val["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        with open(path) as fh:
            return ingest_tabulated(fh)
    raise ConfigError(f"unknown material kind '{kind}'")


def _sweep_values(cfg: dict) -> tuple[str | None, list[float]]:
    sw = cfg.get("sweep")
    if not sw:
        return None, [math.nan]
    n = sw["points"]
    if sw.get("scale", "lin") == "log":
        vals = np.geomspace(sw["start"], sw["stop"], n)
    else:
        vals = np.linspace(sw["start"], sw["stop"], n)
    return sw["variable"], [float(v) for v in vals]


def _apply(cfg: dict, var: str | None, val: float) -> dict:
    """Copy of cfg with the sweep variable substituted."""
    out = json.loads(json.dumps(cfg))
    if var is None:
        return out
    if var == "R":
        out["bodies"][0]["R"] = val
    elif var == "d":
        out["geometry"]["d"] = val
    else:
        out.setdefault("temperatures", {})[var] = val
    return out


def _temps(cfg: dict) -> tuple[float, float, float]:
    t = cfg.get("temperatures", {})
    return t.get("T1", 300.0), t.get("T2", 300.0), t.get("T_env", 0.0)


def _require(cfg: dict, *path):
    node = cfg
    for key in path:
        if isinstance(node, list):
            node = node[key]
        elif key not in node:
            raise ConfigError(f"missing required field {'.'.join(map(str, path))}")
        else:
            node = node[key]
    return node


def _two_body(cfg: dict, base) -> TwoBodyConfig:
    b = cfg["bodies"]
    d = _require(cfg, "geometry", "d")
    T1, T2, Te = _temps(cfg)
    if cfg["geometry"]["type"] == "sphere_sphere":
        geo = SphereSphere(
            _require(cfg, "bodies", 0, "R"),
            _require(cfg, "bodies", 1, "R"),
            d,
            build_material(b[0]["material"], base),
            build_material(b[1]["material"], base),
            build_material(b[0].get("mu"), base),
            build_material(b[1].get("mu"), base),
        )
    else:
        geo = SpherePlate(
            _require(cfg, "bodies", 0, "R"),
            d,
            build_material(b[0]["material"], base),
            build_material(b[1]["material"], base),
            build_material(b[0].get("mu"), base),
            build_material(b[1].get("mu"), base),
        )
    tb = TwoBodyConfig(geo, T1, T2, Te)
    tb.validate()
    return tb


def _scenario(cfg: dict, base) -> Scenario:
    b0, b1 = cfg["bodies"]
    T1, T2, Te = _temps(cfg)
    dyn = cfg.get("dynamics", {})
    body = BodySpec(
        _require(cfg, "bodies", 0, "R"),
        b0["density"],
        build_material(b0["material"], base),
        R_inner=b0.get("R_inner", 0.0),
        specific_heat=b0.get("specific_heat", 800.0),
        orientation=b0.get("orientation", "above"),
    )
    return Scenario(
        body,
        build_material(b1["material"], base),
        T1,
        T2,
        Te,
        method=cfg.get("method", "dipole"),
        l_max=cfg.get("l_max"),
        g=dyn.get("g", 9.81),
        include_equilibrium=dyn.get("include_equilibrium", True),
        rtol=cfg.get("quadrature", {}).get("rtol", 1e-5),
    )


# ---------------------------------------------------------------------------
# commands


def run_radiate(cfg, base, rtol):
    var, vals = _sweep_values(cfg)
    method = cfg.get("method", "full")
    rows, spectrum = [], None
    for v in vals:
        c = _apply(cfg, var, v)
        T = _temps(c)[0]
        b = c["bodies"][0]
        mat = build_material(b["material"], base)
        mu = build_material(b.get("mu"), base)
        bb = blackbody_flux(T)
        if c["geometry"]["type"] == "plate":
            H = plate_emission(mat, mu, T, rtol=rtol)
            rows.append({"T_K": T, "H_W_per_m2": H, "H_over_blackbody": H / bb})
            continue
        R = _require(c, "bodies", 0, "R")
        if method == "full":
            res = sphere_emission(mat, R, T, mu, l_max=cfg.get("l_max"), rtol=rtol)
            H = res.total
            if len(vals) == 1:
                spectrum = {"omega_rad_s": res.omega_grid.tolist(), "dH_domega_Ws": res.integrand.tolist()}
        elif method in ("dipole_full", "dipole_linear", "polarizability"):
            H = sphere_emission_approx(method, mat, R, T, mu, rtol=rtol)
        else:
            raise ConfigError(f"method '{method}' is not available for radiate")
        rows.append(
            {"R_m": R, "T_K": T, "H_W": H, "H_over_blackbody": H / (4 * math.pi * R**2 * bb)}
        )
    return rows, {"spectrum": spectrum} if spectrum else {}


def run_transfer(cfg, base, rtol):
    var, vals = _sweep_values(cfg)
    method = cfg.get("method", "one_reflection")
    lmax = cfg.get("l_max")
    rows, extra = [], {}
    for v in vals:
        c = _apply(cfg, var, v)
        tb = _two_body(c, base)
        prop = evan = None
        if isinstance(tb.geometry, SphereSphere):
            if method == "exact":
                res = sphere_sphere_transfer_exact(tb, lmax, rtol=rtol)
            elif method == "one_reflection":
                res = sphere_sphere_transfer_1refl(tb, lmax, rtol=rtol)
            elif method == "dipole":
                res = sphere_sphere_transfer_dipole(tb)
            else:
                raise ConfigError(f"method '{method}' is not available for sphere_sphere transfer")
            total = res.H_1to2
        else:
            if method == "one_reflection":
                res = sphere_plate_transfer_1refl(tb, lmax, rtol=rtol)
                total, prop, evan = res.H_1to2, res.propagating, res.evanescent
            elif method in ("asymptotic_near", "asymptotic_far"):
                res = None
                total = sphere_plate_transfer_asymptotic(method.split("_")[1], tb)
            else:
                raise ConfigError(f"method '{method}' is not available for sphere_plate transfer")
        rows.append(
            {
                "d_m": tb.geometry.d,
                "T1_K": tb.T1,
                "T2_K": tb.T2,
                "total_W": total,
                "propagating_W": prop,
                "evanescent_W": evan,
            }
        )
        if len(vals) == 1 and res is not None and np.size(res.spectrum):
            spec = np.asarray(res.spectrum)
            spec = spec.sum(axis=-1) if spec.ndim == 2 else spec  # propagating + evanescent
            order = np.argsort(res.omega)
            extra["spectrum"] = {
                "omega_rad_s": np.asarray(res.omega)[order].tolist(),
                "dH_domega_Ws": spec[order].tolist(),
            }
    return rows, extra


def run_force(cfg, base, rtol):
    var, vals = _sweep_values(cfg)
    method = cfg.get("method", "dipole")
    if method not in ("dipole", "one_reflection"):
        raise ConfigError(f"method '{method}' is not available for force")
    rows = []
    for v in vals:
        c = _apply(cfg, var, v)
        tb = _two_body(c, base)
        fb = total_force(tb, method, c.get("l_max"), rtol=rtol)
        row = {
            "d_m": tb.geometry.d,
            "F_total_N": fb.F_total,
            "F_interaction_N": fb.F_interaction_from_other,
            "F_self_N": fb.F_self,
            "F_equilibrium_N": fb.F_equilibrium,
        }
        b0 = c["bodies"][0]
        if isinstance(tb.geometry, SpherePlate) and "density" in b0:
            scn = _scenario(c, base)
            # toward the plate, gravity included, in units of the weight
            row["F_over_FG"] = (fb.F_total - scn.body.gravity_d(scn.g)) / scn.weight
        rows.append(row)
    return rows, {}


def _d_window(cfg):
    dyn = cfg.get("dynamics", {})
    sw = cfg.get("sweep")
    R = cfg["bodies"][0]["R"]
    lo = dyn.get("d_min", sw["start"] if sw and sw["variable"] == "d" else 1.5 * R)
    hi = dyn.get("d_max", sw["stop"] if sw and sw["variable"] == "d" else 100 * R)
    if not hi > lo > R:
        raise ConfigError("dynamics window must satisfy R < d_min < d_max")
    return lo, hi


def run_levitate(cfg, base, rtol):
    scn = _scenario(cfg, base)
    lo, hi = _d_window(cfg)
    n = cfg.get("sweep", {}).get("points", 41)
    grid = np.geomspace(lo, hi, n)
    prof = force_profile(scn, grid)
    rows = [
        {k: r[k] for k in ("d_m", "F_d_N", "F_over_FG", "interaction", "self", "equilibrium", "error")} for r in prof
    ]
    bad = [r for r in prof if r["error"]]
    if bad:
        raise NumericalFailure(bad[0]["error"], rows)
    ff = ForceField(scn, lo, hi)
    pts = find_levitation_points(ff, (lo, hi), n_scan=max(n, 41))
    return rows, {"levitation_points": [{"d_m": d, "stability": s} for d, s in pts]}


def run_trajectory(cfg, base, rtol):
    scn = _scenario(cfg, base)
    dyn = cfg.get("dynamics", {})
    lo, hi = _d_window(cfg)
    cooling = dyn.get("with_cooling", False)
    T_grid = dyn.get("T_grid")
    if cooling and not T_grid:
        T_grid = list(np.linspace(min(scn.T_p, scn.T_env, scn.T_s), scn.T_s, 7))
    ff = ForceField(scn, lo, hi, T_grid=T_grid if cooling else None, with_heat=cooling)
    d0 = dyn.get("d0", 0.5 * (lo + hi))
    tr = integrate_trajectory(
        ff,
        scn.body.mass,
        (d0, dyn.get("v0", 0.0), scn.T_s),
        dyn.get("t_end", 0.01),
        with_cooling=cooling,
        n_samples=dyn.get("samples", 500),
    )
    return tr.rows(), {"summary": {"event": tr.event, "contact_time_s": tr.contact_time}}


COMMANDS = {
    "radiate": run_radiate,
    "transfer": run_transfer,
    "force": run_force,
    "levitate": run_levitate,
    "trajectory": run_trajectory,
}


# ---------------------------------------------------------------------------
# output


def _clean(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _columns(rows):
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = result["columns"]
    w.writerow(cols)
    for r in result["rows"]:
        w.writerow(["" if r.get(c) is None else (f"{r[c]:.15g}" if isinstance(r[c], float) else r[c]) for c in cols])
    return buf.getvalue()


def run(cfg: dict, base: Path | None = None) -> tuple[int, dict]:
    """Validate and execute a scenario; returns (exit code, result document)."""
    cmd = cfg.get("command") if isinstance(cfg, dict) else None
    try:
        validate_config(cfg)
    except (jsonschema.ValidationError, ConfigError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        return EXIT_CONFIG, {"error": f"invalid configuration: {msg}", "command": cmd}
    rtol = cfg.get("quadrature", {}).get("rtol", 1e-6)
    method = cfg.get("method", DEFAULT_METHOD[cmd])
    code, status, err, extra = EXIT_OK, "ok", None, {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rows, extra = COMMANDS[cmd](cfg, base, rtol)
        except (ConfigError, MaterialError, OSError) as exc:
            return EXIT_CONFIG, {"error": f"invalid configuration: {exc}", "command": cmd}
        except NumericalFailure as exc:
            rows, code, status, err = exc.rows, EXIT_NUMERIC, "numerical_failure", str(exc)
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            rows, code, status, err = [], EXIT_NUMERIC, "numerical_failure", f"{type(exc).__name__}: {exc}"
    notes: list[str] = []
    for w in caught:
        text = f"{w.category.__name__}: {w.message}"
        if text not in notes:
            notes.append(text)
    rows = [{k: _clean(v) for k, v in r.items()} for r in rows]
    result = {
        "command": cmd,
        "method": method,
        "status": status,
        "version": __version__,
        "validity_warnings": notes,
        "columns": _columns(rows),
        "rows": rows,
    }
    if err:
        result["error"] = err
    for k, v in extra.items():
        if k == "summary":
            v = {kk: _clean(vv) for kk, vv in v.items()}
        if k == "levitation_points":
            v = [{"d_m": float(p["d_m"]), "stability": p["stability"]} for p in v]
        result[k] = v
    return code, result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="neqcasimir", description="Non-equilibrium heat radiation, transfer and forces.")
    ap.add_argument("--config", required=True, help="JSON scenario file")
    ap.add_argument("--out", help="output path (overrides output.path; '-' for stdout)")
    ap.add_argument("--threads", type=int, default=1, help="worker bound (evaluation is single-threaded)")
    args = ap.parse_args(argv)
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    path = Path(args.config)
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, result = run(cfg, path.parent)
    if code == EXIT_CONFIG:
        print(result["error"], file=sys.stderr)
        return code
    out_cfg = cfg.get("output", {})
    fmt = out_cfg.get("format", "json")
    text = render(result, fmt)
    dest = args.out or out_cfg.get("path")
    if dest and dest != "-":
        Path(dest).write_text(text)
        if fmt == "csv":
            meta = {k: v for k, v in result.items() if k not in ("rows",)}
            Path(str(dest) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    if code != EXIT_OK:
        print(result.get("error", "numerical failure"), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
