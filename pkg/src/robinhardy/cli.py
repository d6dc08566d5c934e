"""Command-line front end: JSON configs in, JSON and CSV reports out.

Subcommands: ``estimate``, ``verify``, ``sweep-sigma``, ``exterior``,
``concentrate``. Configurations are validated against the versioned
schemas shipped with the package (the same files live under
``docs/schemas/``) before any computation runs; unknown keys are
rejected.

Exit codes: 0 success, 1 usage or configuration error, 2 mathematical
check violation (an estimate below its certificate or a failed
inequality check).

Every report embeds the sha256 hash of the effective configuration
(after flag overrides), the seed, a mesh summary, and the tool version.
CSV floats are written with ``repr`` so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, RobinHardyError
from .exterior import ExteriorProblem, brute_force_radial_min
from .functional import QuotientForm
from .geometry import (
    Ball,
    BoundaryPartition,
    ConvexPolygon,
    Interval,
    _segment_distances,
    inradius,
)
from .mesh import (
    DEFAULT_GRADE_RATIO,
    RadialLogMesh,
    build_interval_mesh,
    build_polygon_mesh,
    build_radial_mesh,
)
from .oracles import Profile1D, improved_hardy_rhs, profile_inequality_sides, robin_lower_bound
from .solver import (
    CERT_SLACK,
    SolverConfig,
    local_gradient_energy,
    minimize_quotient,
    minimizing_sequence,
)

_COMMANDS = (
    ("estimate", "minimize the quotient for one problem and report the result"),
    ("verify", "run the randomized inequality suites for a given seed"),
    ("sweep-sigma", "solve across a grid of uniform Robin strengths"),
    ("exterior", "brute-force radial minima outside a ball over a parameter grid"),
    ("concentrate", "track energy localization along a minimizing sequence"),
)

_MAX_SERIALIZED_FAILURES = 25


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robinhardy",
        description="Numerical bounds and checks for weighted Hardy quotients "
        "with Robin, Dirichlet, and mixed boundary conditions.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, help_text in _COMMANDS:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, metavar="path", help="JSON run configuration")
        sp.add_argument("--out", default=".", metavar="dir", help="output directory, created if missing")
        sp.add_argument("--seed", type=_u64, default=None, metavar="u64", help="override the config seed")
        sp.add_argument(
            "--sequential",
            action="store_true",
            help="force sequential reductions (runs are sequential either way; recorded in reports)",
        )
        sp.add_argument("--tol", type=float, default=None, metavar="real", help="override solver rel_tol")
        sp.add_argument("--max-iter", type=int, default=None, metavar="n", help="override solver max_iter")
    return parser


# -- config plumbing ----------------------------------------------------------


def _schema(name: str) -> dict:
    ref = resources.files("robinhardy").joinpath(f"schemas/{name}.schema.json")
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_config(path: str, schema_name: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), e.json_path))
    if errors:
        err = errors[-1]
        raise ConfigError(f"config rejected at {err.json_path}: {err.message}")
    return data


def _apply_overrides(cfg: dict, args) -> dict:
    if args.seed is not None:
        cfg["seed"] = args.seed
    solver = dict(cfg.get("solver", {}))
    if args.tol is not None:
        solver["rel_tol"] = args.tol
    if args.max_iter is not None:
        solver["max_iter"] = args.max_iter
    if solver:
        cfg["solver"] = solver
    return cfg


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _meta(command: str, cfg: dict, args, mesh_summary: dict) -> dict:
    return {
        "command": command,
        "tool_version": __version__,
        "config_hash": _config_hash(cfg),
        "seed": int(cfg.get("seed", 0)),
        "sequential": bool(args.sequential),
        "mesh_summary": mesh_summary,
    }


# -- object builders ----------------------------------------------------------


def _build_domain(spec: dict):
    if spec["kind"] == "interval":
        return Interval(float(spec["a"]), float(spec["b"]))
    if spec["kind"] == "polygon":
        return ConvexPolygon(np.asarray(spec["vertices"], dtype=float))
    return Ball(int(spec["dim"]), float(spec["radius"]))


def _build_partition(domain, spec: dict) -> BoundaryPartition:
    sigmas = {
        int(key): math.inf if value == "dirichlet" else float(value)
        for key, value in spec.items()
    }
    partition = BoundaryPartition.from_sigmas(sigmas)
    partition.validate_for(domain)
    return partition


def _build_mesh(domain, spec: dict | None):
    spec = spec or {}
    toward = tuple(spec.get("grade_toward", ()))
    ratio = float(spec.get("grade_ratio", DEFAULT_GRADE_RATIO))
    if isinstance(domain, Interval):
        if "n" not in spec:
            raise ConfigError("interval meshes need mesh.n")
        return build_interval_mesh(domain, int(spec["n"]), grade_ratio=ratio, toward=toward)
    if isinstance(domain, Ball):
        if "n" not in spec:
            raise ConfigError("radial meshes need mesh.n")
        return build_radial_mesh(domain, int(spec["n"]), grade_ratio=ratio, toward=toward)
    if "h" not in spec:
        raise ConfigError("polygon meshes need mesh.h")
    return build_polygon_mesh(
        domain,
        float(spec["h"]),
        grade_near=tuple(spec.get("grade_near", ())),
        grade_depth=spec.get("grade_depth"),
    )


def _build_solver_config(spec: dict | None) -> SolverConfig:
    return SolverConfig(**(spec or {}))


# -- output helpers -----------------------------------------------------------


def _ensure_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    """repr-format a float cell; None becomes the empty cell."""
    if value is None:
        return ""
    return repr(float(value))


# -- commands -----------------------------------------------------------------


def cmd_estimate(args) -> int:
    cfg = _apply_overrides(_load_config(args.config, "estimate"), args)
    out = _ensure_out(args)
    domain = _build_domain(cfg["domain"])
    partition = _build_partition(domain, cfg["partition"])
    mesh = _build_mesh(domain, cfg["mesh"])
    solver_cfg = _build_solver_config(cfg.get("solver"))
    p = float(cfg["p"])

    form = None
    scale = cfg.get("debug", {}).get("weight_scale")
    if scale is not None:
        # Fault injection: inflate the weighted-mass quadrature weights. The
        # certificates stay clean, so the run must trip the violation flag.
        form = QuotientForm(domain, partition, mesh, p)
        form.mass_qw = form.mass_qw * float(scale)

    _, report = minimize_quotient(domain, partition, mesh, p, solver_cfg, form=form)

    payload = report.to_dict()
    history = payload.pop("history")
    payload.update(_meta("estimate", cfg, args, report.mesh_summary))
    payload["history_file"] = "quotient_history.csv"
    _write_json(out / "estimate_report.json", payload)
    _write_csv(
        out / "quotient_history.csv",
        ["iteration", "quotient"],
        [(str(i), _fmt(q)) for i, q in enumerate(history)],
    )

    if report.violation:
        print("violation: estimate fell below the analytic lower bound", file=sys.stderr)
        return 2
    if not report.converged:
        print(
            "error: descent did not converge within max_iter; raise --max-iter or loosen --tol",
            file=sys.stderr,
        )
        return 1
    print(f"lambda_estimate {report.lambda_estimate!r} -> {out / 'estimate_report.json'}")
    return 0


def _random_profile(rng, p_values):
    k = int(rng.integers(1, 5))
    pts = np.sort(rng.uniform(0.05, 1.0, size=k))
    pts = pts[np.concatenate([[True], np.diff(pts) > 1e-3])]
    breakpoints = np.concatenate([[0.0], pts])
    values = rng.uniform(-1.0, 1.0, size=len(breakpoints))
    sigma = math.inf if rng.uniform() < 0.25 else float(rng.uniform(0.0, 10.0))
    if math.isinf(sigma):
        values[0] = 0.0
    p = float(p_values[int(rng.integers(0, len(p_values)))])
    return Profile1D(tuple(breakpoints), tuple(values)), sigma, p


def cmd_verify(args) -> int:
    cfg = _apply_overrides(_load_config(args.config, "verify"), args)
    out = _ensure_out(args)
    seed = int(cfg["seed"])
    rng = np.random.default_rng(seed)
    negate = bool(cfg.get("debug", {}).get("negate_inequality", False))
    p_values = [float(v) for v in cfg.get("p_values", (1.5, 2.0, 3.0))]
    n_profiles = int(cfg.get("profiles", 200))
    n_fields = int(cfg.get("fields_per_class", 100))

    failures = []
    checks = 0

    # Suite 1: trace + gradient energy vs the weighted norm on profiles.
    for i in range(n_profiles):
        profile, sigma, p = _random_profile(rng, p_values)
        lhs, rhs = profile_inequality_sides(profile, sigma, p)
        checks += 1
        ok = lhs >= rhs - 1e-9 * max(1.0, abs(lhs), abs(rhs))
        if negate:
            ok = not ok
        if not ok:
            failures.append(
                {
                    "suite": "interval_inequality",
                    "index": i,
                    "p": p,
                    "sigma": "inf" if math.isinf(sigma) else sigma,
                    "breakpoints": list(profile.breakpoints),
                    "values": list(profile.values),
                    "lhs": lhs,
                    "rhs": rhs,
                }
            )

    # Suite 2: full quotient numerator vs the improved lower bound on the
    # unit square, one partition class at a time.
    square = ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    mesh = build_polygon_mesh(square, float(cfg.get("mesh", {}).get("h", 0.125)))
    classes = {
        "all_dirichlet": {0: math.inf, 1: math.inf, 2: math.inf, 3: math.inf},
        "all_robin": {0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0},
        "mixed": {0: math.inf, 1: 1.0, 2: 2.0, 3: 0.5},
    }
    for cname, sig in classes.items():
        partition = BoundaryPartition.from_sigmas(sig)
        forms = {p: QuotientForm(square, partition, mesh, p) for p in p_values}
        for j in range(n_fields):
            p = float(p_values[int(rng.integers(0, len(p_values)))])
            form = forms[p]
            values = rng.standard_normal(len(mesh.vertices))
            field = form.field(values)
            lhs = form.numerator(field)
            rhs = improved_hardy_rhs(form, field)
            checks += 1
            ok = lhs >= rhs - 1e-6 * max(1.0, abs(lhs), abs(rhs))
            if negate:
                ok = not ok
            if not ok:
                failures.append(
                    {
                        "suite": "quotient_lower_bound",
                        "class": cname,
                        "index": j,
                        "p": p,
                        "values": [float(v) for v in field.values],
                        "lhs": lhs,
                        "rhs": rhs,
                    }
                )

    payload = _meta("verify", cfg, args, mesh.summary())
    payload.update(
        {
            "passed": not failures,
            "checks_run": checks,
            "failure_count": len(failures),
            "failures": failures[:_MAX_SERIALIZED_FAILURES],
            "profiles": n_profiles,
            "fields_per_class": n_fields,
            "p_values": p_values,
        }
    )
    _write_json(out / "verify_report.json", payload)
    print(f"verify: {checks} checks, {len(failures)} failures -> {out / 'verify_report.json'}")
    if failures:
        print("violation: inequality checks failed; see verify_report.json", file=sys.stderr)
        return 2
    return 0


def cmd_sweep_sigma(args) -> int:
    cfg = _apply_overrides(_load_config(args.config, "sweep_sigma"), args)
    out = _ensure_out(args)
    domain = _build_domain(cfg["domain"])
    p = float(cfg["p"])
    sigmas = sorted(float(s) for s in cfg["sigmas"])
    if "mesh" in cfg:
        mesh = _build_mesh(domain, cfg["mesh"])
    elif isinstance(domain, Interval):
        mesh = build_interval_mesh(domain, 2000, toward=(0, 1))
    else:
        mesh = build_radial_mesh(domain, 2000, toward=(0,))
    solver_cfg = _build_solver_config(cfg.get("solver"))
    r_in = inradius(domain)

    rows = []
    violated = False
    for sigma in sigmas:
        partition = BoundaryPartition.from_sigmas({pid: sigma for pid in domain.piece_ids()})
        _, report = minimize_quotient(domain, partition, mesh, p, solver_cfg)
        bound = robin_lower_bound(p, r_in, sigma)
        if report.lambda_estimate < bound - CERT_SLACK or report.violation:
            violated = True
        rows.append((_fmt(sigma), _fmt(report.lambda_estimate), _fmt(bound)))

    _write_csv(out / "sweep_sigma.csv", ["sigma", "lambda", "theorem2_bound"], rows)
    _write_json(out / "sweep_sigma_meta.json", _meta("sweep-sigma", cfg, args, mesh.summary()))
    if violated:
        print("violation: an estimate fell below its lower bound", file=sys.stderr)
        return 2
    print(f"sweep-sigma: {len(rows)} rows -> {out / 'sweep_sigma.csv'}")
    return 0


def cmd_exterior(args) -> int:
    cfg = _apply_overrides(_load_config(args.config, "exterior"), args)
    out = _ensure_out(args)
    grid = cfg["grid"]
    rho_factor = float(cfg.get("rho_factor", 1e6))
    add_switch = bool(cfg.get("add_branch_switch", True))
    n_cells = int(cfg.get("mesh", {}).get("n", 2000))
    solver_spec = cfg.get("solver")
    solver_cfg = SolverConfig(**solver_spec) if solver_spec else None
    # rho_max is a fixed multiple of R, so every row shares one log grid.
    mesh = RadialLogMesh(np.linspace(0.0, math.log(rho_factor), n_cells + 1))

    combos = set()
    for n, p, R in itertools.product(grid["n"], grid["p"], grid["R"]):
        n, p, R = int(n), float(p), float(R)
        for sigma in grid["sigma"]:
            combos.add((n, p, float(sigma), R))
        if add_switch and p > n:
            sigma_star = ((p - n) / (p * R)) ** (p - 1.0)
            combos.add((n, p, sigma_star, R))

    rows = []
    violated = False
    for n, p, sigma, R in sorted(combos):
        problem = ExteriorProblem(n=n, p=p, R=R, sigma=sigma, rho_max=rho_factor * R)
        _, report = brute_force_radial_min(problem, mesh=mesh, config=solver_cfg)
        cert = report.analytic_lower
        gap = None if cert is None else report.lambda_estimate - cert
        violated = violated or report.violation
        rows.append(
            (
                str(n),
                _fmt(p),
                _fmt(sigma),
                _fmt(R),
                _fmt(problem.rho_max),
                _fmt(report.lambda_estimate),
                _fmt(cert),
                _fmt(gap),
            )
        )

    _write_csv(
        out / "exterior.csv",
        ["n", "p", "sigma", "R", "rho_max", "estimate", "certificate", "gap"],
        rows,
    )
    _write_json(out / "exterior_meta.json", _meta("exterior", cfg, args, mesh.summary()))
    if violated:
        print("violation: a radial estimate fell below its certificate", file=sys.stderr)
        return 2
    print(f"exterior: {len(rows)} rows -> {out / 'exterior.csv'}")
    return 0


def _near_region(domain, partition, split: float):
    """Predicate on cell centroids: within split * diameter of the Dirichlet set."""
    ids = list(partition.dirichlet_ids)
    if isinstance(domain, Interval):
        ends = [domain.a if pid == 0 else domain.b for pid in ids]
        cut = split * (domain.b - domain.a)
        return lambda c: min(abs(float(c) - e) for e in ends) < cut
    a, b = domain.edges
    seg_a, seg_b = a[ids], b[ids]
    verts = domain.vertices
    gaps = verts[:, None, :] - verts[None, :, :]
    cut = split * float(np.sqrt((gaps**2).sum(axis=2)).max())

    def near(c):
        pt = np.asarray(c, dtype=float).reshape(1, 2)
        return float(_segment_distances(pt, seg_a, seg_b)[0].min()) < cut

    return near


def cmd_concentrate(args) -> int:
    cfg = _apply_overrides(_load_config(args.config, "concentrate"), args)
    out = _ensure_out(args)
    domain = _build_domain(cfg["domain"])
    partition = _build_partition(domain, cfg["partition"])
    if not partition.has_dirichlet:
        raise ConfigError("concentration needs at least one Dirichlet piece")
    p = float(cfg["p"])
    levels = int(cfg["levels"])
    split = float(cfg.get("split", 0.5))
    solver_cfg = _build_solver_config(cfg.get("solver"))
    base_mesh = _build_mesh(domain, cfg["mesh"]) if "mesh" in cfg else None

    seq = minimizing_sequence(domain, partition, p, levels, base_mesh=base_mesh, config=solver_cfg)
    near = _near_region(domain, partition, split)

    rows = []
    violated = False
    for level, (form, field, report) in enumerate(seq):
        total = form.gradient_energy(field)
        near_energy = local_gradient_energy(form, field, near)
        violated = violated or report.violation
        rows.append(
            (
                str(level),
                _fmt(report.lambda_estimate),
                _fmt(near_energy),
                _fmt(total - near_energy),
            )
        )

    _write_csv(out / "concentrate.csv", ["level", "quotient", "near_energy", "far_energy"], rows)
    meta = _meta("concentrate", cfg, args, seq[-1][2].mesh_summary)
    meta["base_mesh_summary"] = seq[0][2].mesh_summary
    meta["split"] = split
    _write_json(out / "concentrate_meta.json", meta)
    if violated:
        print("violation: a level estimate fell below its certificate", file=sys.stderr)
        return 2
    print(f"concentrate: {levels} levels -> {out / 'concentrate.csv'}")
    return 0


_DISPATCH = {
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "sweep-sigma": cmd_sweep_sigma,
    "exterior": cmd_exterior,
    "concentrate": cmd_concentrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, RobinHardyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
