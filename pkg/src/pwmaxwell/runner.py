"""Config-driven experiment runner.

A JSON config describes one experiment: a domain, sweeps over mesh
subdivisions and direction orders q, a frequency, a material (constant
or layered), the reference field supplying boundary data (and, when it
is an actual solution, the error comparison), solver options and an
output CSV path.  ``run_experiment`` executes every (variant, q, n)
triple in sweep order and returns one result row per triple; failures
are recorded in the row's status and do not abort the sweep.

Reference-field kinds:

* ``dipole``     electric dipole outside the domain (its own ambient
                 epsilon defaults to the medium's constant value and
                 must be given explicitly for layered media, where the
                 dipole then acts as boundary data only)
* ``trig``       trigonometric solution (constant media); it is
                 gate-checked against the Maxwell equation once per run
                 and demoted to boundary-data-only if the check fails
* ``plane_wave`` one basis plane wave of the run itself (manufactured
                 solution, constant media)
* ``custom_g``   a named boundary datum with no associated solution
* ``reference_file``  a stored solution from a previous run; supplies
                 boundary data via its impedance trace and serves as
                 the error reference (self-convergence)

An optional ``error_reference`` path makes errors compare against a
stored solution while g still comes from the ``exact`` entry; layered
self-convergence runs use this (dipole data, stored fine-mesh
reference).

Solution records are .npz files carrying (domain, n, q, omega, mu,
epsilon spec, X) plus a format version; loading verifies metadata.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assembly import assemble_system, default_quadrature_order
from .material import MaterialField, penalty_parameters, VARIANTS
from .mesh import Box, Mesh, build_uniform_mesh
from .planewave import basis_for_element, direction_set
from .reference import (
    DipoleParams,
    ExactField,
    impedance_trace_g,
    make_dipole_field,
    make_trig_field,
    maxwell_residual,
    relative_l2_error,
    vertex_error,
)
from .solver import SolveOptions, solve

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "SolutionRecord",
    "parse_config",
    "run_experiment",
    "emit_csv",
    "save_solution",
    "load_solution",
    "verify_config",
]

log = logging.getLogger("pwmaxwell")

FORMAT_VERSION = 1

# Named boundary data with no associated exact solution.
CUSTOM_G = {
    "linear_xyz": lambda pts: np.stack(
        [pts[:, 0], pts[:, 1], pts[:, 0] + pts[:, 1] + pts[:, 2]], axis=1
    ).astype(complex),
}


@dataclass(frozen=True)
class ExactSpec:
    kind: str  # dipole | trig | plane_wave | custom_g | reference_file
    dipole: DipoleParams | None = None
    name: str | None = None  # custom_g
    path: str | None = None  # reference_file
    entry: int = 0  # plane_wave basis index


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Box
    subdivisions: tuple
    omega: float
    mu: float
    epsilon_spec: tuple  # ("constant", complex) | ("regions", ((box, complex), ...))
    q_list: tuple
    variants: tuple
    exact: ExactSpec
    metric: str = "l2"  # "l2" | "vertex"
    quadrature_override: int | None = None
    solver: SolveOptions = SolveOptions()
    output_path: str = "results.csv"
    error_reference: str | None = None
    save_solution_path: str | None = None


@dataclass(frozen=True)
class ResultRow:
    variant: str
    omega: float
    q: int
    p: int
    h: float
    n_elements: int
    dofs: int
    error: float
    residual: float
    assembly_seconds: float
    solve_seconds: float
    regularization_used: float
    status: str = "ok"


def _parse_omega(value) -> float:
    """A number, or a string like "4pi" / "0.5pi"."""
    if isinstance(value, (int, float)):
        omega = float(value)
    elif isinstance(value, str):
        m = re.fullmatch(r"\s*([0-9.]+)\s*\*?\s*pi\s*", value)
        if not m:
            raise ValueError(f"cannot parse omega {value!r}; use a number or '<factor>pi'")
        omega = float(m.group(1)) * math.pi
    else:
        raise ValueError(f"cannot parse omega {value!r}")
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return omega


def _parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot parse complex value {value!r}; use a number or [re, im]")


def _parse_box(doc) -> Box:
    try:
        return Box(doc["min"], doc["max"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed box {doc!r}: needs 'min' and 'max' corners") from exc


def _parse_epsilon(doc):
    if isinstance(doc, (int, float, list)) and not isinstance(doc, dict):
        return ("constant", _parse_complex(doc))
    if not isinstance(doc, dict):
        raise ValueError(f"malformed epsilon spec {doc!r}")
    if "constant" in doc:
        return ("constant", _parse_complex(doc["constant"]))
    if "regions" in doc:
        regions = []
        for entry in doc["regions"]:
            try:
                regions.append((_parse_box(entry["box"]), _parse_complex(entry["value"])))
            except (KeyError, TypeError) as exc:
                raise ValueError(
                    f"malformed epsilon region {entry!r}: needs 'box' and 'value'"
                ) from exc
        if not regions:
            raise ValueError("epsilon 'regions' list is empty")
        return ("regions", tuple(regions))
    raise ValueError(f"epsilon spec needs 'constant' or 'regions', got {doc!r}")


def _parse_exact(doc, omega, mu, epsilon_spec) -> ExactSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError(f"exact spec needs a 'kind', got {doc!r}")
    kind = doc["kind"]
    if kind == "dipole":
        if "epsilon" in doc:
            eps = _parse_complex(doc["epsilon"])
        elif epsilon_spec[0] == "constant":
            eps = epsilon_spec[1]
        else:
            raise ValueError(
                "dipole in a layered medium needs an explicit ambient 'epsilon'"
            )
        params = DipoleParams(
            x0=tuple(doc.get("location", (0.6, 0.6, 0.6))),
            a=tuple(doc.get("moment", (0.0, 0.0, 1.0))),
            I=float(doc.get("current", 1.0)),
            omega=omega,
            epsilon=eps,
        )
        return ExactSpec(kind="dipole", dipole=params)
    if kind == "trig":
        if epsilon_spec[0] != "constant":
            raise ValueError("the trig reference field requires constant epsilon")
        return ExactSpec(kind="trig")
    if kind == "plane_wave":
        if epsilon_spec[0] != "constant":
            raise ValueError("a plane-wave reference field requires constant epsilon")
        return ExactSpec(kind="plane_wave", entry=int(doc.get("entry", 0)))
    if kind == "custom_g":
        name = doc.get("name")
        if name not in CUSTOM_G:
            raise ValueError(
                f"unknown custom_g name {name!r}; known: {sorted(CUSTOM_G)}"
            )
        return ExactSpec(kind="custom_g", name=name)
    if kind == "reference_file":
        if "path" not in doc:
            raise ValueError("reference_file exact spec needs a 'path'")
        return ExactSpec(kind="reference_file", path=str(doc["path"]))
    raise ValueError(f"unknown exact kind {kind!r}")


def parse_config(document) -> ExperimentConfig:
    """Parse and validate a config from a dict, a JSON string, or a path."""
    if isinstance(document, (str, Path)):
        p = Path(document)
        if p.exists():
            doc = json.loads(p.read_text())
        else:
            doc = json.loads(str(document))
    elif isinstance(document, dict):
        doc = document
    else:
        raise ValueError(f"cannot parse config from {type(document).__name__}")

    for key in ("domain", "subdivisions", "omega", "epsilon", "q_list", "exact"):
        if key not in doc:
            raise ValueError(f"config is missing required field {key!r}")

    domain = _parse_box(doc["domain"])
    subdivisions = tuple(int(n) for n in doc["subdivisions"])
    if not subdivisions or any(n < 1 for n in subdivisions):
        raise ValueError("subdivisions must be a non-empty list of positive integers")
    omega = _parse_omega(doc["omega"])
    mu = float(doc.get("mu", 1.0))
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    epsilon_spec = _parse_epsilon(doc["epsilon"])
    q_list = tuple(int(q) for q in doc["q_list"])
    if not q_list:
        raise ValueError("q_list must be non-empty")
    for q in q_list:
        direction_set(q)  # rejects q < 1
    variants = tuple(doc.get("variants", ["new"]))
    if not variants or any(v not in VARIANTS for v in variants):
        raise ValueError(f"variants must be a non-empty subset of {VARIANTS}, got {variants}")
    exact = _parse_exact(doc["exact"], omega, mu, epsilon_spec)
    if exact.kind in ("dipole", "trig") and mu != 1.0:
        raise ValueError(f"the {exact.kind} reference field assumes mu = 1, got mu = {mu}")
    if exact.kind == "dipole":
        x0 = np.asarray(exact.dipole.x0, dtype=float)
        if bool(domain.contains(x0[None, :])[0]):
            raise ValueError(
                f"dipole location {exact.dipole.x0} lies inside the domain; "
                f"the field would be singular there"
            )
    metric = doc.get("metric", "l2")
    if metric not in ("l2", "vertex"):
        raise ValueError(f"metric must be 'l2' or 'vertex', got {metric!r}")
    quad = doc.get("quadrature_override")
    if quad is not None:
        quad = int(quad)
        if quad < 1:
            raise ValueError(f"quadrature_override must be >= 1, got {quad}")
    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ValueError(f"solver options must be a mapping, got {solver_doc!r}")
    opts = SolveOptions(**solver_doc)
    save_path = doc.get("save_solution")
    n_triples = len(variants) * len(q_list) * len(subdivisions)
    if save_path is not None and n_triples > 1:
        for ph in ("{variant}", "{q}", "{n}"):
            if ph not in save_path:
                raise ValueError(
                    "save_solution with a multi-triple sweep needs "
                    "{variant}/{q}/{n} placeholders in the path"
                )

    # Material construction doubles as coverage validation for layered specs.
    _material_for(build_uniform_mesh(domain, subdivisions[0]), epsilon_spec, mu)

    return ExperimentConfig(
        domain=domain,
        subdivisions=subdivisions,
        omega=omega,
        mu=mu,
        epsilon_spec=epsilon_spec,
        q_list=q_list,
        variants=variants,
        exact=exact,
        metric=metric,
        quadrature_override=quad,
        solver=opts,
        output_path=str(doc.get("output_path", "results.csv")),
        error_reference=doc.get("error_reference"),
        save_solution_path=save_path,
    )


def _material_for(mesh: Mesh, epsilon_spec, mu) -> MaterialField:
    if epsilon_spec[0] == "constant":
        return MaterialField.constant(mesh, epsilon_spec[1], mu=mu)
    return MaterialField.from_regions(mesh, epsilon_spec[1], mu=mu)


# ---------------------------------------------------------------------------
# Solution records


@dataclass(frozen=True)
class SolutionRecord:
    domain: Box
    n: int
    q: int
    omega: float
    mu: float
    epsilon_spec: tuple
    X: np.ndarray
    format_version: int = FORMAT_VERSION

    def metadata(self) -> dict:
        return {
            "format_version": self.format_version,
            "domain_min": list(self.domain.min_corner),
            "domain_max": list(self.domain.max_corner),
            "n": self.n,
            "q": self.q,
            "omega": self.omega,
            "mu": self.mu,
            "epsilon_spec": _epsilon_spec_to_json(self.epsilon_spec),
        }

    def as_exact_field(self) -> ExactField:
        """Evaluate the stored discrete field as a reference."""
        mesh = build_uniform_mesh(self.domain, self.n)
        field = _material_for(mesh, self.epsilon_spec, self.mu)
        bases = [
            basis_for_element(k, self.q, self.omega, field)
            for k in range(mesh.n_elements)
        ]
        nb = bases[0].n_functions
        X = self.X

        def _combine(points, curl):
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            owners = mesh.containing_elements(pts)
            out = np.empty((len(pts), 3), dtype=complex)
            for k in np.unique(owners):
                sel = owners == k
                ev = bases[k].eval_curl_all if curl else bases[k].eval_all
                out[sel] = np.einsum(
                    "mlc,l->mc", ev(pts[sel]), X[k * nb : (k + 1) * nb]
                )
            return out

        return ExactField(
            eval=lambda pts: _combine(pts, curl=False),
            eval_curl=lambda pts: _combine(pts, curl=True),
            kind="custom",
        )


def _epsilon_spec_to_json(spec):
    if spec[0] == "constant":
        return {"constant": [spec[1].real, spec[1].imag]}
    return {
        "regions": [
            {
                "box": {"min": list(b.min_corner), "max": list(b.max_corner)},
                "value": [v.real, v.imag],
            }
            for b, v in spec[1]
        ]
    }


def _epsilon_spec_from_json(doc):
    return _parse_epsilon(doc)


def save_solution(path, record: SolutionRecord):
    np.savez_compressed(
        path, X=record.X, metadata=json.dumps(record.metadata(), sort_keys=True)
    )


def load_solution(path, expect: dict | None = None) -> SolutionRecord:
    """Load a stored solution; optionally verify metadata compatibility.

    ``expect`` may carry any of domain / omega / mu / epsilon_spec (the
    canonical tuple forms); all mismatches are reported together.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"solution file {path} does not exist")
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["metadata"]))
        X = np.asarray(data["X"], dtype=complex)
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"solution file {path} has format version {meta.get('format_version')}, "
            f"expected {FORMAT_VERSION}"
        )
    record = SolutionRecord(
        domain=Box(meta["domain_min"], meta["domain_max"]),
        n=int(meta["n"]),
        q=int(meta["q"]),
        omega=float(meta["omega"]),
        mu=float(meta["mu"]),
        epsilon_spec=_epsilon_spec_from_json(meta["epsilon_spec"]),
        X=X,
    )
    p = (record.q + 1) ** 2
    if X.shape != (record.n**3 * 2 * p,):
        raise ValueError(
            f"solution file {path} is inconsistent: X has shape {X.shape}, "
            f"metadata implies ({record.n**3 * 2 * p},)"
        )
    if expect:
        mismatches = []
        if "domain" in expect:
            d = expect["domain"]
            if not (
                np.allclose(d.min_corner, record.domain.min_corner, atol=1e-12)
                and np.allclose(d.max_corner, record.domain.max_corner, atol=1e-12)
            ):
                mismatches.append("domain")
        for key in ("omega", "mu"):
            if key in expect and not math.isclose(
                expect[key], getattr(record, key), rel_tol=1e-12, abs_tol=0.0
            ):
                mismatches.append(key)
        if "epsilon_spec" in expect:
            if _epsilon_spec_to_json(expect["epsilon_spec"]) != _epsilon_spec_to_json(
                record.epsilon_spec
            ):
                mismatches.append("epsilon_spec")
        if mismatches:
            raise ValueError(
                f"solution file {path} is incompatible with the experiment: "
                f"differing fields {mismatches}"
            )
    return record


# ---------------------------------------------------------------------------
# Experiment execution


def _gate_trig(config: ExperimentConfig) -> bool:
    """Residual gate for the trig field; True when usable as a solution."""
    eps = config.epsilon_spec[1]
    fieldfn = make_trig_field(config.omega, eps)
    rng = np.random.default_rng(20240817)
    lo = config.domain.min_corner
    hi = config.domain.max_corner
    pts = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), (50, 3))
    res = maxwell_residual(fieldfn, pts, config.omega, config.mu, eps)
    if res > 1e-5:
        log.warning(
            "trig field fails the Maxwell residual gate (%.3e); "
            "demoted to boundary data only",
            res,
        )
        return False
    return True


class _TripleContext:
    """Everything common to a single (variant, q, n) run."""

    def __init__(self, config, variant, q, n, reference_field, trig_ok):
        self.config = config
        self.variant = variant
        self.q = q
        self.n = n
        self.mesh = build_uniform_mesh(config.domain, n)
        self.field = _material_for(self.mesh, config.epsilon_spec, config.mu)
        self.bases = [
            basis_for_element(k, q, config.omega, self.field)
            for k in range(self.mesh.n_elements)
        ]
        kmax = max(
            abs(self.field.kappa_of(k, config.omega))
            for k in range(self.mesh.n_elements)
        )
        self.n1d = config.quadrature_override or default_quadrature_order(
            q, kmax, self.mesh.h
        )
        self.weights = penalty_parameters(self.field, variant)
        self.exact, self.g = self._exact_and_g(reference_field, trig_ok)

    def _exact_and_g(self, reference_field, trig_ok):
        cfg = self.config
        spec = cfg.exact
        omega, mu = cfg.omega, cfg.mu
        if spec.kind == "dipole":
            fieldfn = make_dipole_field(spec.dipole)
            sigma = float(np.sqrt(mu / abs(spec.dipole.epsilon)))
            g = lambda pts, n: impedance_trace_g(fieldfn, pts, n, omega, mu, sigma)
            # In a layered medium the dipole solves the wrong equation;
            # it only supplies boundary data there.
            comparable = cfg.epsilon_spec[0] == "constant" and (
                spec.dipole.epsilon == cfg.epsilon_spec[1]
            )
            return (fieldfn if comparable else None), g
        if spec.kind == "trig":
            eps = cfg.epsilon_spec[1]
            fieldfn = make_trig_field(omega, eps)
            sigma = float(np.sqrt(mu / abs(eps)))
            g = lambda pts, n: impedance_trace_g(fieldfn, pts, n, omega, mu, sigma)
            return (fieldfn if trig_ok else None), g
        if spec.kind == "plane_wave":
            basis = self.bases[0]
            if not 0 <= spec.entry < basis.n_functions:
                raise ValueError(
                    f"plane_wave entry {spec.entry} out of range for q={self.q} "
                    f"(2p = {basis.n_functions})"
                )
            l = spec.entry
            fieldfn = ExactField(
                eval=lambda pts: basis.eval_E(l, np.atleast_2d(pts)),
                eval_curl=lambda pts: basis.eval_curl_E(l, np.atleast_2d(pts)),
                kind="custom",
            )
            sigma = self.field.sigma_of(0)
            g = lambda pts, n: impedance_trace_g(fieldfn, pts, n, omega, mu, sigma)
            return fieldfn, g
        if spec.kind == "custom_g":
            fn = CUSTOM_G[spec.name]
            return None, lambda pts, n: fn(pts)
        if spec.kind == "reference_file":
            fieldfn = reference_field

            def g(pts, n):
                owner = int(self.mesh.containing_elements(pts[:1])[0])
                sigma = self.field.sigma_of(owner)
                return impedance_trace_g(fieldfn, pts, n, omega, mu, sigma)

            return fieldfn, g
        raise AssertionError(spec.kind)


def _run_triple(ctx: _TripleContext, error_field) -> tuple:
    cfg = ctx.config
    t0 = time.perf_counter()
    system = assemble_system(
        ctx.mesh, ctx.field, ctx.bases, ctx.weights, ctx.g, ctx.n1d
    )
    t_asm = time.perf_counter() - t0
    t0 = time.perf_counter()
    report = solve(system, cfg.solver)
    t_slv = time.perf_counter() - t0

    if error_field is not None:
        compare = error_field
    else:
        compare = ctx.exact
    if compare is None:
        err = float("nan")
    elif cfg.metric == "vertex":
        err = vertex_error(ctx.mesh, report.X, ctx.bases, compare)
    else:
        err = relative_l2_error(ctx.mesh, report.X, ctx.bases, compare, ctx.n1d)

    p = (ctx.q + 1) ** 2
    row = ResultRow(
        variant=ctx.variant,
        omega=cfg.omega,
        q=ctx.q,
        p=p,
        h=ctx.mesh.h,
        n_elements=ctx.mesh.n_elements,
        dofs=2 * p * ctx.mesh.n_elements,
        error=err,
        residual=report.relative_residual,
        assembly_seconds=t_asm,
        solve_seconds=t_slv,
        regularization_used=report.regularization_used,
    )
    return row, report


def _failed_row(config, variant, q, n, message) -> ResultRow:
    p = (q + 1) ** 2
    nan = float("nan")
    return ResultRow(
        variant=variant,
        omega=config.omega,
        q=q,
        p=p,
        h=float(config.domain.extent[0]) / n,
        n_elements=n**3,
        dofs=2 * p * n**3,
        error=nan,
        residual=nan,
        assembly_seconds=nan,
        solve_seconds=nan,
        regularization_used=nan,
        status=f"failed: {message}",
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list:
    """Run all sweep triples; one ResultRow per triple in sweep order."""
    reference_field = None
    if config.exact.kind == "reference_file":
        record = load_solution(
            config.exact.path,
            expect={
                "domain": config.domain,
                "omega": config.omega,
                "mu": config.mu,
                "epsilon_spec": config.epsilon_spec,
            },
        )
        reference_field = record.as_exact_field()
    error_field = None
    if config.error_reference is not None:
        record = load_solution(
            config.error_reference,
            expect={
                "domain": config.domain,
                "omega": config.omega,
                "mu": config.mu,
                "epsilon_spec": config.epsilon_spec,
            },
        )
        error_field = record.as_exact_field()

    trig_ok = True
    if config.exact.kind == "trig":
        trig_ok = _gate_trig(config)

    triples = [
        (variant, q, n)
        for variant in config.variants
        for q in config.q_list
        for n in config.subdivisions
    ]

    def worker(triple):
        variant, q, n = triple
        try:
            ctx = _TripleContext(config, variant, q, n, reference_field, trig_ok)
            row, report = _run_triple(ctx, error_field)
            if config.save_solution_path is not None:
                path = config.save_solution_path.format(variant=variant, q=q, n=n)
                save_solution(
                    path,
                    SolutionRecord(
                        domain=config.domain,
                        n=n,
                        q=q,
                        omega=config.omega,
                        mu=config.mu,
                        epsilon_spec=config.epsilon_spec,
                        X=report.X,
                    ),
                )
                log.info("saved solution for (%s, q=%d, n=%d) to %s",
                         variant, q, n, path)
            log.info(
                "(%s, q=%d, n=%d): dofs=%d error=%.4e residual=%.2e "
                "assembly=%.1fs solve=%.1fs",
                variant, q, n, row.dofs, row.error, row.residual,
                row.assembly_seconds, row.solve_seconds,
            )
            return row
        except Exception as exc:  # failed triple: record, keep sweeping
            log.warning("(%s, q=%d, n=%d) failed: %s", variant, q, n, exc)
            return _failed_row(config, variant, q, n, exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(worker, triples))
    else:
        rows = [worker(t) for t in triples]
    return rows


# ---------------------------------------------------------------------------
# CSV output


def _error_column(config_or_metric) -> str:
    metric = (
        config_or_metric.metric
        if isinstance(config_or_metric, ExperimentConfig)
        else config_or_metric
    )
    return "vertex_error" if metric == "vertex" else "rel_l2_error"


def emit_csv(rows, path, metric: str = "l2"):
    """Write result rows as CSV; column order mirrors ResultRow."""
    if not rows:
        raise ValueError("no result rows to write")
    cols = [
        "variant", "omega", "q", "p", "h", "n_elements", "dofs",
        _error_column(metric), "residual", "assembly_seconds",
        "solve_seconds", "regularization_used", "status",
    ]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.variant,
                    f"{r.omega:.6g}",
                    str(r.q),
                    str(r.p),
                    f"{r.h:.6g}",
                    str(r.n_elements),
                    str(r.dofs),
                    f"{r.error:.6e}",
                    f"{r.residual:.6e}",
                    f"{r.assembly_seconds:.3f}",
                    f"{r.solve_seconds:.3f}",
                    f"{r.regularization_used:.6g}",
                    r.status,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Invariant suite ("verify" subcommand)


def verify_config(config: ExperimentConfig) -> list:
    """Cheap invariant checks on the smallest sweep triple.

    Returns (name, passed, detail) tuples; meant for quick validation
    of a config and the installed build before a long sweep.
    """
    checks = []
    variant = config.variants[0]
    q = min(config.q_list)
    n = min(config.subdivisions)
    ctx = _TripleContext(
        config, variant, q, n,
        reference_field=None if config.exact.kind != "reference_file" else
        load_solution(config.exact.path).as_exact_field(),
        trig_ok=True,
    )

    ds = direction_set(q)
    norms = np.linalg.norm(ds.directions, axis=1)
    checks.append((
        "direction set on unit sphere",
        bool(np.max(np.abs(norms - 1.0)) < 1e-13),
        f"max deviation {np.max(np.abs(norms - 1.0)):.2e}",
    ))

    system = assemble_system(ctx.mesh, ctx.field, ctx.bases, ctx.weights, ctx.g, ctx.n1d)
    A = system.to_sparse()
    herm = abs(A - A.getH())
    herm_max = herm.max() if herm.nnz else 0.0
    checks.append(("assembled matrix Hermitian", herm_max == 0.0, f"max asymmetry {herm_max:.2e}"))

    rng = np.random.default_rng(7)
    normA = system.frobenius_norm()
    ok = True
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(system.dim) + 1j * rng.standard_normal(system.dim)
        quad = system.quadratic_form(x)
        xn = float(np.vdot(x, x).real)
        if quad.real < -1e-10 * normA * xn or abs(quad.imag) > 1e-10 * normA * xn:
            ok = False
        worst = max(worst, -quad.real / (normA * xn), abs(quad.imag) / (normA * xn))
    checks.append(("quadratic form real nonnegative", ok, f"worst normalized {worst:.2e}"))

    from .assembly import functional_J

    x = rng.standard_normal(system.dim) + 1j * rng.standard_normal(system.dim)
    j_direct = functional_J(x, ctx.mesh, ctx.field, ctx.bases, ctx.weights, ctx.g, ctx.n1d)
    j_matrix = (
        system.quadratic_form(x).real
        - 2.0 * float(np.real(np.vdot(system.rhs, x)))
        + system.g_energy
    )
    rel = abs(j_direct - j_matrix) / max(abs(j_direct), 1e-30)
    checks.append(("functional matches assembled system", rel < 1e-10, f"relative gap {rel:.2e}"))

    if ctx.exact is not None:
        from .reference import check_curl_consistency

        lo = config.domain.min_corner
        hi = config.domain.extent
        pts = rng.uniform(lo + 0.05 * hi, lo + 0.95 * hi, (20, 3))
        try:
            worst = check_curl_consistency(ctx.exact, pts)
            checks.append(("reference curl consistent", True, f"max relative {worst:.2e}"))
        except ValueError as exc:
            checks.append(("reference curl consistent", False, str(exc)))

        gvals = ctx.g(pts[:4], np.array([0.0, 0.0, 1.0]))
        tang = float(np.max(np.abs(gvals @ np.array([0.0, 0.0, 1.0]))))
        checks.append(("boundary data tangential", tang < 1e-12, f"max |g.n| {tang:.2e}"))

    return checks
