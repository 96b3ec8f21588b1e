"""Dispatch of experiment subcommands to the laboratory operations.

Every run writes its report (CSV or JSON) and a manifest through a single
ReportWriter and returns an exit status: 0 pass, 2 falsified claim, 1 error.
"""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .geodesics import (
    TorusPoint,
    closed_geodesic_sections,
    first_hit_time,
    verify_hitting_bound,
)
from .lattice import (
    PrimitiveDirection,
    UnitDirection,
    angular_windows,
    best_rational_approx,
    classify_direction,
    continued_fraction_convergents,
    divisor_count,
    enumerate_eps_rational,
    r2_count,
    r2_divisor_formula,
)
from .observability import (
    FrequencySet,
    Interval1D,
    eigenspace_gramian,
    helmholtz_1d_constant,
    helmholtz_strip_constant,
    min_eigenvalue,
    nazarov_ratio,
    nazarov_study,
    observability_constant,
    scaling_study,
    verify_inequality_samples,
)
from .spectral import (
    FourierField2D,
    ball_coefficient_table,
    ball_indicator_coeff,
    propagate,
    propagation_defect_check,
)
from .. import __version__
from ..report.plot_generator import PlotGenerator
from ..report.writers import ReportWriter, RunManifest
from ..utils.config import get_config
from ..utils.error_handlers import (
    ErrorContext,
    FalsifiedAssertionError,
    exit_status_for,
    format_error_for_report,
)
from ..utils.logger import get_logger
from ..utils.validators import ValidationError, validate_choice

OUTPUT_FORMATS = ("csv", "json")
TABLE_SUBCOMMANDS = ("enumerate", "windows", "gramian")
SEEDED_SUBCOMMANDS = ("hit-verify", "propagate-check", "verify-ineq")


@dataclass
class ExperimentConfig:
    """One invocation: subcommand, its parameters and where results go."""

    subcommand: str
    params: Dict[str, Any] = field(default_factory=dict)
    output_dir: Optional[Path] = None
    output_format: Optional[str] = None
    stem: Optional[str] = None

    def resolved_format(self) -> str:
        if self.output_format is None:
            return "csv" if self.subcommand in TABLE_SUBCOMMANDS else "json"
        return validate_choice(self.output_format, "format", OUTPUT_FORMATS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "params": self.params,
            "output_dir": None if self.output_dir is None else str(self.output_dir),
            "format": self.resolved_format(),
            "stem": self.stem or self.subcommand,
        }


@dataclass
class ExperimentResult:
    """What a handler hands back to the runner."""

    payload: Dict[str, Any]
    rows: Optional[List[Dict[str, Any]]] = None
    counters: Dict[str, Any] = field(default_factory=dict)
    falsified: Optional[str] = None
    extra_files: List[Path] = field(default_factory=list)


@dataclass
class RunOutcome:
    status: int
    files: List[Path]
    payload: Dict[str, Any] = field(default_factory=dict)
    error: Optional[BaseException] = None


class ExperimentRunner:
    """Run one ExperimentConfig end to end."""

    def __init__(self):
        self.config = get_config()
        self.logger = get_logger()
        self._handlers: Dict[str, Callable[[Dict[str, Any]], ExperimentResult]] = {
            "enumerate": self._enumerate,
            "classify": self._classify,
            "approx": self._approx,
            "r2": self._r2,
            "windows": self._windows,
            "hit": self._hit,
            "hit-verify": self._hit_verify,
            "sections": self._sections,
            "propagate-check": self._propagate_check,
            "ball-coeff": self._ball_coeff,
            "gramian": self._gramian,
            "obs-const": self._obs_const,
            "verify-ineq": self._verify_ineq,
            "nazarov": self._nazarov,
            "helmholtz1d": self._helmholtz1d,
            "scaling": self._scaling,
            "plot": self._plot,
        }

    @property
    def subcommands(self) -> List[str]:
        return list(self._handlers)

    def run(self, experiment: ExperimentConfig) -> RunOutcome:
        """
        Dispatch, write the report and the manifest, and map the outcome to an exit status.

        Errors are logged and reported in the manifest rather than raised.
        """
        if experiment.subcommand in SEEDED_SUBCOMMANDS:
            experiment.params["seed"] = self._seed(experiment.params)
        with self.logger.run_context(
            experiment.subcommand, seed=experiment.params.get("seed"), stem=experiment.stem
        ):
            return self._run(experiment)

    def _run(self, experiment: ExperimentConfig) -> RunOutcome:
        start = time.perf_counter()
        writer = ReportWriter(experiment.output_dir)
        stem = experiment.stem or experiment.subcommand
        result: Optional[ExperimentResult] = None

        with ErrorContext(f"{experiment.subcommand}", self.logger, raise_on_error=False) as context:
            handler = self._handlers.get(experiment.subcommand)
            if handler is None:
                raise ValidationError(
                    f"unknown subcommand {experiment.subcommand!r}; "
                    f"expected one of {', '.join(self._handlers)}"
                )
            fmt = experiment.resolved_format()
            result = handler(experiment.params)
            writer.files.extend(result.extra_files)
            if experiment.subcommand != "plot":
                if fmt == "csv":
                    writer.write_csv(f"{stem}.csv", result.rows or [_scalars(result.payload)])
                else:
                    writer.write_json(
                        f"{stem}.json", result.payload, schema=f"{experiment.subcommand}/v1"
                    )
            if result.falsified:
                raise FalsifiedAssertionError(result.falsified, evidence=result.payload)

        status = exit_status_for(context.error)
        manifest = RunManifest(
            subcommand=experiment.subcommand,
            config=experiment.to_dict() if context.error is None else _safe_echo(experiment),
            version=__version__,
            status=status,
            duration_seconds=round(time.perf_counter() - start, 6),
            counters=result.counters if result is not None else {},
            error=None if context.error is None else format_error_for_report(
                context.error, experiment.subcommand
            ),
        )
        try:
            manifest_path = writer.output_dir / f"{stem}.manifest.json"
            manifest.files = [str(p) for p in writer.files] + [str(manifest_path)]
            manifest.write(writer, manifest_path.name)
        except (OSError, ValidationError) as e:
            self.logger.error(f"Could not write manifest: {e}")
            if status == 0:
                status = 1

        return RunOutcome(
            status=status,
            files=list(writer.files),
            payload={} if result is None else result.payload,
            error=context.error,
        )

    # --- lattice ---------------------------------------------------------

    def _enumerate(self, p: Dict[str, Any]) -> ExperimentResult:
        rational_set = enumerate_eps_rational(p["eps"])
        rows = rational_set.to_rows()
        return ExperimentResult(
            payload={"eps": rational_set.eps, "cardinality": len(rows), "rows": rows},
            rows=rows,
            counters={"directions": len(rows)},
        )

    def _classify(self, p: Dict[str, Any]) -> ExperimentResult:
        if p.get("vector") is not None:
            xi = UnitDirection.from_vector(*p["vector"])
        else:
            xi = UnitDirection(p["angle"])
        C = p.get("C") or self.config.get("lattice.classify_C", 25.0)
        verdict = classify_direction(xi, p["eps"], C)
        return ExperimentResult(payload=verdict.to_dict())

    def _approx(self, p: Dict[str, Any]) -> ExperimentResult:
        best = best_rational_approx(p["alpha"], p["n_max"])
        convergents = continued_fraction_convergents(p["alpha"], p.get("terms") or 20)
        payload = {
            "alpha": p["alpha"],
            "n_max": p["n_max"],
            "n": best.n,
            "m": best.m,
            "err": best.err,
            "dirichlet_bound": 1.0 / (p["n_max"] + 1),
            "convergents": [list(c) for c in convergents],
        }
        return ExperimentResult(payload=payload)

    def _r2(self, p: Dict[str, Any]) -> ExperimentResult:
        count, reps = r2_count(p["N"], with_representations=True)
        rows = [{"p": a, "q": b} for a, b in reps]
        payload = {
            "N": p["N"],
            "count": count,
            "divisor_formula": r2_divisor_formula(p["N"]) if p["N"] > 0 else 1,
            "divisor_count": divisor_count(p["N"]) if p["N"] > 0 else None,
            "rows": rows,
        }
        return ExperimentResult(payload=payload, rows=rows)

    def _windows(self, p: Dict[str, Any]) -> ExperimentResult:
        denominator = p.get("denominator") or self.config.get("lattice.window_denominator", 24)
        report = angular_windows(p["eps"], denominator, exhaustive=p.get("exhaustive", True))
        payload = {
            "eps": report.eps,
            "denominator": report.denominator,
            "count": len(report.windows),
            "disjoint": report.disjoint,
            "min_separation": report.min_separation,
            "overlaps": [[[a.a, a.b], [b.a, b.b]] for a, b in report.overlaps],
            "rows": report.to_rows(),
        }
        falsified = None
        if not report.disjoint:
            falsified = f"{len(report.overlaps)} overlapping angular windows at eps={report.eps}"
        return ExperimentResult(
            payload=payload,
            rows=report.to_rows(),
            counters={"windows": len(report.windows), "overlaps": len(report.overlaps)},
            falsified=falsified,
        )

    # --- geodesics -------------------------------------------------------

    def _hit(self, p: Dict[str, Any]) -> ExperimentResult:
        record = first_hit_time(
            TorusPoint(p["x"], p["y"]),
            UnitDirection(p["angle"]),
            p["r"],
            p["horizon"],
            center=TorusPoint(*(p.get("center") or (0.0, 0.0))),
        )
        return ExperimentResult(payload=record.to_dict())

    def _hit_verify(self, p: Dict[str, Any]) -> ExperimentResult:
        report = verify_hitting_bound(
            p["eps"],
            C=p.get("C"),
            n_points=p.get("n_points"),
            n_dirs=p.get("n_dirs"),
            seed=p.get("seed"),
            workers=p.get("workers"),
            show_progress=p.get("show_progress", False),
        )
        payload = report.to_dict()
        return ExperimentResult(
            payload=payload,
            rows=report.counterexamples or None,
            counters={"samples": report.n_samples, "rejected": report.n_rejected},
            falsified=None if report.passed else (
                f"{len(report.counterexamples)} hitting times exceed {report.bound:.4f}"
            ),
        )

    def _sections(self, p: Dict[str, Any]) -> ExperimentResult:
        report = closed_geodesic_sections(PrimitiveDirection(p["a"], p["b"]))
        rows = [{"x": q.x, "y": q.y} for q in report.points]
        return ExperimentResult(payload=report.to_dict(), rows=rows)

    # --- spectral --------------------------------------------------------

    def _propagate_check(self, p: Dict[str, Any]) -> ExperimentResult:
        seed = self._seed(p)
        K = p.get("K") or self.config.get("spectral.default_cutoff", 4)
        rng = np.random.default_rng(seed)
        tolerance = 1e-13
        rows = []
        for index in range(p.get("samples") or 1):
            u = FourierField2D.random(K, rng, normalize=True)
            moved = propagate(u, p["t"])
            period = propagate(u, 1.0 / (2.0 * math.pi))
            defect = propagation_defect_check(u, p["h"], p["t"])
            rows.append(
                {
                    "sample": index,
                    "unitarity_error": abs(moved.norm() - u.norm()),
                    "period_error": float(np.max(np.abs((period - u).coeffs))),
                    "defect_lhs": defect.lhs,
                    "defect_rhs": defect.rhs,
                    "defect_pass": defect.passed,
                }
            )
        failing = [
            r for r in rows
            if not r["defect_pass"] or r["unitarity_error"] > tolerance or r["period_error"] > tolerance
        ]
        payload = {"K": K, "t": p["t"], "h": p["h"], "seed": seed, "pass": not failing, "rows": rows}
        return ExperimentResult(
            payload=payload,
            rows=rows,
            counters={"samples": len(rows), "failing": len(failing)},
            falsified=f"{len(failing)} propagation checks failed" if failing else None,
        )

    def _ball_coeff(self, p: Dict[str, Any]) -> ExperimentResult:
        if p.get("table") is not None:
            rows = ball_coefficient_table(p["eps"], p["table"])
            return ExperimentResult(payload={"eps": p["eps"], "M": p["table"], "rows": rows}, rows=rows)
        m = tuple(p.get("m") or (0, 0))
        coeff = ball_indicator_coeff(p["eps"], m)
        return ExperimentResult(payload={"eps": p["eps"], "m": list(m), "coeff": coeff})

    # --- observability ---------------------------------------------------

    def _gramian(self, p: Dict[str, Any]) -> ExperimentResult:
        gramian = eigenspace_gramian(p["N"], p["eps"], p.get("region") or "ball")
        rows = gramian.to_rows()
        payload = {
            "N": p["N"],
            "eps": gramian.eps,
            "region": gramian.region,
            "rank": gramian.rank,
            "trace": gramian.trace,
            "lambda_min": min_eigenvalue(gramian),
            "rows": rows,
        }
        return ExperimentResult(payload=payload, rows=rows)

    def _obs_const(self, p: Dict[str, Any]) -> ExperimentResult:
        report = observability_constant(
            p["eps"],
            self._param(p, "N_max", "observability.N_max"),
            p.get("region") or self.config.get("observability.region", "ball"),
            workers=p.get("workers"),
        )
        return ExperimentResult(
            payload=report.to_dict(), rows=report.to_rows(), counters={"eigenspaces": len(report.rows)}
        )

    def _verify_ineq(self, p: Dict[str, Any]) -> ExperimentResult:
        report = verify_inequality_samples(
            p["eps"],
            N_max=p.get("N_max"),
            n_samples=p.get("n_samples"),
            seed=p.get("seed"),
            quad_points=p.get("quad_points"),
            region=p.get("region") or self.config.get("observability.region", "ball"),
        )
        return ExperimentResult(
            payload=report.to_dict(),
            rows=report.failures or None,
            counters={"samples": report.n_samples, "failures": len(report.failures)},
            falsified=None if report.passed else (
                f"observability inequality failed on {len(report.failures)} checks"
            ),
        )

    def _nazarov(self, p: Dict[str, Any]) -> ExperimentResult:
        measure = self._param(p, "measure", "observability.nazarov.measure")
        if p.get("study"):
            study = nazarov_study(p.get("n_values"), measure, p.get("center") or 0.0)
            return ExperimentResult(payload=study.to_dict(), rows=study.rows)
        frequencies = p.get("frequencies") or list(range(p.get("n") or 1))
        S = FrequencySet(tuple(frequencies))
        E = Interval1D.centered(measure, p.get("center") or 0.0)
        ratio = nazarov_ratio(S, E)
        payload = {
            "frequencies": list(S.frequencies),
            "measure": E.measure,
            "center": E.center,
            "ratio": ratio,
        }
        return ExperimentResult(payload=payload)

    def _helmholtz1d(self, p: Dict[str, Any]) -> ExperimentResult:
        h = self._param(p, "h", "observability.helmholtz.h")
        K = self._param(p, "K", "observability.helmholtz.K")
        if p.get("strip"):
            result = helmholtz_strip_constant(p["eps"], h, K, p.get("Ky"))
            return ExperimentResult(payload=result.to_dict(), rows=result.rows)
        z = self._param(p, "z", "observability.helmholtz.z")
        constant = helmholtz_1d_constant(p["eps"], h, z, K)
        payload = {
            "eps": p["eps"],
            "h": h,
            "z": z,
            "K": K,
            "constant": constant,
            "constant_over_eps_sq": constant / p["eps"] ** 2,
        }
        return ExperimentResult(payload=payload)

    def _scaling(self, p: Dict[str, Any]) -> ExperimentResult:
        study = scaling_study(
            p.get("eps_list"),
            p.get("N_max"),
            region=p.get("region") or "ball",
            workers=p.get("workers"),
        )
        return ExperimentResult(
            payload=study.to_dict(), rows=study.rows, counters={"eps_values": len(study.rows)}
        )

    # --- plotting --------------------------------------------------------

    def _plot(self, p: Dict[str, Any]) -> ExperimentResult:
        path = PlotGenerator().generate(
            p["report"],
            kind=p.get("kind") or "line",
            output_path=p.get("output"),
            x=p.get("x"),
            y=p.get("y"),
            loglog=p.get("loglog"),
        )
        return ExperimentResult(payload={"plot": str(path)}, extra_files=[Path(path)])

    # --- helpers ---------------------------------------------------------

    def _param(self, p: Dict[str, Any], name: str, key: str) -> Any:
        value = p.get(name)
        return self.config.get(key) if value is None else value

    def _seed(self, p: Dict[str, Any]) -> int:
        return self._param(p, "seed", "processing.seed")


def _scalars(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Top-level scalar fields of a payload, as a single CSV row."""
    return {k: v for k, v in payload.items() if not isinstance(v, (list, dict))}


def _safe_echo(experiment: ExperimentConfig) -> Dict[str, Any]:
    try:
        return experiment.to_dict()
    except ValidationError:
        return {"subcommand": experiment.subcommand, "params": experiment.params}
