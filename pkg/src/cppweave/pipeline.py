"""Staged driver: input data, SPP routing, grouping with cycle elimination,
trail construction, failure verification, report, DOT export.

Each stage writes its artifact as soon as it finishes so a failing later
stage still leaves the earlier ones on disk for inspection.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

from .cycles import STRICT
from .dot import export_dot
from .grouping import MODES, CppDesign, extra_capacity, form_groups
from .netmodel import NoDisjointPair, TopologyError, format_for, load_demands, load_topology
from .spp import SppSolution, scap, scap_from_totals, solve_spp
from .trails import TrailHierarchy, build_trails
from .verify import VerificationResult, steady_state, tree_steady_state, verify_all

STAGES = ("solve", "convert", "verify", "report", "export-dot")
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2
EXIT_INFEASIBLE = 3
EXIT_INPUT = 4


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def exit_code(self) -> int:
        if isinstance(self.cause, NoDisjointPair):
            return EXIT_INFEASIBLE
        if isinstance(self.cause, (TopologyError, OSError)):
            return EXIT_INPUT
        return EXIT_ERROR


@dataclass(frozen=True)
class RunConfig:
    topology: str
    demands: str
    mode: str = STRICT
    seed: int = 0
    out: str | None = None
    stage: str = "all"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.stage != "all" and self.stage not in STAGES:
            raise ValueError(f"stage must be 'all' or one of {STAGES}")

    def stages(self) -> tuple[str, ...]:
        if self.stage == "all":
            return STAGES
        return STAGES[: STAGES.index(self.stage) + 1]


@dataclass
class MetricsReport:
    mode: str
    seed: int
    working: float
    spp_spare: float
    scap_spp: float
    cpp_protection: float | None = None
    cep_savings: float | None = None
    extra_capacity: float | None = None
    scap_cpp: float | None = None
    group_count: int | None = None
    group_sizes: list[int] = field(default_factory=list)
    apsed: list[int] = field(default_factory=list)
    verification: str | None = None
    unrecovered: list[list[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        def f(x):
            return "-" if x is None else (f"{x:.2f}" if isinstance(x, float) else str(x))

        rows = [
            ("mode", self.mode),
            ("seed", self.seed),
            ("working capacity", f(self.working)),
            ("SPP spare capacity", f(self.spp_spare)),
            ("SPP SCaP %", f(self.scap_spp)),
            ("CPP protection capacity", f(self.cpp_protection)),
            ("CEP savings", f(self.cep_savings)),
            ("extra capacity", f(self.extra_capacity)),
            ("CPP SCaP %", f(self.scap_cpp)),
            ("coding groups", f(self.group_count)),
            ("group sizes", ",".join(map(str, self.group_sizes)) or "-"),
            ("1+1 APS demands", ",".join(map(str, self.apsed)) or "-"),
            ("verification", f(self.verification)),
        ]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows) + "\n"


@dataclass
class PipelineResult:
    config: RunConfig
    report: MetricsReport | None = None
    artifacts: dict[str, str] = field(default_factory=dict)
    spp: SppSolution | None = None
    design: CppDesign | None = None
    hierarchies: dict[int, TrailHierarchy] = field(default_factory=dict)
    verification: VerificationResult | None = None
    steady_state_ok: bool | None = None
    error: StageError | None = None

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return self.error.exit_code
        if self.verification is not None and not (self.verification.passed and self.steady_state_ok):
            return EXIT_VERIFY_FAILED
        return EXIT_OK


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _trails_doc(hierarchies: dict[int, TrailHierarchy]) -> str:
    return _dump([h.to_dict() for _, h in sorted(hierarchies.items())])


def _verification_doc(res: VerificationResult, steady_ok: bool) -> str:
    doc = res.to_dict()
    doc["steady_state_consistent"] = steady_ok
    doc["passed"] = res.passed and steady_ok
    return _dump(doc)


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Run the stages up to ``cfg.stage``; never raises for stage failures.

    A failure is recorded on the result (``error``) with the stage name;
    artifacts from completed stages are kept and, if ``cfg.out`` is set,
    already written.
    """
    result = PipelineResult(cfg)
    out = FsPath(cfg.out) if cfg.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    def emit(name: str, text: str) -> None:
        result.artifacts[name] = text
        if out is not None:
            (out / name).write_text(text, encoding="utf-8")

    stage = "solve"
    try:
        for stage in cfg.stages():
            if stage == "solve":
                topo_text = FsPath(cfg.topology).read_text(encoding="utf-8")
                dem_text = FsPath(cfg.demands).read_text(encoding="utf-8")
                topo = load_topology(topo_text, format_for(cfg.topology))
                demands = load_demands(dem_text, topo, format_for(cfg.demands))
                sol = solve_spp(topo, demands)
                result.spp = sol
                s = scap(sol)
                result.report = MetricsReport(cfg.mode, cfg.seed, s.working, s.spare, s.percent)
                emit("spp.json", sol.to_json())
            elif stage == "convert":
                design = form_groups(result.spp, cfg.mode)
                result.design = design
                emit("design.json", design.to_json())
                result.hierarchies = {
                    gid: build_trails(t, design.topology, cfg.seed) for gid, t in design.trees.items()
                }
                emit("trails.json", _trails_doc(result.hierarchies))
            elif stage == "verify":
                design = result.design
                ok = all(
                    steady_state(h, design.topology) == tree_steady_state(design.trees[gid], design.topology)
                    for gid, h in result.hierarchies.items()
                )
                res = verify_all(design)
                result.verification = res
                result.steady_state_ok = ok
                emit("verification.json", _verification_doc(res, ok))
            elif stage == "report":
                _fill_report(result)
                emit("report.json", result.report.to_json())
            elif stage == "export-dot":
                for name, text in export_dot(result.design, result.hierarchies).items():
                    emit(f"{name}.dot", text)
    except Exception as exc:  # noqa: BLE001 - every stage failure is reported, not raised
        result.error = StageError(stage, exc)
    return result


def _fill_report(result: PipelineResult) -> None:
    rep, design = result.report, result.design
    rep.cpp_protection = design.total_capacity()
    rep.cep_savings = design.cep_savings()
    rep.extra_capacity = extra_capacity(design)
    rep.scap_cpp = scap_from_totals(rep.cpp_protection, rep.working).percent
    rep.group_count = len(design.groups)
    rep.group_sizes = sorted((len(g.members) for g in design.groups), reverse=True)
    rep.apsed = sorted(design.apsed)
    if result.verification is not None:
        passed = result.verification.passed and bool(result.steady_state_ok)
        rep.verification = "PASS" if passed else "FAIL"
        rep.unrecovered = [list(x) for x in result.verification.unrecovered()]


def seed_from_env(default: int) -> int:
    """``CPPWEAVE_SEED`` overrides the configured seed when set."""
    raw = os.environ.get("CPPWEAVE_SEED")
    return int(raw) if raw not in (None, "") else default
