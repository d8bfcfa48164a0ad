"""Load, evolve and check a scenario in one go."""
from dataclasses import dataclass, field

from .dsl import parse_scenario
from .requirements import Evaluator, check_suite
from .terms import format_term
from .traces import evolve


class TraceInvalid(ValueError):
    def __init__(self, report):
        self.report = report
        bad = [c for c in report.checks if not c.ok]
        who = ", ".join(f"{c.party} {c.actor}" for c in bad)
        t = report.transmission
        super().__init__(f"step {report.index} ({t.label or t.kind}) is not valid: {who} cannot produce it")


class SuiteMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    paths: tuple
    command: str = "analyze"
    fmt: str = "table"
    validate: bool = True
    witnesses: bool = False
    verbose: int = 0
    profile_scope: str = "domain"


@dataclass
class Analysis:
    name: str
    bundle: object
    final: object  # State after the whole trace
    steps: list = field(default_factory=list)  # StepReport per transmission
    verdicts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)


def analyze_bundle(bundle, validate=True, profile_scope="domain"):
    final, steps = evolve(bundle.initial, bundle.trace, check_validity=True, profile_scope=profile_scope)
    if validate:
        for r in steps:
            if not r.ok:
                raise TraceInvalid(r)
    verdicts = check_suite(bundle.suite, final, Evaluator(final))
    return Analysis(bundle.name, bundle, final, steps, verdicts)


def analyze(path, validate=True, profile_scope="domain"):
    return analyze_bundle(parse_scenario(path), validate, profile_scope)


def check_suites(analyses):
    """Requirements with the same name must mean the same thing everywhere."""
    seen = {}
    for a in analyses:
        for r in a.bundle.suite:
            prev = seen.setdefault(r.name, (a.name, r.formula))
            if prev[1] != r.formula:
                raise SuiteMismatch(f"requirement {r.name} differs between {prev[0]} and {a.name}")


def state_after(bundle, step):
    """State after the first ``step`` transmissions (all of them if None)."""
    trace = bundle.trace if step is None else bundle.trace[:step]
    if step is not None and not 0 <= step <= len(bundle.trace):
        raise ValueError(f"step must be between 0 and {len(bundle.trace)}")
    state, _ = evolve(bundle.initial, trace, check_validity=False)
    return state


def describe_steps(steps):
    lines = []
    for r in steps:
        t = r.transmission
        marks = " ".join(f"{c.actor}:{'ok' if c.ok else 'FAIL'}" for c in r.checks)
        lines.append(f"step {r.index} {t.label} {t.kind} {marks}")
        for c in r.checks:
            for m in c.missing:
                lines.append(f"  {c.actor} cannot produce {format_term(m)}")
    return lines
