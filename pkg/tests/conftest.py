import time
from dataclasses import dataclass

import numpy as np
import pytest

from krylov import ExperimentSpec, build_experiment, gmres_solve
from krylov.experiments import ExperimentProblem, resolve_spec
from krylov.gmres import SolveTrace


@dataclass(frozen=True)
class TimedRun:
    problem: ExperimentProblem
    trace: SolveTrace
    solve_seconds: float


def _timed_run(name: str) -> TimedRun:
    spec = resolve_spec(ExperimentSpec(name=name))
    problem = build_experiment(spec)
    t0 = time.perf_counter()
    trace = gmres_solve(problem.operator, problem.g, n_max=spec.n_max,
                        exact=problem.exact, keep_basis=True)
    elapsed = time.perf_counter() - t0
    return TimedRun(problem=problem, trace=trace, solve_seconds=elapsed)


# The reference runs are expensive at full size; build each once per session
# and share across the structural and acceptance tests.

@pytest.fixture(scope="session")
def baseline_run() -> TimedRun:
    return _timed_run("baseline_M")


@pytest.fixture(scope="session")
def mtilde_run() -> TimedRun:
    return _timed_run("noninjective_Mtilde")


@pytest.fixture(scope="session")
def shift_run() -> TimedRun:
    return _timed_run("shift_R")


@pytest.fixture(scope="session")
def volterra_run() -> TimedRun:
    return _timed_run("volterra_V")


@pytest.fixture(scope="session")
def convolution_run() -> TimedRun:
    return _timed_run("convolution")


@pytest.fixture(scope="session")
def classk_run() -> TimedRun:
    return _timed_run("classk_demo")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


# -- acceptance reporting ----------------------------------------------------
# Print one PASS/FAIL line per acceptance criterion at the end of the run.

_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in item.nodeid:
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    _acceptance_results.append((doc, report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in _acceptance_results:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {doc}")
