import math
import re

import numpy as np
import pytest
from scipy.special import polygamma as scipy_polygamma

from krylov.experiments import (
    ExperimentSpec,
    build_experiment,
    describe_experiments,
    experiment_names,
    polygamma_trigamma,
    reference_solution,
    resolve_spec,
    run_experiment,
    write_trace_csv,
)

FLOAT_FIELD = re.compile(r"-?\d\.\d{15}e[+-]\d+$")


# -- trigamma -----------------------------------------------------------------

def test_trigamma_at_one_is_basel_sum():
    assert abs(polygamma_trigamma(1) - math.pi**2 / 6) <= 1e-12


def test_trigamma_matches_scipy():
    for m in (1, 2, 17, 251):
        assert abs(polygamma_trigamma(m) - float(scipy_polygamma(1, m))) <= 1e-13


def test_reference_norm_value():
    value = math.sqrt(math.pi**2 / 6 - polygamma_trigamma(251))
    assert abs(value - 1.28099) <= 1e-5


def test_trigamma_tail_identity():
    # the same norm from the closed form and from the finite sum
    closed = math.pi**2 / 6 - polygamma_trigamma(251)
    finite = float(np.sum(1.0 / np.arange(1, 251, dtype=float) ** 2))
    assert abs(closed - finite) <= 1e-12


def test_trigamma_rejects_nonpositive_argument():
    with pytest.raises(ValueError):
        polygamma_trigamma(0)


# -- reference solution ----------------------------------------------------------

def test_reference_solution_norm_matches_closed_form():
    ref = reference_solution(2500)
    assert ref.f.norm() == pytest.approx(ref.f_norm_closed_form, abs=1e-12)
    assert np.count_nonzero(ref.f.values) == 250


def test_reference_solution_needs_room_for_the_cutoff():
    with pytest.raises(ValueError):
        reference_solution(200)


# -- specs and builders ------------------------------------------------------------

def test_registry_lists_six_experiments():
    assert len(experiment_names()) == 6
    assert dict(describe_experiments())


def test_resolve_fills_reference_defaults():
    spec = resolve_spec(ExperimentSpec(name="baseline_M"))
    assert (spec.ambient_dim, spec.n_max) == (2500, 500)
    spec = resolve_spec(ExperimentSpec(name="volterra_V"))
    assert (spec.ambient_dim, spec.n_max) == (2048, 175)


def test_resolve_rejects_unknown_and_oversized():
    with pytest.raises(ValueError):
        resolve_spec(ExperimentSpec(name="nope"))
    with pytest.raises(ValueError):
        resolve_spec(ExperimentSpec(name="baseline_M", ambient_dim=300, n_max=301))


def test_baseline_build_has_the_closed_form_norm():
    problem = build_experiment(ExperimentSpec(name="baseline_M"))
    assert problem.exact.norm() == pytest.approx(1.28099, abs=1e-5)
    assert problem.g.values[0] == pytest.approx(0.2)  # sigma_1 * f_1


def test_volterra_build_samples_the_parabola():
    problem = build_experiment(ExperimentSpec(name="volterra_V"))
    x = problem.operator.space.grid
    assert np.allclose(problem.g.values.real, x**2 / 2)
    assert problem.exact.norm() == pytest.approx(1 / math.sqrt(3), abs=1e-6)


def test_shift_build_datum_components():
    problem = build_experiment(ExperimentSpec(name="shift_R"))
    g = problem.g.values
    assert g[0] == 0.0
    assert g[1] == pytest.approx(1 / 5)    # sigma_1 * f_1
    assert g[2] == pytest.approx(1 / 20)   # sigma_2 * f_2


def test_convolution_build_seeds_an_unreachable_component():
    problem = build_experiment(ExperimentSpec(name="convolution"))
    space = problem.operator.space
    assert problem.exact.values[space.slot_of(0)] == 1.0
    assert problem.krylov_target.values[space.slot_of(0)] == 0.0
    assert problem.g.values[space.slot_of(0)] == 0.0


# -- runner and artifacts ------------------------------------------------------------

def test_run_writes_trace_and_diagnostics(tmp_path):
    spec = ExperimentSpec(name="classk_demo", output_dir=tmp_path)
    result = run_experiment(spec)
    text = result.csv_path.read_text(encoding="utf-8")
    lines = text.strip().splitlines()
    assert lines[0] == "N,residual_norm,error_norm,solution_norm"
    assert len(lines) - 1 == len(result.trace.rows)
    for line in lines[1:]:
        fields = line.split(",")
        assert fields[0].isdigit()
        for field in fields[1:]:
            assert FLOAT_FIELD.match(field)
    assert result.diagnostics_path.exists()
    assert result.report.reducibility_defect is not None


def test_run_reduced_baseline_emits_reducibility_ladder(tmp_path):
    spec = ExperimentSpec(name="baseline_M", ambient_dim=300, n_max=80,
                          output_dir=tmp_path)
    result = run_experiment(spec)
    assert len(result.trace.rows) == 80
    assert result.report.reducibility_defect is not None
    assert len(result.report.reducibility_defect) == 80
    assert "reducibility criterion" in result.report.notes
    text = result.diagnostics_path.read_text(encoding="utf-8")
    assert "# section: reducibility_defect" in text


def test_rerun_is_bit_identical(tmp_path):
    a = run_experiment(ExperimentSpec(name="convolution", output_dir=tmp_path / "a"))
    b = run_experiment(ExperimentSpec(name="convolution", output_dir=tmp_path / "b"))
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
    assert a.diagnostics_path.read_bytes() == b.diagnostics_path.read_bytes()


def test_svg_rendering(tmp_path):
    spec = ExperimentSpec(name="convolution", output_dir=tmp_path)
    result = run_experiment(spec, svg=True)
    assert result.svg_path.exists()
    assert b"<svg" in result.svg_path.read_bytes()[:500]


def test_convolution_report_shows_kernel_locked_error(tmp_path):
    result = run_experiment(ExperimentSpec(name="convolution", output_dir=tmp_path))
    profile = result.report.kernel_error_profile
    assert profile is not None
    assert profile.on_kernel[0][0] == 0
    assert profile.on_kernel[0][1] == pytest.approx(1.0, abs=1e-10)
    assert profile.off_kernel_max <= 1e-10


def test_shift_iterates_stay_far_below_the_truncation_edge(shift_run):
    # datum support ends at slot 251 and each application moves it up one
    # slot, so 500 iterations stay below slot 751, far inside the 2500 window
    basis = shift_run.trace.basis
    occupied = np.nonzero(np.abs(basis.Q).max(axis=1) > 0)[0]
    assert occupied.max() + 1 <= 751
    solution_support = np.nonzero(shift_run.trace.final_solution.values)[0]
    assert solution_support.max() + 1 <= 751


def test_trace_csv_blank_error_column_without_exact(tmp_path):
    from krylov.gmres import gmres_solve
    from krylov.operators import WeightSequence, make_weighted_right_shift
    from krylov.spaces import basis_vector

    op = make_weighted_right_shift(WeightSequence.reciprocal(5.0), 30)
    trace = gmres_solve(op, basis_vector(op.space, 2), n_max=5)
    path = tmp_path / "t.csv"
    write_trace_csv(path, trace)
    row = path.read_text(encoding="utf-8").splitlines()[1].split(",")
    assert row[2] == ""
