import numpy as np
import pytest

from probe_engine import (
    BoundaryAssignment,
    SpacetimeComplex,
    StateSet,
    coarse_grain,
    cond_prob_probe,
    effect_bc,
    one_light_classical,
    one_light_quantum,
    probe_le,
    qm_space,
    random_density_matrix,
    random_kraus_set,
    scale_apparatus_classical,
    stat_space,
    state_bc,
    two_light_classical,
    two_light_quantum,
    zero_like,
)
from probe_engine.errors import NonPositiveEffectError

GREEN_EFFECT = np.array([[0.8, 0.1], [0.1, 0.3]])
SECOND_EFFECT = np.array([[0.4, -0.2j], [0.2j, 0.6]])


@pytest.fixture
def qubit_interval():
    cx = SpacetimeComplex()
    cx.add_space(qm_space(2))
    t0, t1 = cx.make_atom("t0", "qm2").atom_id, cx.make_atom("t1", "qm2").atom_id
    return cx, cx.make_region("lab", [t0, t1])


@pytest.fixture
def classical_interval():
    cx = SpacetimeComplex()
    cx.add_space(stat_space(StateSet("s", ("a", "b", "c"))))
    x, y = cx.make_atom("x", "s").atom_id, cx.make_atom("y", "s").atom_id
    return cx, cx.make_region("lab", [x, y])


def test_coarse_grain_patterns(classical_interval):
    cx, region = classical_interval
    rng = np.random.default_rng(3)
    family = two_light_classical(cx, region, {
        (a, b): rng.random((3, 3)) for a in ("g", "r") for b in ("g", "r")
    })
    assert set(family) == {(a, b) for a in ("g", "r", "*") for b in ("g", "r", "*")}
    np.testing.assert_allclose(
        family[("*", "*")].tensor,
        sum(family[(a, b)].tensor for a in ("g", "r") for b in ("g", "r")),
    )


def test_coarse_grain_needs_consistent_tuples(classical_interval):
    cx, region = classical_interval
    family = one_light_classical(cx, region, np.ones((3, 3)), np.ones((3, 3)))
    with pytest.raises(ValueError):
        coarse_grain({("g",): family[("g",)], ("g", "r"): family[("r",)]})
    with pytest.raises(ValueError):
        coarse_grain({})


def test_one_light_quantum_hierarchy(qubit_interval):
    cx, region = qubit_interval
    family = one_light_quantum(cx, region, GREEN_EFFECT, channel=random_kraus_set(2, np.random.default_rng(4)))
    green, red, presence = family[("g",)], family[("r",)], family[("*",)]
    np.testing.assert_array_equal(presence.tensor, (green + red).tensor)
    assert probe_le(zero_like(green), green, cx)
    assert probe_le(green, presence, cx)


def test_one_light_presence_is_trace(qubit_interval):
    cx, region = qubit_interval
    family = one_light_quantum(cx, region, GREEN_EFFECT)
    t0, t1 = region.boundary
    rho = random_density_matrix(2, np.random.default_rng(5))
    b = BoundaryAssignment({t0: state_bc(cx.space_of(t0), rho), t1: effect_bc(cx.space_of(t1), np.eye(2))})
    result = cond_prob_probe(family[("g",)], family[("*",)], b)
    assert result.denominator == pytest.approx(1.0, abs=1e-12)
    assert result.quotient == pytest.approx(np.trace(GREEN_EFFECT @ rho).real, abs=1e-12)


@pytest.mark.parametrize("effect", [np.diag([1.5, 0.0]), np.diag([0.5, -0.1])])
def test_light_effects_must_lie_between_zero_and_identity(qubit_interval, effect):
    cx, region = qubit_interval
    with pytest.raises(NonPositiveEffectError):
        one_light_quantum(cx, region, effect)
    with pytest.raises(NonPositiveEffectError):
        two_light_quantum(cx, region, GREEN_EFFECT, effect)
    with pytest.raises(NonPositiveEffectError):
        two_light_quantum(cx, region, effect, SECOND_EFFECT)


def test_two_light_quantum_hierarchy(qubit_interval):
    cx, region = qubit_interval
    family = two_light_quantum(cx, region, GREEN_EFFECT, SECOND_EFFECT)
    gr, star_r, star_star = family[("g", "r")], family[("*", "r")], family[("*", "*")]
    assert probe_le(zero_like(gr), gr, cx)
    assert probe_le(gr, star_r, cx)
    assert probe_le(star_r, star_star, cx)
    np.testing.assert_array_equal(star_r.tensor, (family[("g", "r")] + family[("r", "r")]).tensor)


def test_two_light_conditional_first_given_second(qubit_interval):
    cx, region = qubit_interval
    family = two_light_quantum(cx, region, GREEN_EFFECT, SECOND_EFFECT)
    t0, t1 = region.boundary
    rho = np.diag([0.6, 0.4])
    b = BoundaryAssignment({t0: state_bc(cx.space_of(t0), rho), t1: effect_bc(cx.space_of(t1), np.eye(2))})
    result = cond_prob_probe(family[("g", "g")], family[("*", "g")], b, cx=cx, check_hierarchy=True)
    assert 0.0 <= result.quotient <= 1.0
    assert result.diagnostics == ()


def test_classical_one_light_hierarchy(classical_interval):
    cx, region = classical_interval
    rng = np.random.default_rng(6)
    family = one_light_classical(cx, region, rng.random((3, 3)), rng.random((3, 3)))
    assert probe_le(zero_like(family[("g",)]), family[("g",)], cx)
    assert probe_le(family[("g",)], family[("*",)], cx)
    assert not probe_le(family[("*",)], family[("g",)], cx)


def test_scale_apparatus_nested_ranges(classical_interval):
    cx, region = classical_interval
    rng = np.random.default_rng(8)
    edges = [0.0, 1.0, 1.5, 3.5, 4.0, 5.0]
    apparatus = scale_apparatus_classical(cx, region, edges, [rng.random((3, 3)) for _ in range(5)])
    inner = apparatus.range_probe(1.5, 3.5)
    outer = apparatus.range_probe(0.0, 4.0)
    assert probe_le(inner, outer, cx)
    assert probe_le(outer, apparatus.presence, cx)
    np.testing.assert_allclose(inner.tensor, apparatus.probes[2].tensor)
    assert not apparatus.range_probe(1.2, 1.4).tensor.any()


def test_scale_apparatus_input_checks(classical_interval):
    cx, region = classical_interval
    with pytest.raises(ValueError):
        scale_apparatus_classical(cx, region, [0.0, 2.0, 1.0], [np.ones((3, 3))] * 2)
    with pytest.raises(ValueError):
        scale_apparatus_classical(cx, region, [0.0, 1.0, 2.0], [np.ones((3, 3))])
