import numpy as np
import pytest
from scipy.linalg import expm

from probe_engine import (
    BoundaryAssignment,
    KrausSet,
    SpacetimeComplex,
    compose,
    cond_prob_boundary,
    cond_prob_probe,
    effect_bc,
    evaluate,
    expectation,
    instrument_probes,
    null_probe_qm,
    observable_probe,
    probe_from_kraus,
    probe_le,
    pure_state,
    qm_space,
    random_density_matrix,
    random_kraus_set,
    random_pure_state,
    random_unitary,
    state_bc,
)
from probe_engine.errors import (
    DimensionMismatchError,
    KrausShapeError,
    NonPositiveEffectError,
    NonSelfAdjointError,
    NonUnitaryError,
    RegionMismatchError,
)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _interval(cx, n_in, n_out=None):
    """Two-boundary region (initial, final) on qm spaces, registering them on demand."""
    n_out = n_in if n_out is None else n_out
    for n in (n_in, n_out):
        if f"qm{n}" not in cx.spaces:
            cx.add_space(qm_space(n))
    t0 = cx.make_atom("t0", f"qm{n_in}").atom_id
    t1 = cx.make_atom("t1", f"qm{n_out}").atom_id
    return cx.make_region("I", [t0, t1])


def _bcs(cx, region, rho, final):
    t0, t1 = region.boundary
    return BoundaryAssignment({
        t0: state_bc(cx.space_of(t0), rho),
        t1: effect_bc(cx.space_of(t1), final),
    })


# =============================================================================
# Boundary conditions
# =============================================================================

def test_state_bc_records_trace_and_positivity():
    space = qm_space(2)
    rho = state_bc(space, np.diag([0.25, 0.75]))
    assert rho.trace == pytest.approx(1.0)
    assert rho.positive
    flagged = state_bc(space, np.diag([1.5, -0.5]))
    assert flagged.positive is False


def test_state_bc_rejects_bad_operators():
    space = qm_space(2)
    with pytest.raises(NonSelfAdjointError):
        state_bc(space, np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DimensionMismatchError):
        state_bc(space, np.eye(3) / 3.0)


def test_identity_coordinates():
    space = qm_space(2)
    np.testing.assert_allclose(effect_bc(space, np.eye(2)).coords, [np.sqrt(2.0), 0.0, 0.0, 0.0], atol=1e-15)


# =============================================================================
# Kraus sets
# =============================================================================

def test_kraus_set_shape_checks():
    with pytest.raises(KrausShapeError):
        KrausSet(())
    with pytest.raises(KrausShapeError):
        KrausSet((np.eye(2), np.eye(3)))
    with pytest.raises(KrausShapeError):
        KrausSet((np.eye(2),)).compose_after(KrausSet((np.ones((3, 2)),)))


def test_random_kraus_sets_are_trace_preserving(rng):
    for n_in, n_out in [(1, 1), (2, 3), (4, 1), (3, 2)]:
        ks = random_kraus_set(n_in, rng, n_out=n_out)
        assert (ks.n_in, ks.n_out) == (n_in, n_out)
        assert ks.trace_preserving


def test_probe_from_kraus_needs_two_atoms(cx):
    cx.add_space(qm_space(2))
    region = cx.make_region("R", [cx.make_atom("t", "qm2").atom_id])
    with pytest.raises(RegionMismatchError):
        probe_from_kraus(cx, region, KrausSet((np.eye(2),)))


def test_probe_from_kraus_checks_dimensions(cx):
    region = _interval(cx, 2)
    with pytest.raises(KrausShapeError):
        probe_from_kraus(cx, region, KrausSet((np.eye(3),)))


# =============================================================================
# Null-probes
# =============================================================================

def test_hadamard_born_rule(cx):
    region = _interval(cx, 2)
    null = null_probe_qm(cx, region, unitary=HADAMARD)
    plus = pure_state([1.0, 1.0])
    zero = pure_state([1.0, 0.0])
    assert evaluate(null, _bcs(cx, region, zero, plus)) == pytest.approx(1.0, abs=1e-12)
    assert evaluate(null, _bcs(cx, region, zero, pure_state([1.0, -1.0]))) == pytest.approx(0.0, abs=1e-12)


def test_hamiltonian_matches_explicit_unitary(cx, rng):
    region = _interval(cx, 3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = a + a.conj().T
    by_h = null_probe_qm(cx, region, hamiltonian=h, duration=0.7)
    by_u = null_probe_qm(cx, region, unitary=expm(-0.7j * h))
    np.testing.assert_allclose(by_h.tensor, by_u.tensor, atol=1e-10)


def test_null_probe_input_checks(cx):
    region = _interval(cx, 2)
    with pytest.raises(NonUnitaryError):
        null_probe_qm(cx, region, unitary=np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        null_probe_qm(cx, region, unitary=np.eye(2), hamiltonian=np.eye(2))


def test_identity_null_probe_is_primitive_and_traces(cx, rng):
    region = _interval(cx, 3)
    null = null_probe_qm(cx, region)
    assert null.primitive
    rho = random_density_matrix(3, rng)
    assert evaluate(null, _bcs(cx, region, rho, np.eye(3))) == pytest.approx(1.0, abs=1e-12)


# =============================================================================
# Quotients
# =============================================================================

def test_born_rule_recovery():
    rng = np.random.default_rng(11)
    cx = SpacetimeComplex()
    trials = 0
    for n in (2, 3, 4):
        region = _interval(cx, n)
        for _ in range(400):
            psi = random_pure_state(n, rng)
            phi = random_pure_state(n, rng)
            projector = np.outer(phi, phi.conj())
            special, rest = instrument_probes(cx, region, [projector, np.eye(n) - projector])
            result = cond_prob_probe(special, special + rest, _bcs(cx, region, np.outer(psi, psi.conj()), np.eye(n)))
            assert result.quotient == pytest.approx(abs(np.vdot(phi, psi)) ** 2, abs=1e-10)
            trials += 1
    assert trials >= 1000


def test_presence_denominator_is_one():
    rng = np.random.default_rng(12)
    cx = SpacetimeComplex()
    regions = {n: _interval(cx, n) for n in (1, 2, 3, 4)}
    for trial in range(500):
        n = 1 + trial % 4
        region = regions[n]
        channel = random_kraus_set(n, rng)
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        effect = a @ a.conj().T
        effect /= np.linalg.eigvalsh(effect).max() * 1.01
        special, rest = instrument_probes(cx, region, [effect, np.eye(n) - effect], channel=channel)
        b = _bcs(cx, region, random_density_matrix(n, rng), np.eye(n))
        result = cond_prob_probe(special, special + rest, b)
        assert abs(result.denominator - 1.0) <= 1e-12


def test_compose_equals_composed_channel():
    rng = np.random.default_rng(13)
    cx = SpacetimeComplex()
    for n in (1, 2, 3, 4):
        cx.add_space(qm_space(n))
    for _ in range(200):
        n0, n1, n2 = (int(x) for x in rng.integers(1, 5, size=3))
        t0 = cx.make_atom("t0", f"qm{n0}").atom_id
        t1 = cx.make_atom("t1", f"qm{n1}").atom_id
        t2 = cx.make_atom("t2", f"qm{n2}").atom_id
        first_region = cx.make_region("A", [t0, t1])
        second_region = cx.make_region("B", [t1, t2])
        first = random_kraus_set(n0, rng, n_out=n1)
        second = random_kraus_set(n1, rng, n_out=n2)

        composite, gluing = cx.glue(first_region, second_region)
        glued = compose(
            probe_from_kraus(cx, first_region, first),
            probe_from_kraus(cx, second_region, second),
            gluing,
            cx,
        )
        direct = probe_from_kraus(cx, composite, second.compose_after(first))
        assert glued.primitive
        assert np.max(np.abs(glued.tensor - direct.tensor)) <= 1e-9


def test_transition_probability_as_boundary_conditional(cx, rng):
    region = _interval(cx, 3)
    identity = null_probe_qm(cx, region)
    t0, t1 = region.boundary
    for _ in range(20):
        rho = random_density_matrix(3, rng)
        phi = random_pure_state(3, rng)
        rho_bc = state_bc(cx.space_of(t0), rho)
        c = BoundaryAssignment({t0: rho_bc, t1: effect_bc(cx.space_of(t1), np.outer(phi, phi.conj()))})
        b = BoundaryAssignment({t0: rho_bc, t1: effect_bc(cx.space_of(t1), np.eye(3))})
        result = cond_prob_boundary(identity, c, b, cx)
        assert result.quotient == pytest.approx(np.vdot(phi, rho @ phi).real, abs=1e-10)
        assert result.diagnostics == ()


def test_observable_expectation(cx, rng):
    region = _interval(cx, 2)
    u = random_unitary(2, rng)
    sigma_z = np.diag([1.0, -1.0])
    observable = observable_probe(cx, region, sigma_z, channel=KrausSet((u,)))
    presence = null_probe_qm(cx, region, unitary=u)
    rho = random_density_matrix(2, rng)
    result = expectation(observable, presence, _bcs(cx, region, rho, np.eye(2)))
    assert result.quotient == pytest.approx(np.trace(sigma_z @ u @ rho @ u.conj().T).real, abs=1e-10)


def test_instrument_branches_are_below_presence(cx, rng):
    region = _interval(cx, 2)
    effect = np.array([[0.7, 0.2], [0.2, 0.4]])
    special, rest = instrument_probes(cx, region, [effect, np.eye(2) - effect], channel=random_kraus_set(2, rng))
    presence = special + rest
    assert probe_le(special, presence, cx)
    assert not probe_le(presence, special, cx)


def test_instrument_rejects_non_positive_effects(cx):
    region = _interval(cx, 2)
    with pytest.raises(NonPositiveEffectError) as info:
        instrument_probes(cx, region, [np.diag([1.2, -0.2])])
    assert info.value.code == "NonPositiveEffect"


def test_quantum_quotients_stay_in_unit_interval():
    rng = np.random.default_rng(14)
    cx = SpacetimeComplex()
    region = _interval(cx, 2)
    for _ in range(200):
        channel = random_kraus_set(2, rng)
        effect = random_density_matrix(2, rng)
        special, rest = instrument_probes(cx, region, [effect, np.eye(2) - effect], channel=channel)
        final = random_density_matrix(2, rng) * 2.0
        b = _bcs(cx, region, random_density_matrix(2, rng), final)
        result = cond_prob_probe(special, special + rest, b)
        assert -1e-9 <= result.quotient <= 1.0 + 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_povm_branch_probabilities_sum_to_one(n):
    rng = np.random.default_rng(15 + n)
    cx = SpacetimeComplex()
    region = _interval(cx, n)
    for _ in range(50):
        first, second = random_density_matrix(n, rng), random_density_matrix(n, rng)
        # each rho / 2 <= I / 2, so the remainder stays positive
        effects = [first / 2.0, second / 2.0, np.eye(n) - (first + second) / 2.0]
        branches = instrument_probes(cx, region, effects, channel=random_kraus_set(n, rng))
        presence = branches[0] + branches[1] + branches[2]
        b = _bcs(cx, region, random_density_matrix(n, rng), np.eye(n))
        total = sum(cond_prob_probe(branch, presence, b).quotient for branch in branches)
        assert total == pytest.approx(1.0, abs=1e-10)


def test_kraus_probes_are_nonnegative_on_psd_pairs():
    rng = np.random.default_rng(16)
    cx = SpacetimeComplex()
    region = _interval(cx, 2, 3)
    for _ in range(20):
        probe = probe_from_kraus(cx, region, random_kraus_set(2, rng, n_out=3, n_kraus=3))
        assert probe.primitive
        for _ in range(10):
            rank = int(rng.integers(1, 4))
            b = _bcs(cx, region, random_density_matrix(2, rng), random_density_matrix(3, rng, rank=rank) * 3.0)
            assert evaluate(probe, b) >= -1e-10
