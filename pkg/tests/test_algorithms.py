import numpy as np
import pytest

from nmrqc import algorithms as A
from nmrqc import gates as G


def uniform_with_zero_register2(n1, n2):
    psi = np.zeros(2 ** (n1 + n2), dtype=complex)
    psi[:: 2**n2] = 1.0 / np.sqrt(2**n1)
    return psi


WORKED_TABLE = [3, 1, 3, 1, 3, 1, 3, 1]  # period 2, values 3 and 1


def test_oracle_stores_f_on_zero_register():
    circ = A.oracle_circuit(WORKED_TABLE, 3, 2)
    psi = G.apply_circuit_to_vector(circ, uniform_with_zero_register2(3, 2))
    # (|0>+|2>+|4>+|6>)|3> + (|1>+|3>+|5>+|7>)|1>
    for x in range(8):
        want_y = WORKED_TABLE[x]
        for y in range(4):
            amp = psi[(x << 2) | y]
            if y == want_y:
                assert abs(amp - 1 / np.sqrt(8)) < 1e-12
            else:
                assert abs(amp) < 1e-12


def test_oracle_state_is_entangled():
    circ = A.oracle_circuit(WORKED_TABLE, 3, 2)
    psi = G.apply_circuit_to_vector(circ, uniform_with_zero_register2(3, 2))
    assert A.schmidt_rank(psi, 3, 2) == 2


def test_oracle_zero_function_is_identity_on_zero_register():
    circ = A.oracle_circuit([0] * 8, 3, 2)
    psi = uniform_with_zero_register2(3, 2)
    assert np.abs(G.apply_circuit_to_vector(circ, psi) - psi).max() < 1e-12


def test_oracle_copy_function_exhaustive():
    # f(x) = x on n1 = n2 = 2: |x>|y> -> |x>|y xor x>
    circ = A.oracle_circuit([0, 1, 2, 3], 2, 2)
    for x in range(4):
        for y in range(4):
            psi = np.zeros(16, dtype=complex)
            psi[(x << 2) | y] = 1.0
            out = G.apply_circuit_to_vector(circ, psi)
            assert abs(out[(x << 2) | (y ^ x)] - 1.0) < 1e-12


def test_oracle_value_out_of_range():
    with pytest.raises(ValueError, match="range"):
        A.oracle_circuit([4, 0], 1, 2)


def test_worked_example_distribution_and_period():
    res = A.period_find(WORKED_TABLE, n1=3, n2=2)
    dist = res["distribution"]
    assert abs(dist[0] - 0.5) < 1e-10 and abs(dist[4] - 0.5) < 1e-10
    assert dist[[1, 2, 3, 5, 6, 7]].max() < 1e-10
    assert res["recovered_r"] == 2


def test_post_measurement_register_states():
    # collapsing register 2 leaves |0>+|2>+|4>+|6> or |1>+|3>+|5>+|7>;
    # the QFT sends those to |0>+|4> and |0>-|4>
    circ = A.oracle_circuit(WORKED_TABLE, 3, 2)
    psi = G.apply_circuit_to_vector(circ, uniform_with_zero_register2(3, 2))
    amps = psi.reshape(8, 4)
    qft = G.qft_matrix(8, "-")
    for y, parity in ((3, 0), (1, 1)):
        branch = amps[:, y]
        support = {x for x in range(8) if abs(branch[x]) > 1e-12}
        assert support == {x for x in range(8) if x % 2 == parity}
        out = qft @ (branch / np.linalg.norm(branch))
        assert {k for k in range(8) if abs(out[k]) > 1e-10} == {0, 4}
        assert np.sign(out[4].real) == (1 if parity == 0 else -1)


def test_deferred_measurement_equivalence():
    for table, n1, n2 in [(WORKED_TABLE, 3, 2), ([1, 2, 1, 2], 2, 2), ([0, 1, 1, 0], 2, 1)]:
        a = A.period_find(table, n1=n1, n2=n2)["distribution"]
        b = A.period_find(table, n1=n1, n2=n2, measure_register2=True)["distribution"]
        assert np.abs(a - b).max() < 1e-10


def test_constant_function_gives_outcome_zero():
    res = A.period_find([5] * 8, n1=3, n2=3)
    dist = res["distribution"]
    assert abs(dist[0] - 1.0) < 1e-10
    assert res["recovered_r"] is None  # k = 0 carries no information


@pytest.mark.parametrize("r", [1, 2, 4, 8])
def test_distribution_support_is_multiples_of_n_over_r(r):
    n1 = 3
    table = [(x % r) + 1 for x in range(2**n1)]
    dist = A.period_find(table, n1=n1, n2=4)["distribution"]
    support = {k for k in range(2**n1) if dist[k] > 1e-10}
    assert support == set(range(0, 2**n1, 2**n1 // r))


def test_recover_period_examples():
    assert A.recover_period(4, 8) == 2
    assert A.recover_period(0, 8) is None
    assert A.recover_period(3, 8, 8) == 8  # 3/8 is its own best convergent
    with pytest.raises(ValueError):
        A.recover_period(9, 8)


def test_extract_factors():
    assert A.extract_factors(15, 7, 4) == (3, 5)
    assert A.extract_factors(15, 7, 3) is None  # odd period
    assert A.extract_factors(15, 14, 2) is None  # 14^1 = -1 mod 15
    assert A.extract_factors(15, 7, None) is None


def test_problem_validation():
    with pytest.raises(ValueError, match="coprime"):
        A.PeriodFindingProblem(15, 6, 8, 4)
    with pytest.raises(ValueError, match="first register"):
        A.PeriodFindingProblem(15, 7, 6, 4)
    with pytest.raises(ValueError, match="second register"):
        A.PeriodFindingProblem(15, 7, 8, 3)


def test_factor_fifteen_end_to_end():
    problem = A.PeriodFindingProblem(15, 7, 8, 4)
    res = A.period_find(problem)
    assert res["recovered_r"] == 4
    assert res["factors"] == (3, 5)
    assert res["success_probability"] > 0.4
    dist = res["distribution"]
    support = {k for k in range(256) if dist[k] > 1e-10}
    assert support == set(range(0, 256, 64))


def test_sampled_mode_reproducible():
    problem = A.PeriodFindingProblem(15, 7, 8, 4)
    a = A.period_find(problem, mode="sampled", shots=32, seed=123)
    b = A.period_find(problem, mode="sampled", shots=32, seed=123)
    assert a["samples"] == b["samples"]
    c = A.period_find(problem, mode="sampled", shots=32, seed=124)
    assert a["samples"] != c["samples"]


@pytest.mark.parametrize("marked", [0, 1, 2, 3])
def test_grover_exact(marked):
    circ = A.grover_2q(marked)
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    out = G.apply_circuit_to_vector(circ, psi)
    probs = np.abs(out) ** 2
    assert probs[marked] == pytest.approx(1.0, abs=1e-12)


def test_grover_rejects_bad_marked():
    with pytest.raises(ValueError):
        A.grover_2q(4)


@pytest.mark.parametrize(
    "table,constant",
    [
        ([0, 0], True),
        ([1, 1], True),
        ([0, 1], False),
        ([1, 0], False),
        ([0, 0, 0, 0], True),
        ([1, 1, 1, 1], True),
        ([0, 1, 0, 1], False),
        ([0, 0, 1, 1], False),
        ([0, 1, 1, 0], False),
        ([1, 0, 0, 1], False),
    ],
)
def test_deutsch_jozsa(table, constant):
    is_const, register = A.dj_is_constant(table)
    assert is_const is constant
    if constant:
        assert register[0] == pytest.approx(1.0)
    else:
        assert register[0] == pytest.approx(0.0, abs=1e-12)
        # deterministic nonzero outcome
        assert register.max() == pytest.approx(1.0)


def test_dj_affine_oracles_avoid_permutation_gates():
    circ = A.deutsch_jozsa([0, 1, 1, 0])
    assert all(g.kind != "permutation" for g in circ.gates)
