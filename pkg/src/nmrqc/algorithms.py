"""Circuit-level quantum algorithms and their classical post-processing.

Period finding follows the canonical two-register layout: register 1
(spins 0 .. n1-1) holds the argument, register 2 (spins n1 .. n1+n2-1)
the function value.  States are evolved as vectors, which keeps the
12-spin factoring instances cheap; the NMR-faithful density-matrix path
is available through gates.apply_circuit for small registers.
"""

from dataclasses import dataclass
from math import gcd, log2

import numpy as np

from . import gates as G
from .operators import check_spin_count

DEFAULT_SEED = 1790


@dataclass(frozen=True)
class PeriodFindingProblem:
    """Find the period of f(x) = base^x mod modulus.

    Register sizes follow the standard bounds: n2 >= ceil(log2 M) so the
    second register can hold any f value, n1 >= 2*ceil(log2 M) so the
    measured phase determines the period.
    """

    modulus: int
    base: int
    n1: int
    n2: int

    def __post_init__(self):
        if self.modulus < 3:
            raise ValueError("modulus must be >= 3")
        if not 1 < self.base < self.modulus:
            raise ValueError("base must satisfy 1 < base < modulus")
        if gcd(self.base, self.modulus) != 1:
            raise ValueError("base must be coprime to the modulus")
        bits = int(np.ceil(log2(self.modulus)))
        if self.n2 < bits:
            raise ValueError(f"second register needs at least {bits} spins")
        if self.n1 < 2 * bits:
            raise ValueError(f"first register needs at least {2 * bits} spins")
        check_spin_count(self.n1 + self.n2)

    def function_table(self):
        return [pow(self.base, x, self.modulus) for x in range(2**self.n1)]


def oracle_circuit(f_table, n1, n2):
    """Permutation gate realizing |x>|y> -> |x>|y XOR f(x)>.

    On |y=0> the second register ends up holding f(x) exactly; the XOR
    embedding keeps the map a bijection for arbitrary (non-injective) f.
    """
    check_spin_count(n1 + n2)
    if len(f_table) != 2**n1:
        raise ValueError(f"function table must have 2^{n1} entries")
    if any(not 0 <= v < 2**n2 for v in f_table):
        raise ValueError("function value out of second-register range")
    mask = 2**n2 - 1
    images = []
    for m in range(2 ** (n1 + n2)):
        x, y = m >> n2, m & mask
        images.append((x << n2) | (y ^ f_table[x]))
    return G.Circuit(n1 + n2, [G.permutation(range(n1 + n2), images)])


def _uniform_register_state(n1, n2):
    psi = np.zeros(2 ** (n1 + n2), dtype=complex)
    block = 2**n2
    psi[0::block] = 1.0 / np.sqrt(2**n1)
    return psi


def register1_distribution(psi, n1, n2):
    """Exact marginal outcome distribution of register 1."""
    probs = np.abs(psi.reshape(2**n1, 2**n2)) ** 2
    return probs.sum(axis=1)


def period_find(problem_or_table, mode="ensemble", shots=None, seed=DEFAULT_SEED,
                n1=None, n2=None, measure_register2=False, convention="-"):
    """Run the period-finding pipeline and post-process the outcomes.

    Accepts either a PeriodFindingProblem or a raw function table (with
    register sizes).  `measure_register2` performs the optional collapse
    of the second register before the QFT; the register-1 distribution is
    provably identical either way, and both code paths exist so that can
    be tested rather than assumed.

    Returns a dict with the exact register-1 distribution, the recovered
    period (None if post-processing failed), sampled outcomes in sampled
    mode, and factors when a PeriodFindingProblem was given.
    """
    if isinstance(problem_or_table, PeriodFindingProblem):
        problem = problem_or_table
        table = problem.function_table()
        n1, n2 = problem.n1, problem.n2
    else:
        problem = None
        table = list(problem_or_table)
        if n1 is None or n2 is None:
            raise ValueError("raw function tables need explicit n1 and n2")

    psi = _uniform_register_state(n1, n2)
    psi = G.apply_circuit_to_vector(oracle_circuit(table, n1, n2), psi)

    qft = G.Circuit(n1 + n2, [G.qft_block(range(n1), convention)])
    nstates = 2**n1
    if measure_register2:
        # collapse register 2, then transform each branch
        amps = psi.reshape(nstates, 2**n2)
        branch_probs = (np.abs(amps) ** 2).sum(axis=0)
        distribution = np.zeros(nstates)
        for y in range(2**n2):
            if branch_probs[y] < 1e-300:
                continue
            branch = np.zeros_like(psi).reshape(nstates, 2**n2)
            branch[:, y] = amps[:, y] / np.sqrt(branch_probs[y])
            out = G.apply_circuit_to_vector(qft, branch.reshape(-1))
            distribution += branch_probs[y] * register1_distribution(out, n1, n2)
        psi_final = None
    else:
        psi_final = G.apply_circuit_to_vector(qft, psi)
        distribution = register1_distribution(psi_final, n1, n2)

    result = {
        "distribution": distribution,
        "n1": n1,
        "n2": n2,
        "final_state": psi_final,
    }

    if mode == "sampled":
        if not shots or shots < 1:
            raise ValueError("sampled mode needs a positive shot count")
        rng = np.random.default_rng(seed)
        samples = rng.choice(nstates, size=shots, p=distribution / distribution.sum())
        result["samples"] = samples.tolist()
        counts = {}
        for s in samples.tolist():
            counts[s] = counts.get(s, 0) + 1
        result["counts"] = counts
        outcome_order = sorted(counts, key=lambda k: (-counts[k], k))
    elif mode == "ensemble":
        outcome_order = sorted(
            range(nstates), key=lambda k: (-distribution[k], k)
        )
        outcome_order = [k for k in outcome_order if distribution[k] > 1e-12]
    else:
        raise ValueError("mode must be 'ensemble' or 'sampled'")

    bound = problem.modulus if problem is not None else nstates
    recovered = None
    for k in outcome_order:
        recovered = _recover_from_outcome(k, nstates, bound, table)
        if recovered is not None:
            break
    result["recovered_r"] = recovered

    # chance that a single measured outcome recovers the period (and, for
    # factoring problems, nontrivial factors)
    success = 0.0
    for k in range(nstates):
        if distribution[k] <= 1e-12:
            continue
        r = _recover_from_outcome(k, nstates, bound, table)
        if r is None:
            continue
        if problem is None or extract_factors(problem.modulus, problem.base, r):
            success += distribution[k]
    result["success_probability"] = float(success)

    if problem is not None:
        result["factors"] = (
            extract_factors(problem.modulus, problem.base, recovered)
            if recovered is not None
            else None
        )
    return result


def _recover_from_outcome(k, nstates, bound, table):
    cand = recover_period(k, nstates, bound)
    if cand is None:
        return None
    for r in _period_candidates(cand, bound):
        if _table_has_period(table, r):
            return r
    return None


def _period_candidates(base_candidate, bound):
    """The continued-fraction denominator and its small multiples."""
    out = []
    mult = 1
    while base_candidate * mult <= bound:
        out.append(base_candidate * mult)
        mult += 1
    return out


def _table_has_period(table, r):
    if r < 1 or r > len(table):
        return False
    return all(table[x] == table[(x + r) % len(table)] for x in range(len(table)))


def recover_period(outcome, nstates, bound=None):
    """Continued-fraction inversion of a measured outcome k ~ m*N/r.

    Returns the denominator of the best convergent of k/N with denominator
    at most `bound` (default N), or None for the uninformative k = 0.
    """
    if not 0 <= outcome < nstates:
        raise ValueError(f"outcome {outcome} out of range for N={nstates}")
    if bound is None:
        bound = nstates
    if outcome == 0:
        return None
    # convergents of outcome/nstates; keep the largest denominator in bound
    a, b = outcome, nstates
    terms = []
    while b:
        terms.append(a // b)
        a, b = b, a % b
    best = 0
    for cut in range(1, len(terms) + 1):
        num, den = 1, 0
        for t in reversed(terms[:cut]):
            num, den = t * num + den, num
        if den > bound:
            break
        best = max(best, den)
    return best if best > 1 else None


def extract_factors(modulus, base, r):
    """gcd(base^(r/2) +- 1, M) when the recovered period allows it."""
    if r is None or r % 2 == 1:
        return None
    half = pow(base, r // 2, modulus)
    if half == modulus - 1:
        return None
    for cand in (gcd(half - 1, modulus), gcd(half + 1, modulus)):
        if 1 < cand < modulus:
            return tuple(sorted((cand, modulus // cand)))
    return None


def grover_2q(marked):
    """Two-qubit Grover search: one iteration lands exactly on |marked>."""
    if not 0 <= marked < 4:
        raise ValueError("marked item must be in 0..3")
    gates = [G.hadamard(0), G.hadamard(1)]
    gates += _phase_flip_2q(marked)
    gates += [G.hadamard(0), G.hadamard(1)]
    gates += _phase_flip_2q(0)
    gates += [G.hadamard(0), G.hadamard(1)]
    return G.Circuit(2, gates)


def _phase_flip_2q(state):
    """Sign flip of one 2-qubit basis state via X-conjugated CPHASE(180)."""
    pre = []
    for spin in (0, 1):
        if not (state >> (1 - spin)) & 1:
            pre.append(G.rotation(spin, "x", 180.0))
    return pre + [G.controlled_phase(0, 1, 180.0)] + list(reversed(pre))


def _affine_form(f_table, nq):
    """(constant, mask) with f(x) = c XOR parity(mask & x), or None."""
    c = f_table[0]
    mask = 0
    for pos in range(nq):
        if f_table[1 << (nq - 1 - pos)] ^ c:
            mask |= 1 << (nq - 1 - pos)
    for x in range(2**nq):
        if f_table[x] != c ^ (bin(mask & x).count("1") % 2):
            return None
    return c, mask


def deutsch_jozsa(f_table):
    """Deutsch-Jozsa circuit for a 1- or 2-bit boolean function table.

    Query register spins 0..n-1, ancilla spin n.  Measuring the query
    register gives all zeros exactly when f is constant.  Constant and
    balanced functions on <= 2 bits are all affine, so their oracles are
    emitted as X/CNOT gates (pulse-compilable); other tables fall back to
    a permutation-gate oracle.
    """
    nq = int(log2(len(f_table)))
    if 2**nq != len(f_table) or nq not in (1, 2):
        raise ValueError("function table must have 2 or 4 entries")
    if any(v not in (0, 1) for v in f_table):
        raise ValueError("function values must be bits")
    n = nq + 1
    gates = [G.rotation(nq, "x", 180.0)]
    gates += [G.hadamard(s) for s in range(n)]
    affine = _affine_form(f_table, nq)
    if affine is not None:
        c, mask = affine
        if c:
            gates.append(G.rotation(nq, "x", 180.0))
        for pos in range(nq):
            if (mask >> (nq - 1 - pos)) & 1:
                gates.append(G.cnot(pos, nq))
    else:
        gates += list(oracle_circuit(f_table, nq, 1).gates)
    gates += [G.hadamard(s) for s in range(nq)]
    return G.Circuit(n, gates)


def dj_is_constant(f_table, convention="-"):
    """Run the DJ circuit and decode: True when the query register is 0."""
    circ = deutsch_jozsa(f_table)
    nq = circ.n - 1
    psi = np.zeros(2**circ.n, dtype=complex)
    psi[0] = 1.0
    psi = G.apply_circuit_to_vector(circ, psi)
    probs = np.abs(psi.reshape(2**nq, 2)) ** 2
    register = probs.sum(axis=1)
    return bool(register[0] > 1.0 - 1e-9), register


def schmidt_rank(psi, n1, n2, tol=1e-10):
    """Rank of the amplitude matrix across the register cut."""
    mat = np.asarray(psi, dtype=complex).reshape(2**n1, 2**n2)
    svals = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(svals > tol * svals.max()))
