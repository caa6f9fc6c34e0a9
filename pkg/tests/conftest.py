import numpy as np
import pytest

from thermosdp import EnergyProblem, PauliSum, SpectralHermitian


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2.0 * scale


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_dense_problem(rng, dim, c, norm_cap=1.0):
    """Random dense instance with charges scaled to unit spectral norm."""
    h = random_hermitian(rng, dim)
    charges = []
    for _ in range(c):
        q = random_hermitian(rng, dim)
        q = q / max(np.abs(np.linalg.eigvalsh(q)).max(), 1e-12) * norm_cap
        charges.append(q)
    targets = rng.uniform(-0.3, 0.3, size=c)
    return EnergyProblem(
        SpectralHermitian(h), [SpectralHermitian(q) for q in charges], targets
    )


def random_pauli_sum(rng, n, terms):
    """Random signed Pauli sum with distinct non-identity-heavy indices."""
    chosen = set()
    out = []
    while len(out) < terms:
        index = "".join(rng.choice(list("IXYZ"), size=n))
        if index in chosen:
            continue
        chosen.add(index)
        coeff = float(rng.uniform(0.2, 1.0)) * (1 if rng.random() < 0.5 else -1)
        out.append((index, coeff))
    return PauliSum(n, out)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
