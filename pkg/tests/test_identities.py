import numpy as np
import pytest

from quatrep.identities import IDENTITIES, check_identities, identity_table

ALWAYS = [
    "dbeta j ^ dbetabar j = 0",
    "nu2 expansion",
    "omega2 expansion",
    "dzeta ^ dzetat ^ omega2 = 0",
    "dzeta ^ dzetat expansion",
    "nu2 ^ omega2 = 4 vol",
    "nu2 ^ omega2 = -da^dab^db^dbb",
    "dz ^ dzt ^ j dzt ^ dz = 0",
    "dz ^ dzt ^ dzt ^ dz = 0",
    "dz^4 = 0",
]


@pytest.fixture(scope="module")
def results():
    return {r.name: r for r in check_identities(points=20, seed=1)}


@pytest.mark.parametrize("name", ALWAYS)
def test_identity_holds(results, name):
    assert results[name].passed, results[name].residual


def test_table_covers_every_identity(results):
    assert set(results) == set(IDENTITIES)
    assert all(np.isfinite(r.residual) for r in results.values())


def test_runtime():
    _, seconds = identity_table(points=100)
    assert seconds < 5
