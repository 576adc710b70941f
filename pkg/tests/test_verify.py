"""The self-check registry: coverage counts, result semantics, and a green
run on the reference models."""

import levyou as lv
from levyou import verify

# one entry per library module's documented invariant set; the registry test
# fails if a module gains or loses checks without this table being updated
EXPECTED_COUNTS = {
    "matops": 4,
    "levy": 4,
    "density": 4,
    "polyspec": 5,
    "spectrum": 4,
    "simulate": 3,
}


def test_registry_covers_every_module():
    assert verify.module_counts() == EXPECTED_COUNTS


def test_registry_keys_unique_and_labeled():
    inv = verify.registry()
    keys = [i.key for i in inv]
    assert len(keys) == len(set(keys)) == sum(EXPECTED_COUNTS.values())
    for i in inv:
        assert i.key.startswith(i.module + ".")
        assert i.description


def test_run_all_green_on_gaussian(gauss1d):
    results = verify.run_all(gauss1d)
    assert len(results) == sum(EXPECTED_COUNTS.values())
    failures = [r for r in results if r.applicable and not r.passed]
    assert failures == []


def test_run_all_skips_inapplicable(stable1d, stable_grid):
    results = verify.run_all(stable1d, grid=stable_grid)
    by_key = {r.key: r for r in results}
    # no long-run distribution test for a law without an exact 1-d sampler
    assert not by_key["simulate.ks_longrun"].applicable
    # the stable scaling law applies only here
    assert by_key["levy.stable_scaling"].applicable


def test_run_all_reports_are_self_describing(cp1d):
    for r in verify.run_all(cp1d):
        assert r.detail
        assert r.module in EXPECTED_COUNTS
