from soapfilm import checks


def test_suite_passes_and_covers_every_module():
    res = checks.run_suite("all", seed=0)
    failed = [f"{r.module}: {r.name}: {r.detail}" for r in res if not r.passed]
    assert not failed, failed
    assert set(checks.modules()) == {"surface-core", "plateau-catenoids", "normal-graph",
                                     "deficits", "pmc-solver", "boundary-geometry",
                                     "estimates-lab", "cli"}


def test_single_module_matches_full_suite():
    full = {r.name: r.detail for r in checks.run_suite("all", seed=5)}
    part = checks.run_suite("boundary-geometry", seed=5)
    assert part and all(full[r.name] == r.detail for r in part)


def test_seed_changes_random_draws():
    a = checks.run_suite("plateau-catenoids", seed=0)
    b = checks.run_suite("plateau-catenoids", seed=1)
    assert [r.detail for r in a] != [r.detail for r in b]
