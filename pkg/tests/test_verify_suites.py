from mitlab.verify import run_suites, suite_exact, suite_lemmas


def test_exact_suite_all_pass():
    results = suite_exact(11)
    assert results, "suite produced no properties"
    for r in results:
        assert r.ok, f"{r.name}: {r.failures}"


def test_lemma_suites_all_pass():
    for r in suite_lemmas(11):
        assert r.ok, f"{r.name}: {r.failures}"


def test_suites_deterministic_for_seed():
    a = [(r.name, r.passed, r.total) for r in suite_lemmas(5)]
    b = [(r.name, r.passed, r.total) for r in suite_lemmas(5)]
    assert a == b


def test_run_suites_dispatch():
    names = [r.name for r in run_suites(["lemmas"], 1)]
    assert "composition-slope-product-law" in names
