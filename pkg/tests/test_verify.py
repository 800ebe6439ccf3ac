from dicodes import verify


def test_closed_form_checks_pass():
    results = verify.check_closed_forms(seed=3, instances=4)
    assert [r.name for r in results] == ["closed forms: fidelity", "closed forms: renyi", "tv sandwich"]
    assert all(r.passed for r in results)


def test_dh_checks_pass():
    assert all(r.passed for r in verify.check_dh_chain(seed=3, instances=4))


def test_regime_checks_pass():
    assert all(r.passed for r in verify.check_regimes())


def test_cross_theorem_check_passes():
    (result,) = verify.check_cross_theorem()
    assert result.passed
    assert "0 violation(s)" in result.detail


def test_format_table():
    results = [verify.CheckResult("alpha", True, "fine"), verify.CheckResult("a longer name", False, "off")]
    lines = verify.format_table(results).splitlines()
    assert lines[0].startswith("check")
    assert "PASS" in lines[1] and "FAIL" in lines[2]
    assert lines[-1] == "1/2 checks passed"


def test_whitening_check_passes():
    (result,) = verify.check_whitening(seed=3, instances=8)
    assert result.name == "whitening identity"
    assert result.passed
