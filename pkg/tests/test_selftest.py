from wassreward import selftest


def test_selftest_passes_and_reports_every_check():
    lines = []
    assert selftest.run_selftest(seed=3, out=lines.append)
    assert len(lines) == len(selftest.CHECKS)
    assert all(line.startswith("PASS") for line in lines)


def test_selftest_reports_failures():
    lines = []
    broken = (("always fails", lambda rng: (False, "broken on purpose")),)
    original = selftest.CHECKS
    selftest.CHECKS = broken
    try:
        assert not selftest.run_selftest(out=lines.append)
    finally:
        selftest.CHECKS = original
    assert lines[0].startswith("FAIL  always fails")
