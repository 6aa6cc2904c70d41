from noetherian.selfcheck import CHECKS, run_checks


def test_every_builtin_check_passes():
    rows = run_checks()
    assert [r["name"] for r in rows] == list(CHECKS)
    assert all(r["ok"] for r in rows), [r for r in rows if not r["ok"]]


def test_unknown_check_is_reported_not_raised():
    rows = run_checks(only="census,nope")
    assert rows[0]["ok"] and rows[1] == {"name": "nope", "ok": False, "detail": {"error": "unknown check"}}
