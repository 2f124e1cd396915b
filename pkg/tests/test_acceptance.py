"""One test per reproduction criterion; each prints a single PASS/FAIL line."""
import pytest

from borelcert import acceptance

SLOW = {5, 6, 8, 10}


def _param(k, name):
    marks = [pytest.mark.slow] if k in SLOW else []
    return pytest.param(k, name, id=f"criterion_{k:02d}", marks=marks)


@pytest.mark.parametrize("k,name", [_param(k, name) for k, name, _ in acceptance.CRITERIA])
def test_criterion(k, name, capsys):
    out = acceptance.run(k)
    with capsys.disabled():
        print(f"\ncriterion {k:2d} {'PASS' if out.ok else 'FAIL'} {out.seconds:8.2f}s  {name}")
        if not out.ok:
            print(f"  detail: {out.detail}")
    assert out.ok, out.detail
