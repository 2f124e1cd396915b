from borelcert.apolarity_engine import (certify, conciseness_bound, generate_110_candidates,
                                        test_210 as run_210, test_120 as run_120)
from borelcert.rep_tensor import mamu_problem


def test_m2_is_refuted_at_six():
    cert = certify(mamu_problem(2, 2, 2), 6)
    assert cert.refuted
    assert cert.stages[0]["candidates"] == 3
    assert cert.triples["total"] == 0


def test_m2_survives_at_its_border_rank():
    cert = certify(mamu_problem(2, 2, 2), 7)
    assert cert.conclusion == "survivors_remain"


def test_certificate_hash_is_deterministic():
    a = certify(mamu_problem(2, 2, 2), 6).to_json()
    b = certify(mamu_problem(2, 2, 2), 6).to_json()
    assert a == b
    assert len(a["hash"]) == 64


def test_hash_covers_the_payload():
    cert = certify(mamu_problem(2, 2, 2), 6)
    h = cert.hash
    cert.stages[0]["candidates"] += 1
    assert cert.hash != h


def test_pair_tests_report_required_kernel():
    P = mamu_problem(2, 2, 2)
    for c in generate_110_candidates(P, 6):
        res = run_210(P, c)
        assert res.as_dict()["required"] == 6
        if res.passed:
            assert run_120(P, c).passed is False


def test_below_conciseness_nothing_to_enumerate():
    P = mamu_problem(2, 2, 2)
    assert conciseness_bound(P) == 4
    assert certify(P, 3).refuted
