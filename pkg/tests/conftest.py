"""Shared fixtures.

The expensive session transcripts are built once per pytest run and
shared across modules; the acceptance module is reordered to run last so
its wall-clock criterion covers the whole suite.
"""

import time

import pytest

from pathspin import (
    OUTCOMES,
    AlicePolicy,
    BobPolicy,
    InterceptResend,
    PhaseChoice,
    SpinBasis,
    StateLabel,
    Verdict,
    decode_bit,
    prepare,
    run_session,
    sift,
)
from pathspin.protocol import receiver_distribution


def pytest_configure(config):
    config._suite_start = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # stable partition: everything else first, acceptance checks last
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for status, mark in (("passed", "PASS"), ("xfailed", "XFAIL (documented gap)"),
                         ("failed", "FAIL"), ("xpassed", "FAIL (unexpected pass)"),
                         ("error", "FAIL (error)")):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", "call") != "call" and status != "error":
                continue
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                rows.append((nodeid.split("::")[-1], mark))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, mark in sorted(rows):
            terminalreporter.write_line(f"{mark}: {name}")


@pytest.fixture(scope="session")
def suite_start(request):
    """Wall-clock origin of the whole pytest run."""
    return request.config._suite_start


@pytest.fixture(scope="session")
def uniform_run():
    """100k honest rounds with uniform signal weights; returns (transcript, seconds)."""
    start = time.perf_counter()
    transcript = run_session(
        n_rounds=100_000, alice=AlicePolicy.uniform(), bob=BobPolicy(), seed=2024
    )
    return transcript, time.perf_counter() - start


@pytest.fixture(scope="session")
def family_run():
    """100k honest rounds with the one-parameter weight family at p = 0.8."""
    return run_session(
        n_rounds=100_000, alice=AlicePolicy.family(0.8), bob=BobPolicy(), seed=515
    )


@pytest.fixture(scope="session")
def intercept_pair():
    """Same-seed sessions without and with a full intercept-resend tap."""
    eve = InterceptResend(phi=PhaseChoice.PHI_0, basis=SpinBasis.Y)
    kwargs = dict(n_rounds=20_000, alice=AlicePolicy.uniform(), bob=BobPolicy(), seed=77)
    clean = run_session(**kwargs)
    tapped = run_session(eve=eve, **kwargs)
    return clean, tapped, eve


def exact_intercept_qber(eve: InterceptResend) -> float:
    """Exact kept-round mismatch rate of a full tap, by enumerating every branch.

    Uniform signal weights, independent uniform receiver settings.  Walks
    sent label x receiver setting x attacker outcome x receiver outcome
    with exact probabilities; independent of the sampling path used by
    run_session.
    """
    err = 0.0
    kept = 0.0
    for label in StateLabel:
        for phi in PhaseChoice:
            for basis in SpinBasis:
                if sift(label.group, phi, basis) is not Verdict.KEEP:
                    continue
                weight = 1.0 / 16.0
                kept += weight
                eve_dist = receiver_distribution(prepare(label), eve.phi.radians, eve.basis)
                for eve_idx, p_eve in enumerate(eve_dist):
                    if p_eve < 1e-15:
                        continue
                    resent = prepare(eve.infer_label(OUTCOMES[eve_idx]))
                    bob_dist = receiver_distribution(resent, phi.radians, basis)
                    for bob_idx, p_bob in enumerate(bob_dist):
                        if p_bob < 1e-15:
                            continue
                        bit = decode_bit(label.group, phi, basis, OUTCOMES[bob_idx])
                        if bit != label.bit:
                            err += weight * p_eve * p_bob
    return err / kept


@pytest.fixture(scope="session")
def intercept_qber_oracle():
    return exact_intercept_qber
