import numpy as np
import pytest

from ensfs import synth


@pytest.fixture(scope="session")
def default_scale_dataset():
    """63-row mixed-type dataset matching the default generator profile."""
    return synth.generate(synth.default_profile(seed=0))


@pytest.fixture(scope="session")
def small_planted_dataset():
    """Compact dataset with two strong planted numeric features.

    Small enough for harness end-to-end tests to stay fast (M is reduced
    in the tests that consume it).
    """
    spec = synth.SynthSpec(
        n_rows=48,
        blocks={
            "p": synth.BlockSpec(n_numeric=4, nominal_levels=(2, 3),
                                 ordinal_levels=(3,)),
            "b": synth.BlockSpec(n_numeric=3),
        },
        planted=(synth.PlantedEffect("p_num1", 1.5),
                 synth.PlantedEffect("b_num1", 1.2, sign=-1)),
        noise_sd=0.6,
        missing_rate=0.03,
        seed=11,
    )
    return synth.generate(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = {}
    for key, label in (("passed", "PASS"), ("failed", "FAIL"),
                       ("error", "FAIL")):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                rows[nodeid.split("::")[-1]] = label
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(rows):
        terminalreporter.write_line(f"{rows[name]}  {name}")
