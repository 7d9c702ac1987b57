import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def report(capsys):
    """Print a criterion's verdict line outside pytest's capture."""

    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return emit


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
