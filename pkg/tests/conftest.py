import hypothesis
import pytest

import reachkit._engine

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def _warm_engine():
    # JIT-compile the sweep kernels once so individual tests time only the work.
    reachkit._engine.warmup()
