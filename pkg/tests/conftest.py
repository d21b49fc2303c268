import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def report_line(capsys):
    """Print a line straight to the terminal, bypassing capture."""
    def _print(text):
        with capsys.disabled():
            print(text)
    return _print
