import math
import warnings

import pytest

DEG = math.pi / 180.0


@pytest.fixture(autouse=True)
def _quiet_odd_cat_warning():
    # Odd-cat states below r0 = sigma_perp emit an informational warning;
    # tests that care assert on it explicitly via pytest.warns.
    warnings.filterwarnings("ignore", message="odd cat with r0 < sigma_perp")
    yield
