import numpy as np
import pytest
from hypothesis import settings

from topofeat.pointcloud import PointCloud

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

TRIANGLE = [(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]


@pytest.fixture
def triangle() -> PointCloud:
    return PointCloud.from_xy(TRIANGLE)


def iou_masks():
    """5x5 masks: 6 agreeing object pixels, 3 object pixels in each mask only, 13 agreeing background."""
    truth = np.zeros((5, 5), dtype=int)
    pred = np.zeros((5, 5), dtype=int)
    flat_t, flat_p = truth.ravel(), pred.ravel()
    flat_t[:6] = flat_p[:6] = 1
    flat_t[6:9] = 1
    flat_p[9:12] = 1
    return pred, truth


# --- acceptance verdicts ---------------------------------------------------------------

VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
