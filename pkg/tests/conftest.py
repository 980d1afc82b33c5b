import numpy as np
import pytest

from raycut.geometry import circle_template
from raycut.io import PhantomSpec, make_phantom
from raycut.pipeline import SegmentConfig, segment


@pytest.fixture(scope="session")
def disk_setup():
    """Disk phantom sized so the object is ~unit scale in world units."""
    spec = PhantomSpec(kind="disk", size=(400, 400), spacing=(0.005, 0.005),
                       center=(200, 200), radius=160, fg=100, bg=0)
    field, truth = make_phantom(spec)
    return spec, field, truth


@pytest.fixture(scope="session")
def disk_result(disk_setup):
    spec, field, truth = disk_setup
    cfg = SegmentConfig(rays=360, nodes=200, delta_r=2)
    return segment(field, circle_template(), spec.center, cfg)


def dsc(a, b):
    a = np.asarray(a) > 0
    b = np.asarray(b) > 0
    denom = a.sum() + b.sum()
    return 2.0 * np.logical_and(a, b).sum() / denom if denom else 0.0
