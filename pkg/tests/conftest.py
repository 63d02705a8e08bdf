import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flatflow.surface import SurfacePoint  # noqa: E402
from flatflow.surfacefile import load_bundled, parse_surface_file  # noqa: E402
from flatflow.surface import build_surface  # noqa: E402

# L origami with the first square cut in two at x = 1.5; the cut adds two
# marked regular points (angle 2pi) but leaves the flat metric unchanged.
L3_SPLIT = """\
flatflow-surface 1
name l3-split
polygon 0 : 0 0 | 1 0 | 1 1 | 0 1
polygon 1 : 1 0 | 1.5 0 | 1.5 1 | 1 1
polygon 2 : 0 1 | 1 1 | 1 2 | 0 2
polygon 3 : 1.5 0 | 2 0 | 2 1 | 1.5 1
glue 0.1 1.3 translation
glue 1.1 3.3 translation
glue 3.1 0.3 translation
glue 0.0 2.2 translation
glue 1.0 1.2 translation
glue 3.0 3.2 translation
glue 0.2 2.0 translation
glue 2.1 2.3 translation
"""


@pytest.fixture(scope="session")
def l3():
    return load_bundled("l3")


@pytest.fixture(scope="session")
def octagon():
    return load_bundled("octagon")


@pytest.fixture(scope="session")
def l3_split():
    return build_surface(parse_surface_file(L3_SPLIT))


def random_point(surface, rng, margin=1e-6):
    """A uniformly random regular point of the surface."""
    areas = np.array([p.area() for p in surface.polygons])
    while True:
        k = int(rng.choice(len(areas), p=areas / areas.sum()))
        P = surface.polygons[k]
        xs = [v[0] for v in P.vertices]
        ys = [v[1] for v in P.vertices]
        x, y = rng.uniform(min(xs), max(xs)), rng.uniform(min(ys), max(ys))
        if P.contains(x, y, eps=-margin):
            return SurfacePoint(P.id, float(x), float(y))


def turn_data(surface, path):
    """(cone angle, arr, dep) at every interior vertex of a path."""
    out = []
    for j in range(1, len(path.segments)):
        v = path.vertices[j]
        theta = surface.cone_points[v.cone].angle if v.is_cone else 2 * math.pi
        out.append((theta, path.segments[j - 1].arr, path.segments[j].dep))
    return out
