import hypothesis
import numpy as np
import pytest

from tafibench.media import Clip, Frame, make_frame

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("default")


def random_frame(rng: np.random.Generator, w: int, h: int) -> Frame:
    return Frame(rng.integers(0, 256, (h, w), dtype=np.uint8),
                 rng.integers(0, 256, (h // 2, w // 2), dtype=np.uint8),
                 rng.integers(0, 256, (h // 2, w // 2), dtype=np.uint8))


def random_clip(seed: int, w: int = 8, h: int = 6, n: int = 3,
                name: str = "clip", label=None) -> Clip:
    rng = np.random.default_rng(seed)
    return Clip(name=name, frames=tuple(random_frame(rng, w, h) for _ in range(n)),
                fps_num=25, fps_den=1, label=label)


def flat_frame(value: int, w: int = 16, h: int = 16) -> Frame:
    return make_frame(np.full((h, w), value, dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
